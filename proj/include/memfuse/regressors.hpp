#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace memfuse {

using Matrix = Eigen::MatrixXd;  // rows are samples
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

// Per-feature z-scoring fitted on training data. Constant columns keep a unit
// divisor so they map to zero instead of dividing by zero.
class Scaler {
public:
    Scaler() = default;
    Scaler(Vector means, Vector stds);

    static Scaler fit(const Matrix& X);

    Matrix transform(const Matrix& X) const;
    Eigen::Index n_features() const { return means_.size(); }
    const Vector& means() const { return means_; }
    const Vector& stds() const { return stds_; }

private:
    Vector means_;
    Vector stds_;
};

// ---------------------------------------------------------------------------
// Epsilon-SVR with RBF kernel
// ---------------------------------------------------------------------------

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

struct SvrParams {
    double c = 1.0;
    double epsilon = 0.1;
    std::optional<double> gamma;  // empty: 1 / (n_features * var(standardized X))
    double tol = 1e-3;
    int max_passes = 1000;  // iteration cap = max_passes * n_samples

    void validate() const;
};

// Solution of the epsilon-SVR dual on a precomputed kernel matrix.
struct SvrDualSolution {
    Vector beta;  // alpha - alpha*, one per training sample
    double bias = 0.0;
    double objective = 0.0;  // -1/2 b'Kb + y'b - eps*|b|_1 (maximized)
    double kkt_gap = 0.0;    // max violating-pair gap at exit
    std::size_t iterations = 0;
    bool converged = false;
};

// SMO over the split (alpha, alpha*) form: the working pair is the maximal
// KKT violator plus the partner with the best second-order gain.
SvrDualSolution solve_svr_dual(const Matrix& K, const Vector& y, double c, double epsilon, double tol,
                               std::size_t max_iterations);

double svr_dual_objective(const Matrix& K, const Vector& y, const Vector& beta, double epsilon);

Matrix rbf_gram(const Matrix& A, const Matrix& B, double gamma);

struct SvrModel {
    Matrix support_vectors;  // standardized
    Vector dual_coefs;
    double bias = 0.0;
    double gamma = 0.0;  // resolved kernel width
    SvrParams params;
    Scaler scaler;
    bool converged = true;  // false when the iteration cap was hit
    std::size_t iterations = 0;
    double dual_objective = 0.0;
};

SvrModel fit_svr(const Matrix& X, const Vector& y, const SvrParams& params);
Vector predict_svr(const SvrModel& m, const Matrix& X);

// ---------------------------------------------------------------------------
// Random forest regression
// ---------------------------------------------------------------------------

struct ForestParams {
    int n_trees = 100;
    double max_features = 1.0 / 3.0;  // fraction of features tried per split
    int min_leaf = 2;
    std::optional<int> max_depth;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int n_samples = 0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(const double* row, Eigen::Index stride) const;
};

struct ForestModel {
    ForestParams params;
    Eigen::Index n_features = 0;
    std::vector<RegressionTree> trees;
};

ForestModel fit_forest(const Matrix& X, const Vector& y, const ForestParams& params);
Vector predict_forest(const ForestModel& m, const Matrix& X);

// ---------------------------------------------------------------------------
// Ridge regression
// ---------------------------------------------------------------------------

// Weights live in the standardized feature space; the intercept is unpenalized.
struct RidgeModel {
    double alpha = 1.0;
    Vector weights;
    double intercept = 0.0;
    Scaler scaler;

    // Equivalent coefficients and intercept on unstandardized inputs.
    Vector raw_coefficients() const;
    double raw_intercept() const;
};

RidgeModel fit_ridge(const Matrix& X, const Vector& y, double alpha);
Vector predict_ridge(const RidgeModel& m, const Matrix& X);

}  // namespace memfuse
