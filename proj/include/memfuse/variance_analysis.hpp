#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "memfuse/model.hpp"

namespace memfuse {

struct DesignMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd X;
};

// Block spec such as "Vid", "Vid+Ma" or "Vid+(De+Pe+Mo)+Ma". An intercept
// column always comes first. Blocks:
//   Vid  one-hot video, first level dropped
//   De   centered age, gender and nationality one-hot (first level dropped)
//   Pe   six HEXACO scores
//   Mo   mood P, A, D
//   Ma   affect of the selected memory (P, A, D); every response needs one
DesignMatrix build_design(const Dataset& ds, std::string_view spec);

enum class LmmMethod { REML, ML };

struct LmmFit {
    LmmMethod method = LmmMethod::REML;
    std::vector<std::string> names;  // columns kept after rank checks
    Eigen::VectorXd fixed_coefs;
    double sigma2_u = 0.0;
    double sigma2_e = 0.0;
    double lambda = 0.0;  // sigma2_u / sigma2_e
    double loglik = 0.0;
    double marginal_r2 = 0.0;
    std::size_t n = 0;
    std::size_t n_groups = 0;
    std::vector<std::string> warnings;
};

// Random-intercept model y = X b + u_group + e with b and sigma2_e profiled
// out; the variance ratio is found on a log grid and refined by golden
// section. Linearly dependent columns are dropped with a warning.
LmmFit fit_lmm(const Eigen::VectorXd& y, const DesignMatrix& X, std::span<const std::string> groups,
               LmmMethod method = LmmMethod::REML);

// Profiled log-likelihood at a fixed variance ratio (full-rank X assumed).
double lmm_profile_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const std::string> groups,
                          double lambda, LmmMethod method);

// Var(Xb) / (Var(Xb) + sigma2_u + sigma2_e), population variance over rows.
double marginal_r2(const LmmFit& fit, const DesignMatrix& X);

struct NestedComparison {
    double delta_r2m = 0.0;
    double lr = 0.0;
    int df = 0;
    double p_value = 1.0;
};

// Likelihood-ratio comparison of ML fits; X_small's columns must be a subset
// of X_big's (by name).
NestedComparison compare_nested(const LmmFit& small, const LmmFit& big, const DesignMatrix& X_small,
                                const DesignMatrix& X_big);

// ---------------------------------------------------------------------------

inline constexpr std::array<const char*, 3> kVarianceSteps = {"Vid", "Vid+(De+Pe+Mo)", "Vid+(De+Pe+Mo)+Ma"};

struct VarianceStep {
    std::string spec;
    LmmFit fit;
    std::size_t n_columns = 0;
};

struct VarianceDimension {
    int dimension = 0;
    std::array<VarianceStep, 3> steps;
    std::array<NestedComparison, 2> comparisons;  // step 2 vs 1, step 3 vs 2
};

struct VarianceReport {
    std::size_t n_responses = 0;
    std::size_t n_participants = 0;
    std::vector<VarianceDimension> dims;
    std::vector<std::string> warnings;
};

// Fits the three nested ML models per dimension on the memory subset of ds.
VarianceReport run_variance_analysis(const Dataset& ds);

nlohmann::json variance_report_to_json(const VarianceReport& r);
std::string render_variance_table(const VarianceReport& r);

}  // namespace memfuse
