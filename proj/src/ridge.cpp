#include <cmath>
#include <stdexcept>

#include "memfuse/error.hpp"
#include "memfuse/regressors.hpp"

namespace memfuse {

RidgeModel fit_ridge(const Matrix& X, const Vector& y, double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InputError("ridge: alpha must be non-negative and finite");
    if (X.rows() != y.size()) throw std::invalid_argument("fit_ridge: X/y row mismatch");
    if (X.rows() < 1) throw InputError("fit_ridge: no samples");
    if (!X.allFinite() || !y.allFinite()) throw InputError("fit_ridge: non-finite input");

    RidgeModel m;
    m.alpha = alpha;
    m.scaler = Scaler::fit(X);
    const Matrix Z = m.scaler.transform(X);
    const double ymean = y.mean();
    const Eigen::Index n = Z.rows();
    const Eigen::Index p = Z.cols();

    // min |y - ymean - Z w|^2 + alpha |w|^2 as least squares on [Z; sqrt(alpha) I]
    Matrix A(n + p, p);
    A.topRows(n) = Z;
    A.bottomRows(p) = std::sqrt(alpha) * Matrix::Identity(p, p);
    Vector b = Vector::Zero(n + p);
    b.head(n) = y.array() - ymean;

    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    if (qr.rank() < p) {
        throw InputError("ridge: singular system (rank " + std::to_string(qr.rank()) + " < " + std::to_string(p) +
                         " features); use alpha > 0");
    }
    m.weights = qr.solve(b);
    m.intercept = ymean;
    return m;
}

Vector predict_ridge(const RidgeModel& m, const Matrix& X) {
    return (m.scaler.transform(X) * m.weights).array() + m.intercept;
}

Vector RidgeModel::raw_coefficients() const { return weights.cwiseQuotient(scaler.stds()); }

double RidgeModel::raw_intercept() const { return intercept - raw_coefficients().dot(scaler.means()); }

}  // namespace memfuse
