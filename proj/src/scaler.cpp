#include <cmath>
#include <stdexcept>

#include "memfuse/regressors.hpp"

namespace memfuse {

Scaler::Scaler(Vector means, Vector stds) : means_(std::move(means)), stds_(std::move(stds)) {
    if (means_.size() != stds_.size()) throw std::invalid_argument("Scaler: means/stds size mismatch");
    for (Eigen::Index j = 0; j < stds_.size(); ++j) {
        if (!(stds_[j] > 0.0)) throw std::invalid_argument("Scaler: divisor must be positive");
    }
}

Scaler Scaler::fit(const Matrix& X) {
    if (X.rows() == 0) throw std::invalid_argument("Scaler::fit: no rows");
    const double n = static_cast<double>(X.rows());
    Vector means = X.colwise().sum().transpose() / n;
    Vector stds(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - means[j]).square().sum() / n;
        const double sd = std::sqrt(var);
        // population std; near-constant columns are left unscaled
        stds[j] = (sd > 1e-12 * std::max(1.0, std::abs(means[j]))) ? sd : 1.0;
    }
    return Scaler(std::move(means), std::move(stds));
}

Matrix Scaler::transform(const Matrix& X) const {
    if (X.cols() != means_.size()) {
        throw std::invalid_argument("Scaler: expected " + std::to_string(means_.size()) + " features, got " +
                                    std::to_string(X.cols()));
    }
    return (X.rowwise() - means_.transpose()).array().rowwise() / stds_.transpose().array();
}

}  // namespace memfuse
