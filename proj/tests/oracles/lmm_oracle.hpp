#pragma once

// Dense evaluation of the random-intercept (restricted) log-likelihood with
// V = s2 (I + lambda Z Z'), beta and s2 profiled out. Test-only reference:
// builds V explicitly and uses a hand-written Cholesky.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::MatrixXd cholesky(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = A(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 0.0)) throw std::runtime_error("not positive definite");
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

inline Eigen::MatrixXd chol_solve(const Eigen::MatrixXd& L, const Eigen::MatrixXd& B) {
    const Eigen::MatrixXd z = L.triangularView<Eigen::Lower>().solve(B);
    return L.transpose().triangularView<Eigen::Upper>().solve(z);
}

inline double chol_logdet(const Eigen::MatrixXd& L) { return 2.0 * L.diagonal().array().log().sum(); }

struct DenseLik {
    double loglik = 0.0;
    double sigma2_e = 0.0;
    Eigen::VectorXd beta;
};

inline DenseLik dense_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                             const std::vector<std::string>& groups, double lambda, bool reml) {
    const Eigen::Index n = y.size(), p = X.cols();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (groups[i] == groups[j]) H(i, j) += lambda;
    const Eigen::MatrixXd L = cholesky(H);
    const Eigen::MatrixXd HiX = chol_solve(L, X);
    const Eigen::VectorXd Hiy = chol_solve(L, y);
    const Eigen::MatrixXd A = X.transpose() * HiX;
    const Eigen::MatrixXd LA = cholesky(A);
    DenseLik out;
    out.beta = chol_solve(LA, X.transpose() * Hiy);
    const Eigen::VectorXd r = y - X * out.beta;
    const Eigen::VectorXd Hir = chol_solve(L, r);
    const double rHr = r.dot(Hir);
    const double two_pi = 2.0 * std::numbers::pi;
    // full-parameter form evaluated at the profiled s2
    if (reml) {
        const double s2 = rHr / static_cast<double>(n - p);
        const double logdet_v = n * std::log(s2) + chol_logdet(L);
        const double logdet_xvx = chol_logdet(LA) - p * std::log(s2);
        out.loglik = -0.5 * ((n - p) * std::log(two_pi) + logdet_v + logdet_xvx + rHr / s2);
        out.sigma2_e = s2;
    } else {
        const double s2 = rHr / static_cast<double>(n);
        const double logdet_v = n * std::log(s2) + chol_logdet(L);
        out.loglik = -0.5 * (n * std::log(two_pi) + logdet_v + rHr / s2);
        out.sigma2_e = s2;
    }
    return out;
}

}  // namespace oracle
