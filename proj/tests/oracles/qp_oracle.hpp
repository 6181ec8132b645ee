#pragma once

// Dense reference solver for the epsilon-SVR dual, used only by tests.
// Works on the 2n-variable form
//   min 1/2 (a - a*)' K (a - a*) + eps * sum(a + a*) - y'(a - a*)
//   s.t. 0 <= a, a* <= C,  sum(a) = sum(a*)
// with accelerated projected gradient (FISTA, gradient-restart). The
// projection onto box-plus-hyperplane is a bisection on the multiplier.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct QpSolution {
    Eigen::VectorXd beta;
    double bias = 0.0;
    double objective = 0.0;  // maximization form: -1/2 b'Kb + y'b - eps |b|_1
    int iterations = 0;
};

inline void project(Eigen::VectorXd& a, Eigen::VectorXd& as, double c) {
    const Eigen::Index n = a.size();
    auto excess = [&](double nu) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            s += std::clamp(a[i] - nu, 0.0, c) - std::clamp(as[i] + nu, 0.0, c);
        }
        return s;
    };
    double span = c;
    for (Eigen::Index i = 0; i < n; ++i) span = std::max({span, std::abs(a[i]) + c, std::abs(as[i]) + c});
    double lo = -span;
    double hi = span;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    const double nu = 0.5 * (lo + hi);
    for (Eigen::Index i = 0; i < n; ++i) {
        a[i] = std::clamp(a[i] - nu, 0.0, c);
        as[i] = std::clamp(as[i] + nu, 0.0, c);
    }
}

inline double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                             double eps) {
    return -0.5 * beta.dot(K * beta) + y.dot(beta) - eps * beta.cwiseAbs().sum();
}

inline QpSolution solve_svr_qp(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double c, double eps,
                               int max_iter = 400000, double step_tol = 1e-15) {
    const Eigen::Index n = y.size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    const double lip = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-12);
    const double step = 1.0 / lip;

    Eigen::VectorXd a = Eigen::VectorXd::Zero(n), as = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd za = a, zas = as;
    double t = 1.0;
    QpSolution out;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd kb = K * (za - zas);
        Eigen::VectorXd na = za - step * (kb.array() + eps - y.array()).matrix();
        Eigen::VectorXd nas = zas - step * ((-kb).array() + eps + y.array()).matrix();
        project(na, nas, c);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const Eigen::VectorXd da = na - a, das = nas - as;
        // restart momentum when it points uphill
        const double uphill = (za - na).dot(da) + (zas - nas).dot(das);
        if (uphill > 0.0) {
            t = 1.0;
            za = na;
            zas = nas;
        } else {
            za = na + ((t - 1.0) / tn) * da;
            zas = nas + ((t - 1.0) / tn) * das;
            t = tn;
        }
        a = na;
        as = nas;
        out.iterations = it + 1;
        if (std::max(da.cwiseAbs().maxCoeff(), das.cwiseAbs().maxCoeff()) < step_tol && it > 10) break;
    }
    out.beta = a - as;
    out.objective = dual_objective(K, y, out.beta, eps);

    // bias from free variables; midpoint of the feasible interval otherwise
    const Eigen::VectorXd f = K * out.beta;
    const double free_tol = 1e-7 * c;
    double sum = 0.0;
    int count = 0;
    double lo = -1e300, hi = 1e300;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (a[i] > free_tol && a[i] < c - free_tol) {
            sum += y[i] - eps - f[i];
            ++count;
        }
        if (as[i] > free_tol && as[i] < c - free_tol) {
            sum += y[i] + eps - f[i];
            ++count;
        }
        // b must satisfy the KKT conditions of bound variables
        const double up = y[i] - f[i];
        if (a[i] <= free_tol) lo = std::max(lo, up - eps);
        if (a[i] >= c - free_tol) hi = std::min(hi, up - eps);
        if (as[i] <= free_tol) hi = std::min(hi, up + eps);
        if (as[i] >= c - free_tol) lo = std::max(lo, up + eps);
    }
    out.bias = count > 0 ? sum / count : 0.5 * (lo + hi);
    return out;
}

}  // namespace oracle
