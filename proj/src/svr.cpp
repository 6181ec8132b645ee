#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "memfuse/error.hpp"
#include "memfuse/regressors.hpp"

namespace memfuse {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Working state of the 2n-variable dual
//   min 1/2 a'Qa + p'a  s.t.  s'a = 0, 0 <= a <= C
// with a = [alpha; alpha*], s = [+1; -1], Q_tu = s_t s_u K(t mod n, u mod n),
// p = [eps - y; eps + y].
class Smo {
public:
    Smo(const Matrix& K, const Vector& y, double c, double eps)
        : K_(K), n_(K.rows()), c_(c), a_(Vector::Zero(2 * n_)), g_(2 * n_) {
        for (Eigen::Index i = 0; i < n_; ++i) {
            g_[i] = eps - y[i];
            g_[i + n_] = eps + y[i];
        }
    }

    double sign(Eigen::Index t) const { return t < n_ ? 1.0 : -1.0; }
    Eigen::Index sample(Eigen::Index t) const { return t < n_ ? t : t - n_; }
    bool upper(Eigen::Index t) const { return a_[t] >= c_; }
    bool lower(Eigen::Index t) const { return a_[t] <= 0.0; }
    bool in_up(Eigen::Index t) const { return sign(t) > 0 ? !upper(t) : !lower(t); }
    bool in_low(Eigen::Index t) const { return sign(t) > 0 ? !lower(t) : !upper(t); }

    // Returns false when the maximal violating pair is within tol.
    bool select(double tol, Eigen::Index& out_i, Eigen::Index& out_j, double& gap) {
        const Eigen::Index m = 2 * n_;
        double gmax = -kInf;
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < m; ++t) {
            if (!in_up(t)) continue;
            const double v = -sign(t) * g_[t];
            if (v >= gmax) {
                gmax = v;
                i = t;
            }
        }
        double gmax2 = -kInf;
        double best = kInf;
        Eigen::Index j = -1;
        const Eigen::Index si = i >= 0 ? sample(i) : 0;
        const double kii = i >= 0 ? K_(si, si) : 0.0;
        for (Eigen::Index t = 0; t < m; ++t) {
            if (!in_low(t)) continue;
            const double v = sign(t) * g_[t];
            gmax2 = std::max(gmax2, v);
            if (i < 0) continue;
            const double b = gmax + v;
            if (b > 0.0) {
                const Eigen::Index st = sample(t);
                double a = kii + K_(st, st) - 2.0 * K_(si, st);
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj <= best) {
                    best = obj;
                    j = t;
                }
            }
        }
        gap = gmax + gmax2;
        if (i < 0 || j < 0 || gap < tol) return false;
        out_i = i;
        out_j = j;
        return true;
    }

    void update(Eigen::Index i, Eigen::Index j) {
        const Eigen::Index si = sample(i);
        const Eigen::Index sj = sample(j);
        const double yi = sign(i);
        const double yj = sign(j);
        const double qij = yi * yj * K_(si, sj);
        const double old_ai = a_[i];
        const double old_aj = a_[j];
        double& ai = a_[i];
        double& aj = a_[j];
        const double c = c_;

        double quad = K_(si, si) + K_(sj, sj);
        if (yi != yj) {
            quad += 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-g_[i] - g_[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > c) {
                    ai = c;
                    aj = c - diff;
                }
            } else if (aj > c) {
                aj = c;
                ai = c + diff;
            }
        } else {
            quad -= 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (g_[i] - g_[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) {
                    ai = c;
                    aj = sum - c;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > c) {
                if (aj > c) {
                    aj = c;
                    ai = sum - c;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }

        const double dai = ai - old_ai;
        const double daj = aj - old_aj;
        const auto ki = K_.col(si);
        const auto kj = K_.col(sj);
        // G_t += Q_ti dai + Q_tj daj, split over the two halves of t
        const double wi = yi * dai;
        const double wj = yj * daj;
        for (Eigen::Index s = 0; s < n_; ++s) {
            const double d = ki[s] * wi + kj[s] * wj;
            g_[s] += d;
            g_[s + n_] -= d;
        }
    }

    double bias() const {
        double ub = kInf;
        double lb = -kInf;
        double sum_free = 0.0;
        int n_free = 0;
        for (Eigen::Index t = 0; t < 2 * n_; ++t) {
            const double yg = sign(t) * g_[t];
            if (upper(t)) {
                if (sign(t) < 0) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else if (lower(t)) {
                if (sign(t) > 0) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
        return -rho;
    }

    Vector beta() const { return a_.head(n_) - a_.tail(n_); }

private:
    const Matrix& K_;
    Eigen::Index n_;
    double c_;
    Vector a_;
    Vector g_;
};

}  // namespace

void SvrParams::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("svr: C must be positive and finite");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InputError("svr: epsilon must be non-negative");
    if (gamma && (!(*gamma > 0.0) || !std::isfinite(*gamma))) throw InputError("svr: gamma must be positive");
    if (!(tol > 0.0)) throw InputError("svr: tol must be positive");
    if (max_passes < 1) throw InputError("svr: max_passes must be at least 1");
}

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
    if (x.size() != z.size()) throw std::invalid_argument("rbf_kernel: length mismatch");
    double d2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - z[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

Matrix rbf_gram(const Matrix& A, const Matrix& B, double gamma) {
    if (A.cols() != B.cols()) throw std::invalid_argument("rbf_gram: feature count mismatch");
    const Vector na = A.rowwise().squaredNorm();
    const Vector nb = B.rowwise().squaredNorm();
    Matrix G = A * B.transpose();
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
        for (Eigen::Index i = 0; i < G.rows(); ++i) {
            const double d2 = std::max(0.0, na[i] + nb[j] - 2.0 * G(i, j));
            G(i, j) = std::exp(-gamma * d2);
        }
    }
    return G;
}

double svr_dual_objective(const Matrix& K, const Vector& y, const Vector& beta, double epsilon) {
    return -0.5 * beta.dot(K * beta) + y.dot(beta) - epsilon * beta.lpNorm<1>();
}

SvrDualSolution solve_svr_dual(const Matrix& K, const Vector& y, double c, double epsilon, double tol,
                               std::size_t max_iterations) {
    const Eigen::Index n = K.rows();
    if (K.cols() != n || y.size() != n) throw std::invalid_argument("solve_svr_dual: shape mismatch");
    if (n == 0) throw std::invalid_argument("solve_svr_dual: no samples");

    Smo smo(K, y, c, epsilon);
    SvrDualSolution sol;
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    double gap = 0.0;
    sol.converged = false;
    while (true) {
        if (!smo.select(tol, i, j, gap)) {
            sol.converged = true;
            break;
        }
        if (sol.iterations >= max_iterations) break;
        smo.update(i, j);
        ++sol.iterations;
    }
    sol.kkt_gap = gap;
    sol.beta = smo.beta();
    sol.bias = smo.bias();
    sol.objective = svr_dual_objective(K, y, sol.beta, epsilon);
    return sol;
}

SvrModel fit_svr(const Matrix& X, const Vector& y, const SvrParams& params) {
    params.validate();
    if (X.rows() != y.size()) throw std::invalid_argument("fit_svr: X/y row mismatch");
    if (X.rows() < 2) throw InputError("fit_svr: need at least two samples");
    if (X.cols() == 0) throw InputError("fit_svr: no features");
    if (!X.allFinite() || !y.allFinite()) throw InputError("fit_svr: non-finite input");

    SvrModel m;
    m.params = params;
    m.scaler = Scaler::fit(X);
    const Matrix Z = m.scaler.transform(X);
    if (params.gamma) {
        m.gamma = *params.gamma;
    } else {
        const double mean = Z.mean();
        const double var = (Z.array() - mean).square().mean();
        m.gamma = var > 0.0 ? 1.0 / (static_cast<double>(Z.cols()) * var) : 1.0 / static_cast<double>(Z.cols());
    }
    const Matrix K = rbf_gram(Z, Z, m.gamma);
    const std::size_t cap = static_cast<std::size_t>(params.max_passes) * static_cast<std::size_t>(X.rows());
    const SvrDualSolution sol = solve_svr_dual(K, y, params.c, params.epsilon, params.tol, cap);

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < sol.beta.size(); ++i) {
        if (sol.beta[i] != 0.0) sv.push_back(i);
    }
    m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), Z.cols());
    m.dual_coefs.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        m.support_vectors.row(static_cast<Eigen::Index>(k)) = Z.row(sv[k]);
        m.dual_coefs[static_cast<Eigen::Index>(k)] = sol.beta[sv[k]];
    }
    m.bias = sol.bias;
    m.converged = sol.converged;
    m.iterations = sol.iterations;
    m.dual_objective = sol.objective;
    return m;
}

Vector predict_svr(const SvrModel& m, const Matrix& X) {
    const Matrix Z = m.scaler.transform(X);
    if (m.support_vectors.rows() == 0) return Vector::Constant(X.rows(), m.bias);
    return (rbf_gram(Z, m.support_vectors, m.gamma) * m.dual_coefs).array() + m.bias;
}

}  // namespace memfuse
