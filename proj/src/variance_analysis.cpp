#include "memfuse/variance_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "memfuse/error.hpp"

namespace memfuse {

namespace {

std::vector<std::string> parse_blocks(std::string_view spec) {
    std::vector<std::string> blocks;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) throw InputError("design: empty block name in spec '" + std::string(spec) + "'");
        blocks.push_back(cur);
        cur.clear();
    };
    for (char c : spec) {
        if (c == '(' || c == ')' || c == ' ') continue;
        if (c == '+') {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();
    static const std::set<std::string> known = {"Vid", "De", "Pe", "Mo", "Ma"};
    std::set<std::string> seen;
    for (const auto& b : blocks) {
        if (!known.count(b)) throw InputError("design: unknown block '" + b + "' (expected Vid, De, Pe, Mo, Ma)");
        if (!seen.insert(b).second) throw InputError("design: block '" + b + "' listed twice");
    }
    return blocks;
}

void one_hot(DesignMatrix& d, const std::vector<std::string>& values, const std::string& prefix) {
    const std::set<std::string> levels(values.begin(), values.end());
    const auto n = static_cast<Eigen::Index>(values.size());
    bool first = true;
    for (const auto& level : levels) {
        if (first) {  // reference level
            first = false;
            continue;
        }
        Eigen::VectorXd col(n);
        for (Eigen::Index i = 0; i < n; ++i) col[i] = values[static_cast<std::size_t>(i)] == level ? 1.0 : 0.0;
        d.names.push_back(prefix + level);
        d.X.conservativeResize(n, d.X.cols() + 1);
        d.X.col(d.X.cols() - 1) = col;
    }
}

void add_column(DesignMatrix& d, std::string name, const Eigen::VectorXd& col) {
    d.names.push_back(std::move(name));
    d.X.conservativeResize(col.size(), d.X.cols() + 1);
    d.X.col(d.X.cols() - 1) = col;
}

// Per-group sufficient statistics; V_g^{-1} = I - c_g 11' with c_g = lambda / (1 + n_g lambda).
struct LmmData {
    Eigen::MatrixXd XtX;
    Eigen::VectorXd Xty;
    double yty = 0.0;
    Eigen::MatrixXd S;  // p x G column sums
    Eigen::VectorXd t;  // per-group sum of y
    Eigen::VectorXd ng;
    std::size_t n = 0;
    std::size_t p = 0;
};

LmmData prepare(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const std::string> groups) {
    std::map<std::string, Eigen::Index> index;
    for (const auto& g : groups) index.try_emplace(g, static_cast<Eigen::Index>(index.size()));
    LmmData d;
    d.n = static_cast<std::size_t>(X.rows());
    d.p = static_cast<std::size_t>(X.cols());
    const auto G = static_cast<Eigen::Index>(index.size());
    d.S = Eigen::MatrixXd::Zero(X.cols(), G);
    d.t = Eigen::VectorXd::Zero(G);
    d.ng = Eigen::VectorXd::Zero(G);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::Index g = index.at(groups[static_cast<std::size_t>(i)]);
        d.S.col(g) += X.row(i).transpose();
        d.t[g] += y[i];
        d.ng[g] += 1.0;
    }
    d.XtX = X.transpose() * X;
    d.Xty = X.transpose() * y;
    d.yty = y.squaredNorm();
    return d;
}

struct Eval {
    double loglik = 0.0;
    double sigma2_e = 0.0;
    Eigen::VectorXd beta;
};

Eval evaluate(const LmmData& d, double lambda, LmmMethod method) {
    const Eigen::VectorXd c = (lambda / (1.0 + d.ng.array() * lambda)).matrix();
    const Eigen::MatrixXd A = d.XtX - d.S * c.asDiagonal() * d.S.transpose();
    const Eigen::VectorXd b = d.Xty - d.S * c.cwiseProduct(d.t);
    const double q = d.yty - c.dot(d.t.cwiseProduct(d.t));
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw NumericalError("lmm: X'V^-1X is not positive definite");
    Eval e;
    e.beta = llt.solve(b);
    const double r = q - b.dot(e.beta);
    if (!(r > 0.0)) throw NumericalError("lmm: residual sum of squares is zero; the model fits exactly");
    const double logdet_v = (d.ng.array() * lambda).log1p().sum();
    const double n = static_cast<double>(d.n);
    const double log2pi = std::log(2.0 * std::numbers::pi);
    if (method == LmmMethod::ML) {
        e.sigma2_e = r / n;
        e.loglik = -0.5 * (n * (log2pi + std::log(e.sigma2_e)) + logdet_v + n);
    } else {
        const double m = n - static_cast<double>(d.p);
        const double logdet_a = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        e.sigma2_e = r / m;
        e.loglik = -0.5 * (m * (log2pi + std::log(e.sigma2_e)) + logdet_v + logdet_a + m);
    }
    return e;
}

// Greedy left-to-right selection of linearly independent columns.
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& X) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) all[static_cast<std::size_t>(j)] = j;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> full(X);
    full.setThreshold(1e-10);
    if (full.rank() == X.cols()) return all;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j : all) {
        Eigen::MatrixXd trial(X.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
        for (std::size_t k = 0; k < kept.size(); ++k) trial.col(static_cast<Eigen::Index>(k)) = X.col(kept[k]);
        trial.col(trial.cols() - 1) = X.col(j);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
        qr.setThreshold(1e-10);
        if (qr.rank() == trial.cols()) kept.push_back(j);
    }
    return kept;
}

}  // namespace

DesignMatrix build_design(const Dataset& ds, std::string_view spec) {
    const auto blocks = parse_blocks(spec);
    const auto& rs = ds.responses();
    const auto n = static_cast<Eigen::Index>(rs.size());
    if (n == 0) throw InputError("design: empty dataset");
    DesignMatrix d;
    add_column(d, "(intercept)", Eigen::VectorXd::Ones(n));
    auto column = [&](auto&& get) {
        Eigen::VectorXd col(n);
        for (Eigen::Index i = 0; i < n; ++i) col[i] = get(rs[static_cast<std::size_t>(i)]);
        return col;
    };
    // fixed block order keeps nested designs column-aligned
    for (const char* block : {"Vid", "De", "Pe", "Mo", "Ma"}) {
        if (std::find(blocks.begin(), blocks.end(), block) == blocks.end()) continue;
        const std::string b = block;
        if (b == "Vid") {
            std::vector<std::string> v;
            for (const auto& r : rs) v.push_back(r.video_id);
            one_hot(d, v, "video=");
        } else if (b == "De") {
            Eigen::VectorXd age = column([](const ViewerResponse& r) { return static_cast<double>(r.context.age); });
            add_column(d, "age_centered", age.array() - age.mean());
            std::vector<std::string> gender, nationality;
            for (const auto& r : rs) {
                gender.push_back(r.context.gender);
                nationality.push_back(r.context.nationality);
            }
            one_hot(d, gender, "gender=");
            one_hot(d, nationality, "nationality=");
        } else if (b == "Pe") {
            static const char* names[6] = {"hexaco_h", "hexaco_e", "hexaco_x", "hexaco_a", "hexaco_c", "hexaco_o"};
            for (std::size_t k = 0; k < 6; ++k) {
                add_column(d, names[k], column([k](const ViewerResponse& r) { return r.context.hexaco[k]; }));
            }
        } else if (b == "Mo") {
            for (std::size_t k = 0; k < 3; ++k) {
                add_column(d, std::string("mood_") + kPadNames[k],
                           column([k](const ViewerResponse& r) { return r.context.mood[k]; }));
            }
        } else {
            for (const auto& r : rs) {
                if (r.memories.empty()) {
                    throw InputError("design: block Ma needs a memory for every response; participant " +
                                     r.participant_id + ", video " + r.video_id + " has none");
                }
            }
            for (std::size_t k = 0; k < 3; ++k) {
                add_column(d, std::string("memory_affect_") + kPadNames[k],
                           column([k](const ViewerResponse& r) { return select_memory(r.memories).affect[k]; }));
            }
        }
    }
    if (!d.X.allFinite()) throw InputError("design: non-finite entries");
    return d;
}

double lmm_profile_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const std::string> groups,
                          double lambda, LmmMethod method) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lmm: lambda must be non-negative");
    return evaluate(prepare(y, X, groups), lambda, method).loglik;
}

LmmFit fit_lmm(const Eigen::VectorXd& y, const DesignMatrix& design, std::span<const std::string> groups,
               LmmMethod method) {
    const Eigen::Index n = design.X.rows();
    if (y.size() != n || groups.size() != static_cast<std::size_t>(n)) {
        throw InputError("lmm: y, X and groups must have the same number of rows");
    }
    if (!y.allFinite() || !design.X.allFinite()) throw InputError("lmm: non-finite input");
    const std::set<std::string> distinct(groups.begin(), groups.end());
    if (distinct.size() < 2) throw InputError("lmm: need at least two groups");

    LmmFit fit;
    fit.method = method;
    fit.n = static_cast<std::size_t>(n);
    fit.n_groups = distinct.size();

    const auto keep = independent_columns(design.X);
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        X.col(static_cast<Eigen::Index>(k)) = design.X.col(keep[k]);
        fit.names.push_back(design.names[static_cast<std::size_t>(keep[k])]);
    }
    for (Eigen::Index j = 0, k = 0; j < design.X.cols(); ++j) {
        if (k < static_cast<Eigen::Index>(keep.size()) && keep[static_cast<std::size_t>(k)] == j) {
            ++k;
        } else {
            fit.warnings.push_back("dropped linearly dependent column '" + design.names[static_cast<std::size_t>(j)] +
                                   "'");
        }
    }
    if (n <= X.cols()) {
        throw InputError("lmm: need more rows (" + std::to_string(n) + ") than columns (" +
                         std::to_string(X.cols()) + ")");
    }

    const LmmData data = prepare(y, X, groups);
    auto ll = [&](double lambda) { return evaluate(data, lambda, method).loglik; };

    double best_lambda = 0.0;
    if (data.ng.maxCoeff() <= 1.0) {
        fit.warnings.push_back("one observation per group: random-intercept variance is not identifiable, fixed at 0");
    } else {
        // log grid over lambda in [1e-6, 1e4] plus the boundary lambda = 0
        std::vector<double> grid = {0.0};
        for (int k = 0; k <= 40; ++k) grid.push_back(std::pow(10.0, -6.0 + 0.25 * k));
        std::vector<double> vals;
        for (double l : grid) vals.push_back(ll(l));
        const auto k = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
        if (k == grid.size() - 1) {
            best_lambda = grid.back();
            fit.warnings.push_back("variance ratio reached the upper search bound");
        } else {
            // golden section on log10(lambda), or on lambda itself next to the boundary
            const bool linear = k <= 1;
            auto to_x = [&](double l) { return linear ? l : std::log10(l); };
            auto from_x = [&](double x) { return linear ? x : std::pow(10.0, x); };
            double a = to_x(grid[k == 0 ? 0 : k - 1]);
            double b = to_x(grid[k + 1]);
            const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
            double c = b - phi * (b - a);
            double d = a + phi * (b - a);
            double fc = ll(from_x(c));
            double fd = ll(from_x(d));
            int iter = 0;
            std::vector<double> trace;
            while (true) {
                const double prev = std::max(fc, fd);
                if (fc >= fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = ll(from_x(c));
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = ll(from_x(d));
                }
                trace.push_back(std::max(fc, fd));
                ++iter;
                const double width = std::abs(b - a);
                if (std::abs(std::max(fc, fd) - prev) < 1e-8 && width < 1e-6 * std::max(1.0, std::abs(a))) break;
                if (iter >= 500) {
                    std::ostringstream msg;
                    msg << "lmm: variance-ratio search did not converge; last log-likelihoods:";
                    for (std::size_t i = trace.size() - std::min<std::size_t>(trace.size(), 5); i < trace.size(); ++i)
                        msg << " " << trace[i];
                    throw NumericalError(msg.str());
                }
            }
            best_lambda = from_x(fc >= fd ? c : d);
            if (ll(0.0) >= ll(best_lambda)) best_lambda = 0.0;
            if (vals[k] > ll(best_lambda)) best_lambda = grid[k];
        }
    }
    const Eval e = evaluate(data, best_lambda, method);
    fit.lambda = best_lambda;
    fit.fixed_coefs = e.beta;
    fit.sigma2_e = e.sigma2_e;
    fit.sigma2_u = best_lambda * e.sigma2_e;
    fit.loglik = e.loglik;
    const Eigen::VectorXd xb = X * e.beta;
    const double var_fixed = (xb.array() - xb.mean()).square().mean();
    fit.marginal_r2 = var_fixed / (var_fixed + fit.sigma2_u + fit.sigma2_e);
    return fit;
}

double marginal_r2(const LmmFit& fit, const DesignMatrix& design) {
    Eigen::MatrixXd X(design.X.rows(), static_cast<Eigen::Index>(fit.names.size()));
    for (std::size_t k = 0; k < fit.names.size(); ++k) {
        const auto it = std::find(design.names.begin(), design.names.end(), fit.names[k]);
        if (it == design.names.end()) throw InputError("marginal_r2: design lacks column '" + fit.names[k] + "'");
        X.col(static_cast<Eigen::Index>(k)) = design.X.col(it - design.names.begin());
    }
    const Eigen::VectorXd xb = X * fit.fixed_coefs;
    const double var_fixed = (xb.array() - xb.mean()).square().mean();
    const double total = var_fixed + fit.sigma2_u + fit.sigma2_e;
    return total > 0.0 ? var_fixed / total : 0.0;
}

NestedComparison compare_nested(const LmmFit& small, const LmmFit& big, const DesignMatrix& X_small,
                                const DesignMatrix& X_big) {
    if (small.method != LmmMethod::ML || big.method != LmmMethod::ML) {
        throw InputError("compare_nested: likelihood-ratio tests need ML fits");
    }
    const std::set<std::string> big_cols(X_big.names.begin(), X_big.names.end());
    for (const auto& c : X_small.names) {
        if (!big_cols.count(c)) throw InputError("compare_nested: designs are not nested (column '" + c + "')");
    }
    NestedComparison out;
    out.delta_r2m = big.marginal_r2 - small.marginal_r2;
    out.df = static_cast<int>(big.names.size()) - static_cast<int>(small.names.size());
    out.lr = std::max(0.0, 2.0 * (big.loglik - small.loglik));
    if (out.df > 0) {
        const boost::math::chi_squared dist(out.df);
        out.p_value = boost::math::cdf(boost::math::complement(dist, out.lr));
    }
    return out;
}

// ---------------------------------------------------------------------------

VarianceReport run_variance_analysis(const Dataset& full) {
    const Dataset ds = memory_subset(full);
    if (ds.empty()) throw InputError("variance analysis: no responses with memories");
    VarianceReport report;
    report.n_responses = ds.size();
    report.n_participants = ds.participants().size();
    std::vector<std::string> groups;
    for (const auto& r : ds.responses()) groups.push_back(r.participant_id);

    std::array<DesignMatrix, 3> designs;
    for (std::size_t s = 0; s < 3; ++s) designs[s] = build_design(ds, kVarianceSteps[s]);

    for (int d = 0; d < 3; ++d) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(ds.size()));
        for (std::size_t i = 0; i < ds.size(); ++i) {
            y[static_cast<Eigen::Index>(i)] = ds.responses()[i].induced[static_cast<std::size_t>(d)];
        }
        VarianceDimension vd;
        vd.dimension = d;
        for (std::size_t s = 0; s < 3; ++s) {
            vd.steps[s].spec = kVarianceSteps[s];
            vd.steps[s].fit = fit_lmm(y, designs[s], groups, LmmMethod::ML);
            vd.steps[s].n_columns = vd.steps[s].fit.names.size();
            for (const auto& w : vd.steps[s].fit.warnings) {
                report.warnings.push_back(std::string(kPadNames[static_cast<std::size_t>(d)]) + " " +
                                          kVarianceSteps[s] + ": " + w);
            }
        }
        for (std::size_t s = 0; s < 2; ++s) {
            vd.comparisons[s] = compare_nested(vd.steps[s].fit, vd.steps[s + 1].fit, designs[s], designs[s + 1]);
        }
        report.dims.push_back(std::move(vd));
    }
    return report;
}

nlohmann::json variance_report_to_json(const VarianceReport& r) {
    nlohmann::json dims = nlohmann::json::array();
    for (const auto& d : r.dims) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : d.steps) {
            steps.push_back({{"model", s.spec},
                             {"marginal_r2", s.fit.marginal_r2},
                             {"loglik", s.fit.loglik},
                             {"sigma2_u", s.fit.sigma2_u},
                             {"sigma2_e", s.fit.sigma2_e},
                             {"n_columns", s.n_columns}});
        }
        nlohmann::json comps = nlohmann::json::array();
        for (std::size_t k = 0; k < 2; ++k) {
            const auto& c = d.comparisons[k];
            comps.push_back({{"from", d.steps[k].spec},
                             {"to", d.steps[k + 1].spec},
                             {"delta_r2m", c.delta_r2m},
                             {"lr", c.lr},
                             {"df", c.df},
                             {"p_value", c.p_value}});
        }
        dims.push_back({{"dimension", kPadNames[static_cast<std::size_t>(d.dimension)]},
                        {"method", "ML"},
                        {"models", steps},
                        {"comparisons", comps}});
    }
    return {{"kind", "variance_report"},
            {"format_version", 1},
            {"n_responses", r.n_responses},
            {"n_participants", r.n_participants},
            {"dimensions", dims},
            {"warnings", r.warnings}};
}

std::string render_variance_table(const VarianceReport& r) {
    auto num = [](double v, const char* fmt) {
        char buf[64];
        std::snprintf(buf, sizeof buf, fmt, v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "cumulative marginal R2 (ML), " << r.n_responses << " responses, " << r.n_participants
        << " participants\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-4s %-8s %-16s %-8s %-22s %-22s\n", "dim", "Vid", "+(De+Pe+Mo)", "+Ma",
                  "dR2m(De+Pe+Mo) [p]", "dR2m(Ma) [p]");
    out << line;
    for (const auto& d : r.dims) {
        const auto& c1 = d.comparisons[0];
        const auto& c2 = d.comparisons[1];
        std::snprintf(line, sizeof line, "%-4s %-8s %-16s %-8s %-22s %-22s\n", kPadNames[static_cast<std::size_t>(d.dimension)],
                      num(d.steps[0].fit.marginal_r2, "%.3f").c_str(), num(d.steps[1].fit.marginal_r2, "%.3f").c_str(),
                      num(d.steps[2].fit.marginal_r2, "%.3f").c_str(),
                      (num(c1.delta_r2m, "%+.3f") + " [" + num(c1.p_value, "%.2g") + "]").c_str(),
                      (num(c2.delta_r2m, "%+.3f") + " [" + num(c2.p_value, "%.2g") + "]").c_str());
        out << line;
    }
    if (!r.warnings.empty()) {
        out << "\nwarnings:\n";
        for (const auto& w : r.warnings) out << "  " << w << "\n";
    }
    return out.str();
}

}  // namespace memfuse
