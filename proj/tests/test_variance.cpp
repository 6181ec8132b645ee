#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "memfuse/error.hpp"
#include "memfuse/seeds.hpp"
#include "memfuse/variance_analysis.hpp"
#include "oracles/lmm_oracle.hpp"
#include "support.hpp"

using namespace memfuse;

namespace {

struct Sim {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> groups;
};

// Random-intercept data: intercept plus two normal covariates.
Sim simulate(int n_groups, int per_group, double s2u, double s2e, std::uint64_t seed) {
    Rng rng(seed);
    const Eigen::Index n = n_groups * per_group;
    Sim s;
    s.y.resize(n);
    s.X.resize(n, 3);
    for (int g = 0; g < n_groups; ++g) {
        const double u = std::sqrt(s2u) * rng.normal();
        for (int k = 0; k < per_group; ++k) {
            const Eigen::Index i = g * per_group + k;
            s.X(i, 0) = 1.0;
            s.X(i, 1) = rng.normal();
            s.X(i, 2) = rng.normal();
            s.y[i] = 0.5 + 1.0 * s.X(i, 1) - 0.5 * s.X(i, 2) + u + std::sqrt(s2e) * rng.normal();
            s.groups.push_back("g" + std::to_string(g));
        }
    }
    return s;
}

DesignMatrix as_design(const Eigen::MatrixXd& X) {
    DesignMatrix d;
    d.X = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j) d.names.push_back("x" + std::to_string(j));
    return d;
}

Dataset small_dataset() {
    std::vector<ViewerResponse> rs;
    const char* nats[] = {"DE", "FR", "IT"};
    Rng rng(42);
    auto jitter = [&] { return 0.05 * rng.normal(); };
    for (int p = 0; p < 9; ++p) {
        for (int v = 0; v < 4; ++v) {
            auto r = testing::response("p" + std::to_string(p), "v" + std::to_string(v),
                                       {0.1 * v - 0.2 + jitter(), 0.05 * p - 0.2 + jitter(), jitter()},
                                       {MemoryRecord{"a memory", {0.1 * p - 0.4, 0.2, -0.1 * v}}});
            r.context.age = 20 + p;
            r.context.gender = p % 2 ? "male" : "female";
            r.context.nationality = nats[p % 3];
            r.context.mood = {0.1, -0.1 * (p % 4), 0.05 * p};
            r.context.hexaco = {1.0 + p % 5, 2.0, 3.0 + 0.1 * p, 4.0 - 0.2 * v, 2.5, 3.5};
            rs.push_back(r);
        }
    }
    return Dataset(rs);
}

}  // namespace

TEST_CASE("design matrices") {
    const Dataset ds = small_dataset();
    CHECK(build_design(ds, "Vid").X.cols() == 1 + 3);
    const DesignMatrix full = build_design(ds, "Vid+(De+Pe+Mo)+Ma");
    // intercept, 3 video, age, gender, 2 nationality, 6 hexaco, 3 mood, 3 memory
    CHECK(full.X.cols() == 1 + 3 + 1 + 1 + 2 + 6 + 3 + 3);
    CHECK(full.names.front() == "(intercept)");
    CHECK(std::count(full.names.begin(), full.names.end(), "age_centered") == 1);
    const auto age = std::find(full.names.begin(), full.names.end(), "age_centered") - full.names.begin();
    CHECK(std::abs(full.X.col(age).mean()) < 1e-12);
    // block order is fixed regardless of spelling
    CHECK(build_design(ds, "Ma+Vid").names == build_design(ds, "Vid+Ma").names);
    CHECK_THROWS_AS(build_design(ds, "Vid+Xx"), InputError);
    CHECK_THROWS_AS(build_design(ds, "Vid+Vid"), InputError);
    CHECK_THROWS_AS(build_design(ds, "Vid++Ma"), InputError);

    std::vector<ViewerResponse> rs = ds.responses();
    rs[3].memories.clear();
    CHECK_THROWS_WITH_AS(build_design(Dataset(rs), "Ma"), doctest::Contains("participant p0"), InputError);
}

TEST_CASE("profiled likelihood matches the dense reference") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Rng rng(seed);
        const int groups = 4 + static_cast<int>(rng.index(6));
        std::vector<std::string> g;
        std::vector<int> sizes;
        for (int k = 0; k < groups; ++k) sizes.push_back(1 + static_cast<int>(rng.index(5)));
        Eigen::Index n = 0;
        for (int s : sizes) n += s;
        Eigen::MatrixXd X(n, 3);
        Eigen::VectorXd y(n);
        Eigen::Index i = 0;
        for (int k = 0; k < groups; ++k) {
            for (int j = 0; j < sizes[static_cast<std::size_t>(k)]; ++j, ++i) {
                X(i, 0) = 1.0;
                X(i, 1) = rng.normal();
                X(i, 2) = rng.uniform(-1, 1);
                y[i] = rng.normal() + 0.3 * k;
                g.push_back("g" + std::to_string(k));
            }
        }
        if (n <= 4) continue;
        for (double lambda : {0.0, 0.01, 0.5, 3.0, 40.0}) {
            for (bool reml : {true, false}) {
                const double ref = oracle::dense_loglik(y, X, g, lambda, reml).loglik;
                const double got = lmm_profile_loglik(y, X, g, lambda, reml ? LmmMethod::REML : LmmMethod::ML);
                CHECK(got == doctest::Approx(ref).epsilon(1e-10));
                CHECK(std::abs(got - ref) < 1e-8);
            }
        }
    }
    CHECK_THROWS(lmm_profile_loglik(Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Ones(3, 1),
                                    std::vector<std::string>{"a", "b", "b"}, -1.0, LmmMethod::ML));
}

TEST_CASE("fit at the optimum") {
    const Sim s = simulate(30, 4, 0.5, 1.0, 3);
    for (LmmMethod m : {LmmMethod::REML, LmmMethod::ML}) {
        const LmmFit f = fit_lmm(s.y, as_design(s.X), s.groups, m);
        const bool reml = m == LmmMethod::REML;
        const auto ref = oracle::dense_loglik(s.y, s.X, s.groups, f.lambda, reml);
        CHECK(f.loglik == doctest::Approx(ref.loglik).epsilon(1e-10));
        CHECK((f.fixed_coefs - ref.beta).norm() < 1e-8);
        CHECK(f.sigma2_e == doctest::Approx(ref.sigma2_e).epsilon(1e-8));
        // no nearby ratio does better
        for (double factor : {0.9, 1.1, 0.5, 2.0}) {
            CHECK(oracle::dense_loglik(s.y, s.X, s.groups, f.lambda * factor, reml).loglik <= f.loglik + 1e-9);
        }
        CHECK(oracle::dense_loglik(s.y, s.X, s.groups, 0.0, reml).loglik <= f.loglik + 1e-9);
    }
}

TEST_CASE("no group variance reduces to least squares") {
    // noise centered within each group carries no group-level signal
    Rng rng(5);
    Sim s = simulate(40, 5, 0.0, 1.0, 5);
    Eigen::VectorXd e(s.y.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = rng.normal();
    for (int g = 0; g < 40; ++g) e.segment(g * 5, 5).array() -= e.segment(g * 5, 5).mean();
    // covariates must not vary at group level either, else their group means carry e
    for (int g = 0; g < 40; ++g) {
        for (Eigen::Index j = 1; j < 3; ++j) s.X.col(j).segment(g * 5, 5).array() -= s.X.col(j).segment(g * 5, 5).mean();
    }
    s.y = s.X * Eigen::Vector3d(0.5, 1.0, -0.5) + e;
    const LmmFit f = fit_lmm(s.y, as_design(s.X), s.groups, LmmMethod::ML);
    CHECK(f.lambda == 0.0);
    CHECK(f.sigma2_u == 0.0);
    const Eigen::VectorXd ols = s.X.colPivHouseholderQr().solve(s.y);
    CHECK((f.fixed_coefs - ols).cwiseAbs().maxCoeff() < 1e-6);
    const double rss = (s.y - s.X * ols).squaredNorm();
    CHECK(f.sigma2_e == doctest::Approx(rss / static_cast<double>(s.y.size())).epsilon(1e-9));
}

TEST_CASE("variance components are recovered") {
    std::vector<double> u, e;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Sim s = simulate(200, 5, 1.0, 1.0, 100 + seed);
        const LmmFit f = fit_lmm(s.y, as_design(s.X), s.groups, LmmMethod::REML);
        u.push_back(f.sigma2_u);
        e.push_back(f.sigma2_e);
        CHECK(f.fixed_coefs[1] == doctest::Approx(1.0).epsilon(0.1));
        CHECK(f.warnings.empty());
    }
    std::sort(u.begin(), u.end());
    std::sort(e.begin(), e.end());
    CHECK(u[2] == doctest::Approx(1.0).epsilon(0.15));
    CHECK(e[2] == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("edge cases") {
    SUBCASE("singleton groups") {
        const Sim s = simulate(30, 1, 1.0, 1.0, 7);
        const LmmFit f = fit_lmm(s.y, as_design(s.X), s.groups, LmmMethod::ML);
        CHECK(f.sigma2_u == 0.0);
        REQUIRE(f.warnings.size() == 1);
        CHECK(f.warnings[0].find("not identifiable") != std::string::npos);
    }
    SUBCASE("dependent columns are dropped") {
        Sim s = simulate(20, 3, 0.5, 1.0, 8);
        DesignMatrix d = as_design(s.X);
        d.X.conservativeResize(Eigen::NoChange, 4);
        d.X.col(3) = 2.0 * d.X.col(1);
        d.names.push_back("twice");
        const LmmFit f = fit_lmm(s.y, d, s.groups, LmmMethod::ML);
        CHECK(f.names.size() == 3);
        CHECK(f.warnings.front().find("twice") != std::string::npos);
        CHECK(marginal_r2(f, d) == doctest::Approx(f.marginal_r2));
    }
    SUBCASE("input errors") {
        const Sim s = simulate(5, 2, 0.5, 1.0, 9);
        CHECK_THROWS_AS(fit_lmm(s.y.head(9), as_design(s.X), s.groups, LmmMethod::ML), InputError);
        CHECK_THROWS_AS(fit_lmm(s.y, as_design(s.X), std::vector<std::string>(10, "g"), LmmMethod::ML), InputError);
        const Sim tiny = simulate(2, 1, 0.5, 1.0, 9);
        CHECK_THROWS_AS(fit_lmm(tiny.y, as_design(tiny.X), tiny.groups, LmmMethod::ML), InputError);
    }
}

TEST_CASE("nested comparisons") {
    const Sim s = simulate(50, 4, 0.5, 1.0, 11);
    const DesignMatrix small = as_design(s.X.leftCols(2));
    const DesignMatrix big = as_design(s.X);
    const LmmFit fs = fit_lmm(s.y, small, s.groups, LmmMethod::ML);
    const LmmFit fb = fit_lmm(s.y, big, s.groups, LmmMethod::ML);
    const NestedComparison c = compare_nested(fs, fb, small, big);
    CHECK(c.df == 1);
    CHECK(c.lr > 10.0);
    CHECK(c.p_value < 1e-3);
    CHECK(c.delta_r2m > 0.0);

    const NestedComparison same = compare_nested(fb, fb, big, big);
    CHECK(same.df == 0);
    CHECK(same.lr == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK(same.delta_r2m == 0.0);

    CHECK_THROWS_AS(compare_nested(fb, fs, big, small), InputError);
    const LmmFit reml = fit_lmm(s.y, big, s.groups, LmmMethod::REML);
    CHECK_THROWS_AS(compare_nested(fs, reml, small, big), InputError);
}

TEST_CASE("variance report") {
    const Dataset ds = small_dataset();
    const VarianceReport r = run_variance_analysis(ds);
    CHECK(r.n_responses == 36);
    CHECK(r.n_participants == 9);
    REQUIRE(r.dims.size() == 3);
    for (const auto& d : r.dims) {
        CHECK(d.steps[0].spec == "Vid");
        CHECK(d.steps[0].n_columns <= d.steps[1].n_columns);
        CHECK(d.steps[1].n_columns <= d.steps[2].n_columns);
        for (const auto& st : d.steps) CHECK(st.fit.method == LmmMethod::ML);
    }
    const auto j = variance_report_to_json(r);
    CHECK(j["kind"] == "variance_report");
    CHECK(j["dimensions"].size() == 3);
    CHECK(render_variance_table(r).find("+Ma") != std::string::npos);
    CHECK_THROWS_AS(run_variance_analysis(Dataset({testing::response("p", "v", {})})), InputError);
}
