#include <doctest.h>

#include <cmath>
#include <numeric>

#include "memfuse/error.hpp"
#include "memfuse/model_io.hpp"
#include "memfuse/regressors.hpp"
#include "memfuse/seeds.hpp"
#include "oracles/instances.hpp"
#include "oracles/qp_oracle.hpp"
#include "oracles/ridge_oracle.hpp"

using namespace memfuse;

namespace {

double r2(const Vector& y, const Vector& p) {
    return 1.0 - (y - p).squaredNorm() / (y.array() - y.mean()).square().sum();
}

Matrix permute_rows(const Matrix& X, const std::vector<Eigen::Index>& perm) {
    Matrix out(X.rows(), X.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(perm[i]);
    return out;
}

Vector permute(const Vector& v, const std::vector<Eigen::Index>& perm) {
    Vector out(v.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[perm[i]];
    return out;
}

}  // namespace

TEST_CASE("scaler standardizes its training data") {
    Matrix X(4, 3);
    X << 1, 5, 2, 2, 5, 4, 3, 5, 6, 4, 5, 9;
    const Scaler s = Scaler::fit(X);
    const Matrix Z = s.transform(X);
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(Z.col(j).mean()) < 1e-9);
    CHECK(std::sqrt(Z.col(0).array().square().mean()) == doctest::Approx(1.0));
    CHECK(s.stds()[1] == 1.0);
    CHECK(Z.col(1).isZero());
}

TEST_CASE("rbf kernel values") {
    const std::vector<double> x = {0.0, 0.0}, z = {0.0, 1.0};
    CHECK(rbf_kernel(x, x, 0.7) == 1.0);
    CHECK(rbf_kernel(x, z, 1.0) == doctest::Approx(0.367879).epsilon(1e-6));
    const std::vector<double> far = {30.0, -40.0};
    const double k = rbf_kernel(x, far, 0.01);
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
    CHECK_THROWS(rbf_kernel(x, std::vector<double>{1.0}, 1.0));
}

TEST_CASE("svr parameter validation") {
    Matrix X = Matrix::Random(5, 2);
    Vector y = Vector::Random(5);
    SvrParams p;
    p.c = 0.0;
    CHECK_THROWS_AS(fit_svr(X, y, p), InputError);
    p = {};
    p.epsilon = -0.1;
    CHECK_THROWS_AS(fit_svr(X, y, p), InputError);
    p = {};
    p.gamma = 0.0;
    CHECK_THROWS_AS(fit_svr(X, y, p), InputError);
    X(0, 0) = std::nan("");
    CHECK_THROWS_AS(fit_svr(X, y, SvrParams{}), InputError);
    CHECK_THROWS_AS(fit_svr(Matrix::Zero(1, 2), Vector::Zero(1), SvrParams{}), InputError);
}

TEST_CASE("svr on constant targets predicts the constant") {
    Rng rng(3);
    Matrix X(12, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    const Vector y = Vector::Constant(12, 0.42);
    const SvrModel m = fit_svr(X, y, SvrParams{});
    CHECK(m.dual_coefs.cwiseAbs().sum() == 0.0);
    const Vector p = predict_svr(m, X);
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("svr fits a line") {
    Matrix X(20, 1);
    Vector y(20);
    for (int i = 0; i < 20; ++i) {
        X(i, 0) = -1.0 + 0.1 * i;
        y[i] = 2.0 * X(i, 0) + 1.0;
    }
    SvrParams p;
    p.c = 100.0;
    p.epsilon = 0.01;
    const SvrModel m = fit_svr(X, y, p);
    CHECK(m.converged);
    CHECK(r2(y, predict_svr(m, X)) >= 0.99);

    // interior support vectors sit on the tube edge
    const Matrix Z = m.scaler.transform(X);
    const Vector f = predict_svr(m, X);
    int interior = 0;
    for (Eigen::Index k = 0; k < m.dual_coefs.size(); ++k) {
        if (std::abs(m.dual_coefs[k]) < p.c * (1 - 1e-6)) {
            for (Eigen::Index i = 0; i < Z.rows(); ++i) {
                if ((Z.row(i) - m.support_vectors.row(k)).norm() == 0.0) {
                    CHECK(std::abs(f[i] - y[i]) <= p.epsilon + 1e-3);
                    ++interior;
                }
            }
        }
    }
    CHECK(interior > 0);
}

TEST_CASE("svr default gamma is the scale heuristic") {
    Rng rng(9);
    Matrix X(30, 4);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal() * 3.0 + 1.0;
    Vector y = X.col(0);
    const SvrModel m = fit_svr(X, y, SvrParams{});
    // standardized features have variance 1
    CHECK(m.gamma == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("smo matches the dense QP oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CAPTURE(seed);
        oracle::SvrInstance inst = oracle::svr_instance(seed);
        inst.params.tol = 1e-6;
        const SvrModel m = fit_svr(inst.X, inst.y, inst.params);
        REQUIRE(m.converged);

        const Matrix Z = oracle::standardize_like(inst.X, inst.X);
        const Matrix Zn = oracle::standardize_like(inst.X, inst.X_new);
        const Matrix K = oracle::rbf_dense(Z, Z, *inst.params.gamma);
        const auto ref = oracle::solve_svr_qp(K, inst.y, inst.params.c, inst.params.epsilon);
        CHECK(std::abs(m.dual_objective - ref.objective) <= 1e-3);
        CHECK(m.dual_objective >= ref.objective - 1e-6);

        const Vector mine = predict_svr(m, inst.X_new);
        const Vector theirs = (oracle::rbf_dense(Zn, Z, *inst.params.gamma) * ref.beta).array() + ref.bias;
        CHECK((mine - theirs).cwiseAbs().maxCoeff() <= 1e-3);
    }
}

TEST_CASE("smo solution satisfies box, equality and KKT conditions") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        CAPTURE(seed);
        const oracle::SvrInstance inst = oracle::svr_instance(seed);
        const Matrix Z = oracle::standardize_like(inst.X, inst.X);
        const Matrix K = oracle::rbf_dense(Z, Z, *inst.params.gamma);
        const double c = inst.params.c, eps = inst.params.epsilon, tol = inst.params.tol;
        const auto sol = solve_svr_dual(K, inst.y, c, eps, tol, 1000 * static_cast<std::size_t>(inst.y.size()));
        REQUIRE(sol.converged);
        CHECK(sol.kkt_gap < tol);
        CHECK(sol.beta.cwiseAbs().maxCoeff() <= c);
        CHECK(std::abs(sol.beta.sum()) <= 1e-6);
        const Vector f = K * sol.beta;
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            const double res = inst.y[i] - f[i] - sol.bias;  // target minus prediction
            const double b = sol.beta[i];
            double viol = 0.0;
            if (b == 0.0) {
                viol = std::max(0.0, std::abs(res) - eps);
            } else if (b >= c) {
                viol = std::max(0.0, eps - res);
            } else if (b <= -c) {
                viol = std::max(0.0, res + eps);
            } else if (b > 0.0) {
                viol = std::abs(res - eps);
            } else {
                viol = std::abs(res + eps);
            }
            CHECK(viol <= tol);
        }
    }
}

TEST_CASE("svr iteration cap flags the model") {
    const oracle::SvrInstance inst = oracle::svr_instance(5);
    SvrParams p = inst.params;
    p.tol = 1e-12;
    p.max_passes = 1;
    p.c = 100.0;
    const SvrModel m = fit_svr(inst.X, inst.y, p);
    CHECK_FALSE(m.converged);
    CHECK(m.iterations == static_cast<std::size_t>(inst.y.size()));
}

TEST_CASE("ridge matches normal equations") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CAPTURE(seed);
        const auto inst = oracle::ridge_instance(seed);
        oracle::Rows rows(20, std::vector<double>(5));
        std::vector<double> y(20);
        for (int i = 0; i < 20; ++i) {
            for (int j = 0; j < 5; ++j) rows[i][j] = inst.X(i, j);
            y[i] = inst.y[i];
        }
        const auto ref = oracle::ridge_normal_equations(rows, y, inst.alpha);
        const RidgeModel m = fit_ridge(inst.X, inst.y, inst.alpha);
        for (int j = 0; j < 5; ++j) CHECK(std::abs(m.weights[j] - ref.w[j]) <= 1e-8);
        const Vector p = predict_ridge(m, inst.X);
        for (int i = 0; i < 20; ++i) CHECK(std::abs(p[i] - ref.predict(rows[i])) <= 1e-8);
    }
}

TEST_CASE("ridge limits and errors") {
    Matrix X(6, 1);
    Vector y(6);
    for (int i = 0; i < 6; ++i) {
        X(i, 0) = i;
        y[i] = 2.0 * i + 3.0;
    }
    const RidgeModel ols = fit_ridge(X, y, 0.0);
    CHECK(ols.raw_coefficients()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ols.raw_intercept() == doctest::Approx(3.0).epsilon(1e-12));

    const RidgeModel flat = fit_ridge(X, y, 1e9);
    const Vector p = predict_ridge(flat, X);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(p[i] - y.mean()) <= 1e-3);

    Matrix dup(6, 2);
    dup.col(0) = X.col(0);
    dup.col(1) = 2.0 * X.col(0);
    try {
        fit_ridge(dup, y, 0.0);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("alpha > 0") != std::string::npos);
    }
    CHECK_NOTHROW(fit_ridge(dup, y, 0.5));
    CHECK_THROWS_AS(fit_ridge(X, y, -1.0), InputError);
}

TEST_CASE("ridge objective is minimal against perturbations") {
    const auto inst = oracle::ridge_instance(77);
    const double alpha = 2.0;
    const RidgeModel m = fit_ridge(inst.X, inst.y, alpha);
    const Matrix Z = m.scaler.transform(inst.X);
    auto objective = [&](const Vector& w, double b) {
        return ((Z * w).array() + b - inst.y.array()).square().sum() + alpha * w.squaredNorm();
    };
    const double best = objective(m.weights, m.intercept);
    Rng rng(1);
    for (int k = 0; k < 100; ++k) {
        Vector w = m.weights;
        for (Eigen::Index j = 0; j < w.size(); ++j) w[j] += 0.01 * rng.normal();
        CHECK(objective(w, m.intercept) >= best);
    }
}

TEST_CASE("forest basics") {
    Rng rng(4);
    SUBCASE("constant targets") {
        Matrix X(20, 3);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
        const ForestModel m = fit_forest(X, Vector::Constant(20, -0.3), ForestParams{});
        const Vector p = predict_forest(m, X);
        for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(-0.3).epsilon(1e-14));
    }
    SUBCASE("step function") {
        Matrix X(200, 1);
        Vector y(200);
        for (int i = 0; i < 200; ++i) {
            X(i, 0) = rng.uniform(-1.0, 1.0);
            y[i] = X(i, 0) > 0.0 ? 1.0 : 0.0;
        }
        ForestParams p;
        p.max_features = 1.0;
        const Vector pred = predict_forest(fit_forest(X, y, p), X);
        int correct = 0;
        for (int i = 0; i < 200; ++i) correct += (pred[i] > 0.5) == (y[i] > 0.5);
        CHECK(correct >= 190);
    }
    SUBCASE("determinism, leaf sizes and training fit") {
        Matrix X(80, 6);
        Vector y(80);
        for (Eigen::Index i = 0; i < 80; ++i) {
            for (Eigen::Index j = 0; j < 6; ++j) X(i, j) = rng.normal();
            y[i] = X(i, 0) * X(i, 1) + 0.3 * rng.normal();
        }
        ForestParams p;
        p.n_trees = 25;
        p.min_leaf = 3;
        p.seed = 11;
        const ForestModel a = fit_forest(X, y, p);
        const ForestModel b = fit_forest(X, y, p);
        const Vector pa = predict_forest(a, X);
        CHECK(pa == predict_forest(b, X));
        for (const auto& tree : a.trees) {
            for (const auto& node : tree.nodes) {
                if (node.feature < 0) CHECK(node.n_samples >= p.min_leaf);
            }
        }
        const double mse = (pa - y).squaredNorm() / 80.0;
        CHECK(mse <= (y.array() - y.mean()).square().mean());

        p.max_depth = 2;
        for (const auto& tree : fit_forest(X, y, p).trees) CHECK(tree.nodes.size() <= 7);
    }
    SUBCASE("errors") {
        ForestParams p;
        p.min_leaf = 5;
        CHECK_THROWS_AS(fit_forest(Matrix::Zero(9, 2), Vector::Zero(9), p), InputError);
        Matrix X = Matrix::Zero(10, 2);
        X(0, 0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(fit_forest(X, Vector::Zero(10), ForestParams{}), InputError);
        p = {};
        p.max_features = 0.0;
        CHECK_THROWS_AS(fit_forest(Matrix::Zero(10, 2), Vector::Zero(10), p), InputError);
    }
}

TEST_CASE("row permutation leaves svr and ridge predictions unchanged") {
    const oracle::SvrInstance inst = oracle::svr_instance(42);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(inst.X.rows()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng(8);
    rng.shuffle(perm);
    SvrParams p = inst.params;
    p.tol = 1e-8;
    const Vector a = predict_svr(fit_svr(inst.X, inst.y, p), inst.X_new);
    const Vector b = predict_svr(fit_svr(permute_rows(inst.X, perm), permute(inst.y, perm), p), inst.X_new);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);

    const Vector ra = predict_ridge(fit_ridge(inst.X, inst.y, 0.5), inst.X_new);
    const Vector rb = predict_ridge(fit_ridge(permute_rows(inst.X, perm), permute(inst.y, perm), 0.5), inst.X_new);
    CHECK((ra - rb).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("model JSON round trips preserve predictions") {
    const oracle::SvrInstance inst = oracle::svr_instance(7);
    const SvrModel svr = fit_svr(inst.X, inst.y, inst.params);
    const SvrModel svr2 = svr_from_json(nlohmann::json::parse(svr_to_json(svr).dump()));
    CHECK((predict_svr(svr, inst.X_new) - predict_svr(svr2, inst.X_new)).cwiseAbs().maxCoeff() <= 1e-12);

    ForestParams fp;
    fp.n_trees = 10;
    const ForestModel forest = fit_forest(inst.X, inst.y, fp);
    const ForestModel forest2 = forest_from_json(nlohmann::json::parse(forest_to_json(forest).dump()));
    CHECK((predict_forest(forest, inst.X_new) - predict_forest(forest2, inst.X_new)).cwiseAbs().maxCoeff() <= 1e-12);

    const RidgeModel ridge = fit_ridge(inst.X, inst.y, 0.3);
    const RidgeModel ridge2 = ridge_from_json(nlohmann::json::parse(ridge_to_json(ridge).dump()));
    CHECK((predict_ridge(ridge, inst.X_new) - predict_ridge(ridge2, inst.X_new)).cwiseAbs().maxCoeff() <= 1e-12);

    nlohmann::json j = svr_to_json(svr);
    j["kind"] = "forest";
    CHECK_THROWS_AS(svr_from_json(j), InputError);
    j = svr_to_json(svr);
    j["format_version"] = kModelFormatVersion + 1;
    CHECK_THROWS_AS(svr_from_json(j), InputError);
}
