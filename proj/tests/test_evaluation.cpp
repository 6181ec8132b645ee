#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "memfuse/error.hpp"
#include "memfuse/experiment.hpp"
#include "memfuse/folds.hpp"
#include "memfuse/metrics.hpp"
#include "memfuse/seeds.hpp"

using namespace memfuse;

namespace {

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

// participants x videos_each rows; P follows the first lexical column, A the video.
SampleTable toy_table(int participants, int videos_each, std::uint64_t seed) {
    Rng rng(seed);
    const int n_videos = 6;
    Matrix video_audio(n_videos, 3), video_visual(n_videos, 2);
    for (Eigen::Index i = 0; i < video_audio.size(); ++i) video_audio.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < video_visual.size(); ++i) video_visual.data()[i] = rng.normal();
    SampleTable t;
    const Eigen::Index n = participants * videos_each;
    t.targets.resize(n, 3);
    Matrix audio(n, 3), visual(n, 2), lex(n, 2), emb(n, 2);
    Eigen::Index r = 0;
    for (int p = 0; p < participants; ++p) {
        for (int k = 0; k < videos_each; ++k, ++r) {
            const int v = (p + k) % n_videos;
            t.participant.push_back("p" + std::to_string(p));
            t.video.push_back("v" + std::to_string(v));
            audio.row(r) = video_audio.row(v);
            visual.row(r) = video_visual.row(v);
            for (int j = 0; j < 2; ++j) {
                lex(r, j) = rng.normal();
                emb(r, j) = rng.normal();
            }
            t.targets(r, 0) = 0.5 * lex(r, 0) + 0.1 * rng.normal();
            t.targets(r, 1) = 0.5 * video_audio(v, 0) + 0.1 * rng.normal();
            t.targets(r, 2) = 0.3 * rng.normal();
        }
    }
    t.features = ModalitySet(n);
    t.features.set(Modality::audio, audio);
    t.features.set(Modality::visual, visual);
    t.features.set(Modality::mem_lexical, lex);
    t.features.set(Modality::mem_embedding, emb);
    return t;
}

std::set<std::string> names(int n) {
    std::set<std::string> s;
    for (int i = 0; i < n; ++i) s.insert("p" + std::to_string(i));
    return s;
}

}  // namespace

TEST_CASE("r2 and pearson") {
    const std::vector<double> a{0, 1}, b{1, 0};
    CHECK(r2_score(a, b) == doctest::Approx(-3.0));
    CHECK(r2_score(a, a) == 1.0);
    const std::vector<double> y{1, 2, 3, 4}, m(4, 2.5);
    CHECK(r2_score(y, m) == doctest::Approx(0.0));
    const std::vector<double> x{1, 2, 3, 4, 5}, z{2, 4, 5, 4, 5};
    CHECK(pearson(x, z) == doctest::Approx(0.7745966692));
    const std::vector<double> u{1, 2, 3}, w{1, 2, 3.5};
    CHECK(pearson(u, w) == doctest::Approx(0.9933992678));
    CHECK_THROWS_AS(r2_score(std::vector<double>{1, 1}, a), InputError);
    CHECK_THROWS_AS(r2_score(a, std::vector<double>{1}), InputError);
    CHECK_THROWS_AS(pearson(a, b), InputError);
    CHECK_THROWS_AS(pearson(u, std::vector<double>{2, 2, 2}), InputError);
}

TEST_CASE("participant folds") {
    SUBCASE("partition and balance") {
        const CvPlan plan = make_lpo_folds(names(23), 5, 9);
        std::set<std::string> all;
        std::size_t lo = 100, hi = 0;
        for (const auto& f : plan.folds) {
            lo = std::min(lo, f.size());
            hi = std::max(hi, f.size());
            CHECK(std::is_sorted(f.begin(), f.end()));
            all.insert(f.begin(), f.end());
        }
        CHECK(all.size() == 23);
        CHECK(hi - lo <= 1);
        for (const auto& [p, f] : plan.fold_of) {
            const auto& members = plan.folds[static_cast<std::size_t>(f)];
            CHECK(std::find(members.begin(), members.end(), p) != members.end());
        }
    }
    SUBCASE("seeded determinism") {
        CHECK(make_lpo_folds(names(30), 5, 4).fold_of == make_lpo_folds(names(30), 5, 4).fold_of);
        CHECK(make_lpo_folds(names(30), 5, 4).fold_of != make_lpo_folds(names(30), 5, 5).fold_of);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(make_lpo_folds(names(4), 5, 0), InputError);
        CHECK_THROWS_AS(make_lpo_folds(names(4), 1, 0), InputError);
        CHECK_NOTHROW(make_lpo_folds(names(5), 5, 0));
    }
    SUBCASE("integrity over many seeds") {
        const SampleTable t = toy_table(40, 3, 1);
        const auto rows = iota(t.size());
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const CvPlan outer = make_lpo_folds(groups_of(t.participant, rows), 5, seed);
            const auto splits = plan_splits(outer, t.participant);
            std::vector<int> tested(t.size(), 0);
            for (const auto& s : splits) {
                CHECK_NOTHROW(assert_disjoint(s, t.participant));
                CHECK(s.train.size() + s.test.size() == t.size());
                for (auto r : s.test) ++tested[r];
                const CvPlan inner = make_lpo_folds(groups_of(t.participant, s.train), 4, seed + 1000);
                std::size_t inner_rows = 0;
                for (const auto& is : plan_splits(inner, t.participant, s.train)) {
                    CHECK_NOTHROW(assert_disjoint(is, t.participant));
                    for (auto r : is.test) CHECK(std::binary_search(s.train.begin(), s.train.end(), r));
                    inner_rows += is.test.size();
                }
                CHECK(inner_rows == s.train.size());
            }
            CHECK(std::all_of(tested.begin(), tested.end(), [](int c) { return c == 1; }));
        }
    }
    SUBCASE("overlap is caught") {
        const std::vector<std::string> g{"a", "a", "b"};
        CHECK_THROWS_AS(assert_disjoint(Split{{0}, {1, 2}}, g), std::logic_error);
    }
}

TEST_CASE("AV dagger baseline") {
    SampleTable t;
    t.participant = {"p1", "p2", "p3", "p4"};
    t.video = {"v1", "v1", "v2", "v3"};
    t.targets.resize(4, 3);
    t.targets << 1, 2, 3,  //
        3, 4, 5,           //
        -1, 0, 0,          //
        9, 9, 9;
    const std::vector<std::size_t> train{0, 1, 2}, test{0, 2, 3};
    const BaselineOutcome b = av_dagger_baseline(t, train, test);
    CHECK(b.predictions(0, 0) == 2.0);
    CHECK(b.predictions(0, 2) == 4.0);
    CHECK(b.predictions(1, 1) == 0.0);
    // unseen video: global training mean
    CHECK(b.predictions(2, 0) == doctest::Approx(1.0));
    CHECK(b.predictions(2, 1) == doctest::Approx(2.0));
    REQUIRE(b.warnings.size() == 1);
    CHECK(b.warnings[0].find("v3") != std::string::npos);
    CHECK_THROWS_AS(av_dagger_baseline(t, {}, test), InputError);
}

TEST_CASE("grids") {
    Grid g = grid_from_json({{"svr.c", {1, 10}}, {"ridge.alpha", {0.1}}, {"forest.n_trees", {5, 10}}});
    const auto pts = g.points();
    CHECK(pts.size() == 4);
    CHECK(pts[0].at("forest.n_trees") == 5);
    CHECK(pts[0].at("svr.c") == 1);
    CHECK(pts[1].at("svr.c") == 10);
    CHECK(grid_from_json(grid_to_json(g)).axes == g.axes);
    CHECK_THROWS_AS(grid_from_json({{"svr.q", {1}}}), InputError);
    CHECK_THROWS_AS(grid_from_json({{"svr.c", nlohmann::json::array()}}), InputError);
    CHECK_THROWS_AS(grid_from_json({{"forest.n_trees", {2.5}}}), InputError);

    PipelineSpec early{Strategy::early, {Modality::audio, Modality::mem_lexical}, 0, 0};
    CHECK(relevant_grid(g, early).axes.size() == 1);
    CHECK(relevant_grid(g, early).axes.count("svr.c") == 1);
    PipelineSpec late{Strategy::late, {Modality::mem_lexical}, 0, 0};
    const Grid lg = relevant_grid(g, late);
    CHECK(lg.axes.count("forest.n_trees") == 1);
    CHECK(lg.axes.count("ridge.alpha") == 1);
    CHECK(lg.axes.count("svr.c") == 0);
    late.modalities.push_back(Modality::visual);
    CHECK(relevant_grid(g, late).axes.size() == 3);
}

TEST_CASE("grid search") {
    const SampleTable t = toy_table(30, 3, 2);
    const auto rows = iota(t.size());
    PipelineSpec spec{Strategy::early, {Modality::mem_lexical}, 0, 3};

    SUBCASE("single point needs no fitting") {
        AccessLog log;
        const Grid g = grid_from_json({{"svr.c", {3}}, {"forest.n_trees", {1, 2}}});
        const GridSearchResult r = grid_search(t, rows, g, spec, PipelineSettings{}, 4, 1, &log);
        CHECK(r.best.at("svr.c") == 3);
        CHECK(std::isnan(r.best_score));
        CHECK(log.rows().empty());
    }
    SUBCASE("selection and determinism") {
        const Grid g = grid_from_json({{"svr.c", {0.001, 1}}, {"svr.epsilon", {0.01}}});
        const GridSearchResult a = grid_search(t, rows, g, spec, PipelineSettings{}, 4, 1);
        const GridSearchResult b = grid_search(t, rows, g, spec, PipelineSettings{}, 4, 1);
        CHECK(a.best.at("svr.c") == 1);
        CHECK(a.scores.size() == 2);
        CHECK(a.best_score == b.best_score);
        CHECK(a.scores[0].second < a.scores[1].second);
    }
    SUBCASE("ridge meta alpha on noiseless stacking") {
        SampleTable clean = t;
        clean.targets.col(0) = clean.features.block(Modality::mem_lexical).col(0);
        PipelineSpec late{Strategy::late, {Modality::mem_lexical}, 0, 3};
        PipelineSettings base;
        base.forest.n_trees = 10;
        const Grid g = grid_from_json({{"ridge.alpha", {1e-6, 100, 1e4}}});
        CHECK(grid_search(clean, rows, g, late, base, 4, 1).best.at("ridge.alpha") == 1e-6);
    }
    SUBCASE("never reads outer test rows") {
        const CvPlan outer = make_lpo_folds(groups_of(t.participant, rows), 5, 11);
        const auto splits = plan_splits(outer, t.participant);
        const Grid g = grid_from_json({{"svr.c", {0.1, 1}}, {"ridge.alpha", {0.1, 1}}});
        for (Strategy s : {Strategy::early, Strategy::late}) {
            PipelineSpec ps{s, {Modality::audio, Modality::mem_lexical}, 0, 3};
            PipelineSettings base;
            base.forest.n_trees = 5;
            AccessLog log;
            grid_search(t, splits[0].train, g, ps, base, 4, 2, &log);
            const auto seen = log.rows();
            CHECK(seen == std::set<std::size_t>(splits[0].train.begin(), splits[0].train.end()));
            for (auto r : splits[0].test) CHECK(seen.count(r) == 0);
        }
    }
}

TEST_CASE("experiment reports") {
    const SampleTable t = toy_table(30, 3, 3);
    ExperimentOptions opt;
    opt.seed = 8;
    opt.grid = grid_from_json({{"svr.c", {1}}, {"forest.n_trees", {10}}});
    opt.conditions = {Condition::AV, Condition::AVM, Condition::AVDagger};

    const ExperimentReport r = run_experiment2(t, opt);
    CHECK(r.cells.size() == 15);
    CHECK(r.deltas.size() == 6);
    CHECK(r.n_participants == 30);
    for (const auto& c : r.cells) {
        CHECK(c.fold_r2.size() == 5);
        double sum = 0;
        for (double v : c.fold_r2) sum += v;
        CHECK(c.mean_r2 == doctest::Approx(sum / 5));
        CHECK(c.strategy.has_value() == (c.condition != Condition::AVDagger));
        CHECK(c.selected.size() == (c.strategy ? 5u : 0u));
    }
    for (const auto& d : r.deltas) {
        CHECK(d.delta == doctest::Approx(r.find(d.dimension, Condition::AVM, d.strategy)->mean_r2 -
                                         r.find(d.dimension, Condition::AV, d.strategy)->mean_r2));
    }
    // P follows memory text, so AVM should clearly beat AV there
    CHECK(r.deltas[0].delta > 0.3);
    CHECK(r.find(0, Condition::AV, Strategy::late) != nullptr);
    CHECK(r.find(0, Condition::AVDagger, Strategy::late) == nullptr);

    const ExperimentReport again = run_experiment2(t, opt);
    CHECK(report_to_json(r) == report_to_json(again));
    opt.workers = 3;
    CHECK(report_to_json(r) == report_to_json(run_experiment2(t, opt)));

    const ExperimentReport m = run_experiment1(t, opt);
    CHECK(m.cells.size() == 6);
    CHECK(m.find(0, Condition::M, Strategy::early)->mean_r2 > 0.5);
    CHECK(render_report_table(m).find("M") != std::string::npos);

    opt.conditions = {Condition::M};
    CHECK_THROWS_AS(run_experiment2(t, opt), InputError);
    opt.conditions = {Condition::AVDagger};
    opt.dimensions = {3};
    CHECK_THROWS_AS(run_experiment2(t, opt), InputError);
}

TEST_CASE("condition names") {
    CHECK(condition_from_name("AV†") == Condition::AVDagger);
    CHECK(condition_from_name("AVdagger") == Condition::AVDagger);
    CHECK(condition_name(Condition::AVM) == "AVM");
    CHECK_THROWS_AS(condition_from_name("V"), InputError);
    CHECK(condition_modalities(Condition::AVDagger).empty());
    CHECK(condition_modalities(Condition::M).size() == 2);
}

TEST_CASE("annotator agreement") {
    std::vector<PadTriple> self, a1, a2;
    const double xs[] = {1, 2, 3, 4, 5};
    const double ys[] = {2, 4, 5, 4, 5};
    for (int i = 0; i < 5; ++i) {
        self.push_back({xs[i], xs[i], -xs[i]});
        a1.push_back({ys[i], xs[i], xs[i]});
        a2.push_back({ys[i], xs[i], xs[i]});
    }
    const auto rows = annotator_agreement(self, a1, a2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].correspondence == doctest::Approx(0.7745966692));
    CHECK(rows[0].reliability == doctest::Approx(1.0));
    CHECK(rows[1].correspondence == doctest::Approx(1.0));
    CHECK(rows[2].correspondence == doctest::Approx(-1.0));
    a2.pop_back();
    CHECK_THROWS_AS(annotator_agreement(self, a1, a2), InputError);
}
