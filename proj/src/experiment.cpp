#include "memfuse/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "memfuse/error.hpp"
#include "memfuse/metrics.hpp"
#include "memfuse/parallel.hpp"
#include "memfuse/seeds.hpp"

namespace memfuse {

using nlohmann::json;

std::string_view condition_name(Condition c) {
    switch (c) {
        case Condition::M: return "M";
        case Condition::AV: return "AV";
        case Condition::AVM: return "AVM";
        case Condition::AVDagger: return "AV†";
    }
    throw std::logic_error("unknown condition");
}

Condition condition_from_name(std::string_view name) {
    if (name == "M") return Condition::M;
    if (name == "AV") return Condition::AV;
    if (name == "AVM") return Condition::AVM;
    if (name == "AV†" || name == "AVdagger" || name == "AV_dagger" || name == "AV+") return Condition::AVDagger;
    throw InputError("unknown condition '" + std::string(name) + "' (expected M, AV, AVM or AV†)");
}

std::string_view strategy_name(Strategy s) { return s == Strategy::early ? "early" : "late"; }

Strategy strategy_from_name(std::string_view name) {
    if (name == "early") return Strategy::early;
    if (name == "late") return Strategy::late;
    throw InputError("unknown fusion strategy '" + std::string(name) + "' (expected early or late)");
}

std::vector<Modality> condition_modalities(Condition c) {
    switch (c) {
        case Condition::M: return {Modality::mem_lexical, Modality::mem_embedding};
        case Condition::AV: return {Modality::audio, Modality::visual};
        case Condition::AVM:
            return {Modality::audio, Modality::visual, Modality::mem_lexical, Modality::mem_embedding};
        case Condition::AVDagger: return {};
    }
    throw std::logic_error("unknown condition");
}

SampleTable build_sample_table(const Dataset& ds, const std::vector<TextFeatureRow>* text,
                               const std::map<std::string, VideoAv>* av) {
    SampleTable t;
    const auto n = static_cast<Eigen::Index>(ds.size());
    t.targets.resize(n, 3);
    t.features = ModalitySet(n);

    std::map<std::pair<std::string, std::string>, const TextFeatures*> text_index;
    if (text) {
        for (const auto& r : *text) text_index[{r.participant_id, r.video_id}] = &r.features;
    }
    std::size_t lex_dim = 0, emb_dim = 0, audio_dim = 0, visual_dim = 0;
    if (text && !text->empty()) {
        lex_dim = text->front().features.lexical.size();
        emb_dim = text->front().features.embedding.size();
    }
    if (av && !av->empty()) {
        audio_dim = av->begin()->second.audio.size();
        visual_dim = av->begin()->second.visual.size();
    }
    Matrix lex(n, static_cast<Eigen::Index>(lex_dim));
    Matrix emb(n, static_cast<Eigen::Index>(emb_dim));
    Matrix audio(n, static_cast<Eigen::Index>(audio_dim));
    Matrix visual(n, static_cast<Eigen::Index>(visual_dim));

    auto put = [](Matrix& m, Eigen::Index row, const std::vector<double>& v, const std::string& what) {
        if (static_cast<Eigen::Index>(v.size()) != m.cols()) {
            throw InputError(what + ": expected " + std::to_string(m.cols()) + " values, found " +
                             std::to_string(v.size()));
        }
        m.row(row) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), m.cols());
    };

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = ds.responses()[static_cast<std::size_t>(i)];
        t.participant.push_back(r.participant_id);
        t.video.push_back(r.video_id);
        for (int d = 0; d < 3; ++d) t.targets(i, d) = r.induced[static_cast<std::size_t>(d)];
        const std::string who = "participant " + r.participant_id + ", video " + r.video_id;
        if (text) {
            const auto it = text_index.find({r.participant_id, r.video_id});
            if (it == text_index.end()) throw InputError("no text features for " + who);
            put(lex, i, it->second->lexical, "lexical features for " + who);
            put(emb, i, it->second->embedding, "embedding features for " + who);
        }
        if (av) {
            const auto it = av->find(r.video_id);
            if (it == av->end()) throw InputError("no audiovisual features for video " + r.video_id);
            put(audio, i, it->second.audio, "audio features for video " + r.video_id);
            put(visual, i, it->second.visual, "visual features for video " + r.video_id);
        }
    }
    if (text && n > 0) {
        t.features.set(Modality::mem_lexical, std::move(lex));
        t.features.set(Modality::mem_embedding, std::move(emb));
    }
    if (av && n > 0) {
        t.features.set(Modality::audio, std::move(audio));
        t.features.set(Modality::visual, std::move(visual));
    }
    return t;
}

// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {"svr.c",           "svr.epsilon",      "svr.gamma",
                                               "svr.tol",         "svr.max_passes",   "forest.n_trees",
                                               "forest.max_features", "forest.min_leaf", "forest.max_depth",
                                               "ridge.alpha"};
    return keys;
}

int as_int(const std::string& key, double v) {
    if (v != std::floor(v) || std::abs(v) > 1e9) throw InputError("grid: " + key + " must be an integer");
    return static_cast<int>(v);
}

}  // namespace

void Grid::validate() const {
    for (const auto& [key, values] : axes) {
        if (!known_keys().count(key)) throw InputError("grid: unknown hyperparameter '" + key + "'");
        if (values.empty()) throw InputError("grid: no values for '" + key + "'");
        for (double v : values) {
            if (!std::isfinite(v)) throw InputError("grid: non-finite value for '" + key + "'");
            PipelineSettings{}.with({{key, v}});
        }
    }
}

std::vector<HyperPoint> Grid::points() const {
    validate();
    std::vector<HyperPoint> out(1);
    for (const auto& [key, raw] : axes) {
        std::vector<double> values = raw;
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        std::vector<HyperPoint> next;
        next.reserve(out.size() * values.size());
        for (const auto& p : out) {
            for (double v : values) {
                HyperPoint q = p;
                q[key] = v;
                next.push_back(std::move(q));
            }
        }
        out = std::move(next);
    }
    return out;
}

Grid grid_from_json(const json& j) {
    Grid g;
    if (j.is_null()) return g;
    if (!j.is_object()) throw InputError("grid: expected an object of hyperparameter lists");
    for (const auto& [key, values] : j.items()) {
        std::vector<double> vs;
        auto one = [&](const json& v) {
            if (v.is_string() && v.get<std::string>() == "scale" && key == "svr.gamma") {
                vs.push_back(0.0);
            } else if (v.is_number()) {
                vs.push_back(v.get<double>());
            } else {
                throw InputError("grid: values of '" + key + "' must be numbers");
            }
        };
        if (values.is_array()) {
            for (const auto& v : values) one(v);
        } else {
            one(values);
        }
        g.axes[key] = std::move(vs);
    }
    g.validate();
    return g;
}

json grid_to_json(const Grid& g) {
    json j = json::object();
    for (const auto& [key, values] : g.axes) j[key] = values;
    return j;
}

PipelineSettings PipelineSettings::with(const HyperPoint& point) const {
    PipelineSettings s = *this;
    for (const auto& [key, v] : point) {
        if (key == "svr.c") s.svr.c = v;
        else if (key == "svr.epsilon") s.svr.epsilon = v;
        else if (key == "svr.gamma") s.svr.gamma = v == 0.0 ? std::nullopt : std::optional<double>(v);
        else if (key == "svr.tol") s.svr.tol = v;
        else if (key == "svr.max_passes") s.svr.max_passes = as_int(key, v);
        else if (key == "forest.n_trees") s.forest.n_trees = as_int(key, v);
        else if (key == "forest.max_features") s.forest.max_features = v;
        else if (key == "forest.min_leaf") s.forest.min_leaf = as_int(key, v);
        else if (key == "forest.max_depth") {
            const int d = as_int(key, v);
            s.forest.max_depth = d == 0 ? std::nullopt : std::optional<int>(d);
        } else if (key == "ridge.alpha") s.ridge_alpha = v;
        else throw InputError("grid: unknown hyperparameter '" + key + "'");
    }
    s.svr.validate();
    s.forest.validate();
    if (!(s.ridge_alpha >= 0.0)) throw InputError("grid: ridge.alpha must be non-negative");
    return s;
}

// ---------------------------------------------------------------------------

void AccessLog::record(std::span<const std::size_t> rows) {
    std::lock_guard lock(mu_);
    rows_.insert(rows.begin(), rows.end());
}

std::set<std::size_t> AccessLog::rows() const {
    std::lock_guard lock(mu_);
    return rows_;
}

namespace {

Vector target_rows(const SampleTable& t, std::span<const std::size_t> rows, int dim) {
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y[static_cast<Eigen::Index>(i)] = t.targets(static_cast<Eigen::Index>(rows[i]), dim);
    }
    return y;
}

ModalitySet feature_rows(const SampleTable& t, std::span<const std::size_t> rows, std::span<const Modality> mods) {
    for (Modality m : mods) {
        if (!t.features.has(m)) throw InputError("features for modality " + std::string(modality_name(m)) +
                                                 " are not available");
    }
    return t.features.only(mods).rows_subset(rows);
}

void collect_svr_warning(const SvrModel& m, const char* what, std::vector<std::string>& out) {
    if (!m.converged) {
        out.push_back(std::string(what) + ": max_passes reached after " + std::to_string(m.iterations) +
                      " iterations");
    }
}

}  // namespace

FusionModel fit_pipeline(const SampleTable& table, std::span<const std::size_t> rows, const PipelineSpec& spec,
                         const PipelineSettings& settings, AccessLog* log) {
    if (spec.modalities.empty()) throw InputError("pipeline: no modalities selected");
    if (spec.dimension < 0 || spec.dimension > 2) throw std::invalid_argument("pipeline: dimension out of range");
    if (log) log->record(rows);
    const ModalitySet x = feature_rows(table, rows, spec.modalities);
    const Vector y = target_rows(table, rows, spec.dimension);
    if (spec.strategy == Strategy::early) return early_fusion_fit(x, y, settings.svr);

    LateFusionParams lp;
    lp.audio_svr = settings.svr;
    lp.visual_svr = settings.svr;
    lp.memory_forest = settings.forest;
    lp.memory_forest.seed = derive_seed(spec.seed, "forest");
    lp.meta_alpha = settings.ridge_alpha;
    lp.k_inner = settings.k_inner;
    lp.naive = settings.naive_stacking;
    lp.seed = derive_seed(spec.seed, "stacking");
    std::vector<std::string> groups;
    groups.reserve(rows.size());
    for (std::size_t r : rows) groups.push_back(table.participant[r]);
    return late_fusion_fit(x, y, groups, lp);
}

FitOutcome fit_predict(const SampleTable& table, std::span<const std::size_t> train,
                       std::span<const std::size_t> test, const PipelineSpec& spec, const PipelineSettings& settings,
                       AccessLog* log) {
    const FusionModel model = fit_pipeline(table, train, spec, settings, log);
    if (log) log->record(test);
    FitOutcome out;
    out.predictions = fusion_predict(model, feature_rows(table, test, spec.modalities));
    if (const auto* e = std::get_if<EarlyFusionModel>(&model)) {
        collect_svr_warning(e->svr, "svr", out.warnings);
    } else {
        const auto& l = std::get<LateFusionModel>(model);
        if (l.audio) collect_svr_warning(*l.audio, "audio svr", out.warnings);
        if (l.visual) collect_svr_warning(*l.visual, "visual svr", out.warnings);
    }
    return out;
}

Grid relevant_grid(const Grid& grid, const PipelineSpec& spec) {
    bool svr = spec.strategy == Strategy::early;
    bool forest = false;
    for (Modality m : spec.modalities) {
        if (spec.strategy == Strategy::late) {
            (m == Modality::audio || m == Modality::visual ? svr : forest) = true;
        }
    }
    Grid out;
    for (const auto& [key, values] : grid.axes) {
        const bool keep = (svr && key.starts_with("svr.")) || (forest && key.starts_with("forest.")) ||
                          (spec.strategy == Strategy::late && key.starts_with("ridge."));
        if (keep) out.axes.emplace(key, values);
    }
    return out;
}

GridSearchResult grid_search(const SampleTable& table, std::span<const std::size_t> train, const Grid& full_grid,
                             const PipelineSpec& spec, const PipelineSettings& base, int k_inner,
                             std::uint64_t inner_seed, AccessLog* log) {
    if (full_grid.points().empty()) throw InputError("grid search: empty grid");
    const Grid grid = relevant_grid(full_grid, spec);
    const auto points = grid.points();
    if (points.empty()) throw InputError("grid search: empty grid");
    GridSearchResult result;
    if (points.size() == 1) {
        base.with(points.front());
        result.best = points.front();
        result.best_score = std::numeric_limits<double>::quiet_NaN();
        return result;
    }
    const CvPlan plan = make_lpo_folds(groups_of(table.participant, train), k_inner, inner_seed);
    const auto splits = plan_splits(plan, table.participant, train);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& point : points) {
        const PipelineSettings s = base.with(point);
        double sum = 0.0;
        for (const auto& split : splits) {
            assert_disjoint(split, table.participant);
            const FitOutcome fo = fit_predict(table, split.train, split.test, spec, s, log);
            const Vector y = target_rows(table, split.test, spec.dimension);
            sum += r2_score(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                            std::span<const double>(fo.predictions.data(),
                                                    static_cast<std::size_t>(fo.predictions.size())));
        }
        const double score = sum / static_cast<double>(splits.size());
        result.scores.emplace_back(point, score);
        if (score > best) {  // strict: earlier (smaller) tuples win ties
            best = score;
            result.best = point;
        }
    }
    result.best_score = best;
    return result;
}

// ---------------------------------------------------------------------------

BaselineOutcome av_dagger_baseline(const SampleTable& table, std::span<const std::size_t> train,
                                   std::span<const std::size_t> test) {
    if (train.empty()) throw InputError("AV† baseline: empty training set");
    std::map<std::string, std::pair<Eigen::RowVector3d, int>> sums;
    Eigen::RowVector3d global = Eigen::RowVector3d::Zero();
    for (std::size_t r : train) {
        const Eigen::RowVector3d t = table.targets.row(static_cast<Eigen::Index>(r));
        auto& [s, n] = sums.try_emplace(table.video[r], Eigen::RowVector3d::Zero(), 0).first->second;
        s += t;
        ++n;
        global += t;
    }
    global /= static_cast<double>(train.size());
    BaselineOutcome out;
    out.predictions.resize(static_cast<Eigen::Index>(test.size()), 3);
    std::set<std::string> unseen;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto it = sums.find(table.video[test[i]]);
        if (it == sums.end()) {
            unseen.insert(table.video[test[i]]);
            out.predictions.row(static_cast<Eigen::Index>(i)) = global;
        } else {
            out.predictions.row(static_cast<Eigen::Index>(i)) = it->second.first / it->second.second;
        }
    }
    for (const auto& v : unseen) {
        out.warnings.push_back("AV† baseline: video " + v + " has no training ratings; using the global mean");
    }
    return out;
}

// ---------------------------------------------------------------------------

const CellResult* ExperimentReport::find(int dimension, Condition c, std::optional<Strategy> s) const {
    for (const auto& cell : cells) {
        if (cell.dimension == dimension && cell.condition == c && cell.strategy == s) return &cell;
    }
    return nullptr;
}

namespace {

struct Task {
    std::size_t cell = 0;
    int fold = 0;
};

struct TaskResult {
    double r2 = 0.0;
    HyperPoint selected;
    std::vector<std::string> warnings;
};

double r2_of(const Vector& y, const Vector& pred) {
    return r2_score(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                    std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
}

}  // namespace

ExperimentReport run_experiment(const SampleTable& table, const ExperimentOptions& opt, std::string name) {
    if (table.size() == 0) throw InputError(name + ": no samples");
    if (opt.conditions.empty()) throw InputError(name + ": no conditions selected");
    for (int d : opt.dimensions) {
        if (d < 0 || d > 2) throw InputError(name + ": dimension index out of range");
    }
    opt.grid.validate();
    opt.settings.with({});

    ExperimentReport report;
    report.experiment = std::move(name);
    report.seed = opt.seed;
    report.k_outer = opt.k_outer;
    report.k_inner = opt.k_inner;
    report.n_samples = table.size();
    const std::set<std::string> participants(table.participant.begin(), table.participant.end());
    report.n_participants = participants.size();

    const CvPlan outer = make_lpo_folds(participants, opt.k_outer, derive_seed(opt.seed, "outer-folds"));
    const auto splits = plan_splits(outer, table.participant);
    for (const auto& s : splits) assert_disjoint(s, table.participant);

    for (int d : opt.dimensions) {
        for (Condition c : opt.conditions) {
            if (c == Condition::AVDagger) {
                report.cells.push_back(CellResult{d, c, std::nullopt, {}, 0.0, {}});
                continue;
            }
            for (Strategy s : opt.strategies) report.cells.push_back(CellResult{d, c, s, {}, 0.0, {}});
        }
    }
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        for (int f = 0; f < opt.k_outer; ++f) tasks.push_back({c, f});
    }
    std::vector<TaskResult> results(tasks.size());

    parallel_for(tasks.size(), opt.workers, [&](std::size_t ti) {
        const Task& task = tasks[ti];
        const CellResult& cell = report.cells[task.cell];
        const Split& split = splits[static_cast<std::size_t>(task.fold)];
        const Vector y_test = target_rows(table, split.test, cell.dimension);
        TaskResult& out = results[ti];
        const std::string where = std::string(kPadNames[static_cast<std::size_t>(cell.dimension)]) + "/" +
                                  std::string(condition_name(cell.condition)) +
                                  (cell.strategy ? "/" + std::string(strategy_name(*cell.strategy)) : "") +
                                  " fold " + std::to_string(task.fold);
        if (cell.condition == Condition::AVDagger) {
            BaselineOutcome b = av_dagger_baseline(table, split.train, split.test);
            out.r2 = r2_of(y_test, b.predictions.col(cell.dimension));
            out.warnings = std::move(b.warnings);
            return;
        }
        PipelineSpec spec;
        spec.strategy = *cell.strategy;
        spec.modalities = condition_modalities(cell.condition);
        spec.dimension = cell.dimension;
        spec.seed = derive_seed(opt.seed, "models/fold-" + std::to_string(task.fold));
        PipelineSettings settings = opt.settings;
        settings.k_inner = opt.k_inner;
        const GridSearchResult gs =
            grid_search(table, split.train, opt.grid, spec, settings, opt.k_inner,
                        derive_seed(opt.seed, "inner-folds/fold-" + std::to_string(task.fold)));
        out.selected = gs.best;
        const FitOutcome fo = fit_predict(table, split.train, split.test, spec, settings.with(gs.best));
        out.r2 = r2_of(y_test, fo.predictions);
        for (const auto& w : fo.warnings) out.warnings.push_back(where + ": " + w);
    });

    std::set<std::string> seen;
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        CellResult& cell = report.cells[tasks[ti].cell];
        cell.fold_r2.push_back(results[ti].r2);
        if (cell.condition != Condition::AVDagger) cell.selected.push_back(results[ti].selected);
        for (const auto& w : results[ti].warnings) {
            if (seen.insert(w).second) report.warnings.push_back(w);
        }
    }
    for (auto& cell : report.cells) {
        double sum = 0.0;
        for (double v : cell.fold_r2) sum += v;
        cell.mean_r2 = sum / static_cast<double>(cell.fold_r2.size());
    }
    for (int d : opt.dimensions) {
        for (Strategy s : opt.strategies) {
            const CellResult* av = report.find(d, Condition::AV, s);
            const CellResult* avm = report.find(d, Condition::AVM, s);
            if (av && avm) report.deltas.push_back({d, s, avm->mean_r2 - av->mean_r2});
        }
    }
    return report;
}

ExperimentReport run_experiment1(const SampleTable& table, ExperimentOptions opt) {
    opt.conditions = {Condition::M};
    return run_experiment(table, opt, "experiment1");
}

ExperimentReport run_experiment2(const SampleTable& table, ExperimentOptions opt) {
    if (opt.conditions.empty()) opt.conditions = {Condition::AV, Condition::AVM, Condition::AVDagger};
    for (Condition c : opt.conditions) {
        if (c == Condition::M) throw InputError("experiment2: condition M belongs to experiment 1");
    }
    return run_experiment(table, opt, "experiment2");
}

json report_to_json(const ExperimentReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        json selected = json::array();
        for (const auto& p : c.selected) {
            json point = json::object();
            for (const auto& [k, v] : p) point[k] = v;
            selected.push_back(point);
        }
        cells.push_back({{"dimension", kPadNames[static_cast<std::size_t>(c.dimension)]},
                         {"condition", condition_name(c.condition)},
                         {"strategy", c.strategy ? json(strategy_name(*c.strategy)) : json(nullptr)},
                         {"mean_r2", c.mean_r2},
                         {"fold_r2", c.fold_r2},
                         {"selected", selected}});
    }
    json deltas = json::array();
    for (const auto& d : r.deltas) {
        deltas.push_back({{"dimension", kPadNames[static_cast<std::size_t>(d.dimension)]},
                          {"strategy", strategy_name(d.strategy)},
                          {"delta_avg_r2", d.delta}});
    }
    return json{{"kind", "experiment_report"},
                {"format_version", 1},
                {"experiment", r.experiment},
                {"seed", r.seed},
                {"k_outer", r.k_outer},
                {"k_inner", r.k_inner},
                {"n_samples", r.n_samples},
                {"n_participants", r.n_participants},
                {"results", cells},
                {"deltas", deltas},
                {"warnings", r.warnings}};
}

namespace {

std::string fixed(double v, const char* fmt = "%.3f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    // count code points so the dagger does not shift columns
    std::size_t len = 0;
    for (unsigned char ch : s) len += (ch & 0xC0) != 0x80;
    if (len < width) s.append(width - len, ' ');
    return s;
}

}  // namespace

std::string render_report_table(const ExperimentReport& r) {
    std::ostringstream out;
    out << r.experiment << ": seed " << r.seed << ", " << r.k_outer << " outer / " << r.k_inner << " inner folds, "
        << r.n_samples << " responses, " << r.n_participants << " participants\n\n";
    out << pad("dim", 5) << pad("condition", 11) << pad("fusion", 8) << pad("AvgR2", 9) << "per-fold R2\n";
    for (const auto& c : r.cells) {
        out << pad(kPadNames[static_cast<std::size_t>(c.dimension)], 5) << pad(std::string(condition_name(c.condition)), 11)
            << pad(c.strategy ? std::string(strategy_name(*c.strategy)) : "-", 8) << pad(fixed(c.mean_r2), 9);
        for (std::size_t f = 0; f < c.fold_r2.size(); ++f) out << (f ? " " : "") << fixed(c.fold_r2[f]);
        out << "\n";
    }
    if (!r.deltas.empty()) {
        out << "\ndelta AvgR2 (AVM - AV)\n" << pad("dim", 5) << pad("fusion", 8) << "delta\n";
        for (const auto& d : r.deltas) {
            out << pad(kPadNames[static_cast<std::size_t>(d.dimension)], 5)
                << pad(std::string(strategy_name(d.strategy)), 8) << fixed(d.delta, "%+.3f") << "\n";
        }
    }
    if (!r.warnings.empty()) {
        out << "\nwarnings:\n";
        for (const auto& w : r.warnings) out << "  " << w << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------

std::vector<AgreementRow> annotator_agreement(std::span<const PadTriple> self_ma, std::span<const PadTriple> ann1,
                                              std::span<const PadTriple> ann2) {
    if (self_ma.size() != ann1.size() || self_ma.size() != ann2.size()) {
        throw InputError("annotator agreement: rating lists are not aligned");
    }
    std::vector<AgreementRow> rows;
    const std::size_t n = self_ma.size();
    for (int d = 0; d < 3; ++d) {
        const auto k = static_cast<std::size_t>(d);
        std::vector<double> self(n), a(n), b(n), avg(n);
        for (std::size_t i = 0; i < n; ++i) {
            self[i] = self_ma[i][k];
            a[i] = ann1[i][k];
            b[i] = ann2[i][k];
            avg[i] = 0.5 * (a[i] + b[i]);
        }
        rows.push_back({d, pearson(avg, self), pearson(a, b)});
    }
    return rows;
}

}  // namespace memfuse
