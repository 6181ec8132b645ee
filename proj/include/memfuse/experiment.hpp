#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "memfuse/av_features.hpp"
#include "memfuse/folds.hpp"
#include "memfuse/fusion.hpp"
#include "memfuse/model.hpp"
#include "memfuse/text_affect.hpp"

namespace memfuse {

enum class Condition { M, AV, AVM, AVDagger };
enum class Strategy { early, late };

std::string_view condition_name(Condition c);  // "M", "AV", "AVM", "AV†"
Condition condition_from_name(std::string_view name);  // also accepts "AVdagger"
std::string_view strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);

// Modalities a learned condition uses; empty for AV†.
std::vector<Modality> condition_modalities(Condition c);

// Responses aligned with their targets and feature blocks.
struct SampleTable {
    std::vector<std::string> participant;
    std::vector<std::string> video;
    Matrix targets;  // n x 3, columns P, A, D
    ModalitySet features;

    std::size_t size() const { return participant.size(); }
};

// One row per response of `ds` (usually the memory subset). Text features are
// matched by (participant, video); AV features by video. Either source may be
// null, in which case those modalities are absent. Missing entries throw
// InputError.
SampleTable build_sample_table(const Dataset& ds, const std::vector<TextFeatureRow>* text,
                               const std::map<std::string, VideoAv>* av);

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

// Recognized keys: svr.c, svr.epsilon, svr.gamma (0 = scale heuristic),
// svr.tol, svr.max_passes, forest.n_trees, forest.max_features,
// forest.min_leaf, forest.max_depth (0 = unlimited), ridge.alpha.
using HyperPoint = std::map<std::string, double>;

struct Grid {
    std::map<std::string, std::vector<double>> axes;

    // Cartesian product in lexicographic order of (sorted key) value tuples.
    std::vector<HyperPoint> points() const;
    void validate() const;
};

Grid grid_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const Grid& g);

struct PipelineSettings {
    SvrParams svr;
    ForestParams forest;
    double ridge_alpha = 1.0;
    int k_inner = 4;
    bool naive_stacking = false;

    PipelineSettings with(const HyperPoint& point) const;
};

// ---------------------------------------------------------------------------
// Pipeline fitting and grid search
// ---------------------------------------------------------------------------

// Thread-safe record of every table row a procedure read.
class AccessLog {
public:
    void record(std::span<const std::size_t> rows);
    std::set<std::size_t> rows() const;

private:
    mutable std::mutex mu_;
    std::set<std::size_t> rows_;
};

struct PipelineSpec {
    Strategy strategy = Strategy::early;
    std::vector<Modality> modalities;
    int dimension = 0;  // 0 = P, 1 = A, 2 = D
    std::uint64_t seed = 0;
};

struct FitOutcome {
    Vector predictions;
    std::vector<std::string> warnings;
};

// Fits on `train` rows and predicts `test` rows of the table.
FitOutcome fit_predict(const SampleTable& table, std::span<const std::size_t> train,
                       std::span<const std::size_t> test, const PipelineSpec& spec, const PipelineSettings& settings,
                       AccessLog* log = nullptr);

// Fits a model on the given rows.
FusionModel fit_pipeline(const SampleTable& table, std::span<const std::size_t> rows, const PipelineSpec& spec,
                         const PipelineSettings& settings, AccessLog* log = nullptr);

struct GridSearchResult {
    HyperPoint best;
    double best_score = 0.0;  // mean inner-fold R²; NaN for a single-point grid
    std::vector<std::pair<HyperPoint, double>> scores;
};

// Axes the pipeline actually reads: svr.* for early fusion; ridge.* plus
// svr.* (audio/visual bases) and forest.* (memory base) for late fusion.
Grid relevant_grid(const Grid& grid, const PipelineSpec& spec);

// Exhaustive search over the relevant axes, scored by mean inner-fold test R²
// over participant-grouped folds of `train`. Ties go to the lexicographically
// smallest tuple. A single-point grid is returned without fitting.
GridSearchResult grid_search(const SampleTable& table, std::span<const std::size_t> train, const Grid& grid,
                             const PipelineSpec& spec, const PipelineSettings& base, int k_inner,
                             std::uint64_t inner_seed, AccessLog* log = nullptr);

// ---------------------------------------------------------------------------
// Baseline
// ---------------------------------------------------------------------------

struct BaselineOutcome {
    Matrix predictions;  // test rows x 3
    std::vector<std::string> warnings;
};

// Video-wise mean of the training targets; videos unseen in training fall back
// to the global training mean with a warning.
BaselineOutcome av_dagger_baseline(const SampleTable& table, std::span<const std::size_t> train,
                                   std::span<const std::size_t> test);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentOptions {
    Grid grid;
    PipelineSettings settings;
    std::uint64_t seed = 0;
    int k_outer = 5;
    int k_inner = 4;
    std::vector<Condition> conditions;
    std::vector<Strategy> strategies = {Strategy::early, Strategy::late};
    std::vector<int> dimensions = {0, 1, 2};
    int workers = 1;
};

struct CellResult {
    int dimension = 0;
    Condition condition = Condition::AV;
    std::optional<Strategy> strategy;  // empty for AV†
    std::vector<double> fold_r2;
    double mean_r2 = 0.0;
    std::vector<HyperPoint> selected;  // per outer fold
};

struct DeltaResult {
    int dimension = 0;
    Strategy strategy = Strategy::early;
    double delta = 0.0;  // AVM - AV
};

struct ExperimentReport {
    std::string experiment;
    std::uint64_t seed = 0;
    int k_outer = 5;
    int k_inner = 4;
    std::size_t n_samples = 0;
    std::size_t n_participants = 0;
    std::vector<CellResult> cells;
    std::vector<DeltaResult> deltas;
    std::vector<std::string> warnings;

    const CellResult* find(int dimension, Condition c, std::optional<Strategy> s) const;
};

// Runs every requested (dimension, condition, strategy) cell over the outer
// participant folds, re-tuning on each outer training set.
ExperimentReport run_experiment(const SampleTable& table, const ExperimentOptions& opt, std::string name);

// Memory text only (condition M).
ExperimentReport run_experiment1(const SampleTable& table, ExperimentOptions opt);
// AV, AVM and AV† (or the subset listed in opt.conditions); adds AVM - AV deltas.
ExperimentReport run_experiment2(const SampleTable& table, ExperimentOptions opt);

nlohmann::json report_to_json(const ExperimentReport& r);
std::string render_report_table(const ExperimentReport& r);

// ---------------------------------------------------------------------------
// Annotator agreement
// ---------------------------------------------------------------------------

struct AgreementRow {
    int dimension = 0;
    double correspondence = 0.0;  // pearson(mean(ann1, ann2), self)
    double reliability = 0.0;     // pearson(ann1, ann2)
};

std::vector<AgreementRow> annotator_agreement(std::span<const PadTriple> self_ma, std::span<const PadTriple> ann1,
                                              std::span<const PadTriple> ann2);

}  // namespace memfuse
