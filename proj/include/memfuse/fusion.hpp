#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "memfuse/regressors.hpp"

namespace memfuse {

enum class Modality { audio, visual, mem_lexical, mem_embedding };

// Fixed concatenation order for early fusion.
inline constexpr std::array<Modality, 4> kModalityOrder = {Modality::audio, Modality::visual, Modality::mem_lexical,
                                                           Modality::mem_embedding};

std::string_view modality_name(Modality m);
Modality modality_from_name(std::string_view name);

// Per-sample feature vectors.
struct ModalityBundle {
    std::optional<std::vector<double>> audio;
    std::optional<std::vector<double>> visual;
    std::optional<std::vector<double>> mem_lexical;
    std::optional<std::vector<double>> mem_embedding;

    const std::optional<std::vector<double>>& get(Modality m) const;
    std::optional<std::vector<double>>& get(Modality m);
};

// Row-aligned feature blocks for a set of samples; absent modalities are empty.
class ModalitySet {
public:
    ModalitySet() = default;
    explicit ModalitySet(Eigen::Index rows) : rows_(rows) {}

    // Every bundle must carry the same modalities with the same widths.
    static ModalitySet from_bundles(std::span<const ModalityBundle> bundles);

    Eigen::Index rows() const { return rows_; }
    bool has(Modality m) const { return blocks_[index(m)].has_value(); }
    const Matrix& block(Modality m) const;
    void set(Modality m, Matrix block);
    void drop(Modality m) { blocks_[index(m)].reset(); }

    std::vector<Modality> active() const;
    Matrix concat(std::span<const Modality> order) const;
    ModalitySet rows_subset(std::span<const std::size_t> rows) const;
    ModalitySet only(std::span<const Modality> keep) const;

private:
    static std::size_t index(Modality m) { return static_cast<std::size_t>(m); }

    Eigen::Index rows_ = 0;
    std::array<std::optional<Matrix>, 4> blocks_;
};

struct ModalityShape {
    Modality modality;
    Eigen::Index dim;

    friend bool operator==(const ModalityShape&, const ModalityShape&) = default;
};

std::vector<ModalityShape> shape_of(const ModalitySet& set);
// Throws InputError unless `set` has exactly the expected modalities and widths.
void check_shape(const ModalitySet& set, std::span<const ModalityShape> expected);

// ---------------------------------------------------------------------------

struct EarlyFusionModel {
    std::vector<ModalityShape> shape;  // in concatenation order
    SvrModel svr;
};

EarlyFusionModel early_fusion_fit(const ModalitySet& x, const Vector& y, const SvrParams& params);
EarlyFusionModel early_fusion_fit(std::span<const ModalityBundle> bundles, const Vector& y, const SvrParams& params);
Vector early_fusion_predict(const EarlyFusionModel& m, const ModalitySet& x);

// ---------------------------------------------------------------------------

enum class BaseRole { audio, visual, memory };
std::string_view base_role_name(BaseRole r);

struct LateFusionParams {
    SvrParams audio_svr;
    SvrParams visual_svr;
    ForestParams memory_forest;
    double meta_alpha = 1.0;
    int k_inner = 4;
    // In-sample stacking: meta inputs come from the final base models'
    // predictions on their own training data.
    bool naive = false;
    std::uint64_t seed = 0;  // inner stacking folds
};

// Record of how meta-training inputs were produced.
struct StackingTrace {
    struct Fold {
        std::vector<std::size_t> fit_rows;
        std::vector<std::size_t> predicted_rows;
    };
    std::vector<Fold> folds;
};

struct LateFusionModel {
    std::vector<ModalityShape> shape;
    std::vector<BaseRole> roles;  // active base models; meta input order
    std::optional<SvrModel> audio;
    std::optional<SvrModel> visual;
    std::optional<ForestModel> memory;  // on lexical ++ embedding
    RidgeModel meta;
    bool naive = false;
};

// `groups` holds the participant of each row; out-of-fold stacking splits on it.
LateFusionModel late_fusion_fit(const ModalitySet& x, const Vector& y, std::span<const std::string> groups,
                                const LateFusionParams& params, StackingTrace* trace = nullptr);
LateFusionModel late_fusion_fit(std::span<const ModalityBundle> bundles, const Vector& y,
                                std::span<const std::string> groups, const LateFusionParams& params);
// Base-model outputs, one column per active role.
Matrix late_fusion_base_predictions(const LateFusionModel& m, const ModalitySet& x);
Vector late_fusion_predict(const LateFusionModel& m, const ModalitySet& x);

// ---------------------------------------------------------------------------

using FusionModel = std::variant<EarlyFusionModel, LateFusionModel>;

Vector fusion_predict(const FusionModel& m, const ModalitySet& x);

// Directory layout: manifest.json plus one JSON file per fitted model.
void save_fusion_model(const std::filesystem::path& dir, const FusionModel& m);
FusionModel load_fusion_model(const std::filesystem::path& dir);

}  // namespace memfuse
