#include "memfuse/fusion.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

#include "memfuse/error.hpp"
#include "memfuse/folds.hpp"
#include "memfuse/model_io.hpp"

namespace memfuse {

std::string_view modality_name(Modality m) {
    switch (m) {
        case Modality::audio: return "audio";
        case Modality::visual: return "visual";
        case Modality::mem_lexical: return "mem_lexical";
        case Modality::mem_embedding: return "mem_embedding";
    }
    throw std::logic_error("unknown modality");
}

Modality modality_from_name(std::string_view name) {
    for (Modality m : kModalityOrder) {
        if (modality_name(m) == name) return m;
    }
    throw InputError("unknown modality '" + std::string(name) + "'");
}

std::string_view base_role_name(BaseRole r) {
    switch (r) {
        case BaseRole::audio: return "audio";
        case BaseRole::visual: return "visual";
        case BaseRole::memory: return "memory";
    }
    throw std::logic_error("unknown base role");
}

const std::optional<std::vector<double>>& ModalityBundle::get(Modality m) const {
    switch (m) {
        case Modality::audio: return audio;
        case Modality::visual: return visual;
        case Modality::mem_lexical: return mem_lexical;
        case Modality::mem_embedding: return mem_embedding;
    }
    throw std::logic_error("unknown modality");
}

std::optional<std::vector<double>>& ModalityBundle::get(Modality m) {
    return const_cast<std::optional<std::vector<double>>&>(std::as_const(*this).get(m));
}

ModalitySet ModalitySet::from_bundles(std::span<const ModalityBundle> bundles) {
    if (bundles.empty()) throw InputError("fusion: no samples");
    ModalitySet set(static_cast<Eigen::Index>(bundles.size()));
    for (Modality m : kModalityOrder) {
        const auto& first = bundles.front().get(m);
        for (std::size_t i = 0; i < bundles.size(); ++i) {
            const auto& v = bundles[i].get(m);
            if (v.has_value() != first.has_value()) {
                throw InputError("fusion: sample " + std::to_string(i) + " has a different modality set (" +
                                 std::string(modality_name(m)) + ")");
            }
            if (v && v->size() != first->size()) {
                throw InputError("fusion: sample " + std::to_string(i) + " " + std::string(modality_name(m)) +
                                 " has " + std::to_string(v->size()) + " values, expected " +
                                 std::to_string(first->size()));
            }
        }
        if (!first) continue;
        Matrix block(set.rows(), static_cast<Eigen::Index>(first->size()));
        for (std::size_t i = 0; i < bundles.size(); ++i) {
            const auto& v = *bundles[i].get(m);
            block.row(static_cast<Eigen::Index>(i)) =
                Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        set.set(m, std::move(block));
    }
    if (set.active().empty()) throw InputError("fusion: no modality present");
    return set;
}

const Matrix& ModalitySet::block(Modality m) const {
    const auto& b = blocks_[index(m)];
    if (!b) throw std::invalid_argument("fusion: modality " + std::string(modality_name(m)) + " is absent");
    return *b;
}

void ModalitySet::set(Modality m, Matrix block) {
    if (block.rows() != rows_) {
        throw std::invalid_argument("fusion: block for " + std::string(modality_name(m)) + " has " +
                                    std::to_string(block.rows()) + " rows, expected " + std::to_string(rows_));
    }
    blocks_[index(m)] = std::move(block);
}

std::vector<Modality> ModalitySet::active() const {
    std::vector<Modality> out;
    for (Modality m : kModalityOrder) {
        if (has(m)) out.push_back(m);
    }
    return out;
}

Matrix ModalitySet::concat(std::span<const Modality> order) const {
    Eigen::Index cols = 0;
    for (Modality m : order) cols += block(m).cols();
    Matrix out(rows_, cols);
    Eigen::Index at = 0;
    for (Modality m : order) {
        const Matrix& b = block(m);
        out.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    return out;
}

ModalitySet ModalitySet::rows_subset(std::span<const std::size_t> rows) const {
    ModalitySet out(static_cast<Eigen::Index>(rows.size()));
    for (Modality m : kModalityOrder) {
        if (!has(m)) continue;
        const Matrix& b = block(m);
        Matrix sub(out.rows(), b.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = b.row(
            static_cast<Eigen::Index>(rows[i]));
        out.set(m, std::move(sub));
    }
    return out;
}

ModalitySet ModalitySet::only(std::span<const Modality> keep) const {
    ModalitySet out(rows_);
    for (Modality m : keep) out.set(m, block(m));
    return out;
}

std::vector<ModalityShape> shape_of(const ModalitySet& set) {
    std::vector<ModalityShape> out;
    for (Modality m : set.active()) out.push_back({m, set.block(m).cols()});
    return out;
}

void check_shape(const ModalitySet& set, std::span<const ModalityShape> expected) {
    const auto got = shape_of(set);
    auto describe = [](std::span<const ModalityShape> s) {
        std::string out;
        for (const auto& e : s) {
            if (!out.empty()) out += ", ";
            out += std::string(modality_name(e.modality)) + ":" + std::to_string(e.dim);
        }
        return "[" + out + "]";
    };
    if (!std::equal(got.begin(), got.end(), expected.begin(), expected.end())) {
        throw InputError("fusion: modality mismatch, model expects " + describe(expected) + ", got " + describe(got));
    }
}

// ---------------------------------------------------------------------------

EarlyFusionModel early_fusion_fit(const ModalitySet& x, const Vector& y, const SvrParams& params) {
    const auto active = x.active();
    if (active.empty()) throw InputError("fusion: no modality present");
    EarlyFusionModel m;
    m.shape = shape_of(x);
    m.svr = fit_svr(x.concat(active), y, params);
    return m;
}

EarlyFusionModel early_fusion_fit(std::span<const ModalityBundle> bundles, const Vector& y, const SvrParams& params) {
    return early_fusion_fit(ModalitySet::from_bundles(bundles), y, params);
}

Vector early_fusion_predict(const EarlyFusionModel& m, const ModalitySet& x) {
    check_shape(x, m.shape);
    return predict_svr(m.svr, x.concat(x.active()));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Modality> memory_modalities(const ModalitySet& x) {
    std::vector<Modality> out;
    if (x.has(Modality::mem_lexical)) out.push_back(Modality::mem_lexical);
    if (x.has(Modality::mem_embedding)) out.push_back(Modality::mem_embedding);
    return out;
}

std::vector<BaseRole> roles_for(const ModalitySet& x) {
    std::vector<BaseRole> roles;
    if (x.has(Modality::audio)) roles.push_back(BaseRole::audio);
    if (x.has(Modality::visual)) roles.push_back(BaseRole::visual);
    if (!memory_modalities(x).empty()) roles.push_back(BaseRole::memory);
    return roles;
}

struct BaseModels {
    std::optional<SvrModel> audio;
    std::optional<SvrModel> visual;
    std::optional<ForestModel> memory;
};

BaseModels fit_bases(const ModalitySet& x, const Vector& y, std::span<const BaseRole> roles,
                     const LateFusionParams& p) {
    BaseModels b;
    for (BaseRole r : roles) {
        switch (r) {
            case BaseRole::audio: b.audio = fit_svr(x.block(Modality::audio), y, p.audio_svr); break;
            case BaseRole::visual: b.visual = fit_svr(x.block(Modality::visual), y, p.visual_svr); break;
            case BaseRole::memory: {
                const auto mods = memory_modalities(x);
                b.memory = fit_forest(x.concat(mods), y, p.memory_forest);
                break;
            }
        }
    }
    return b;
}

Matrix predict_bases(const BaseModels& b, const ModalitySet& x, std::span<const BaseRole> roles) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(roles.size()));
    for (std::size_t k = 0; k < roles.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        switch (roles[k]) {
            case BaseRole::audio: out.col(col) = predict_svr(*b.audio, x.block(Modality::audio)); break;
            case BaseRole::visual: out.col(col) = predict_svr(*b.visual, x.block(Modality::visual)); break;
            case BaseRole::memory: out.col(col) = predict_forest(*b.memory, x.concat(memory_modalities(x))); break;
        }
    }
    return out;
}

Vector select(const Vector& v, std::span<const std::size_t> rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
    return out;
}

}  // namespace

LateFusionModel late_fusion_fit(const ModalitySet& x, const Vector& y, std::span<const std::string> groups,
                                const LateFusionParams& params, StackingTrace* trace) {
    if (x.rows() != y.size() || static_cast<std::size_t>(x.rows()) != groups.size()) {
        throw std::invalid_argument("late_fusion_fit: row count mismatch");
    }
    if (params.k_inner < 2) throw InputError("late fusion: k_inner must be at least 2");
    if (!params.naive && x.rows() < 2 * params.k_inner) {
        throw InputError("late fusion: need at least 2*k_inner = " + std::to_string(2 * params.k_inner) +
                         " samples, got " + std::to_string(x.rows()));
    }
    LateFusionModel m;
    m.shape = shape_of(x);
    m.roles = roles_for(x);
    m.naive = params.naive;
    if (m.roles.empty()) throw InputError("late fusion: no modality present");

    Matrix meta_x(x.rows(), static_cast<Eigen::Index>(m.roles.size()));
    if (!params.naive) {
        const std::vector<std::string> gv(groups.begin(), groups.end());
        std::set<std::string> distinct(gv.begin(), gv.end());
        const CvPlan plan = make_lpo_folds(distinct, params.k_inner, params.seed);
        for (const Split& s : plan_splits(plan, gv)) {
            assert_disjoint(s, gv);
            const BaseModels b = fit_bases(x.rows_subset(s.train), select(y, s.train), m.roles, params);
            const Matrix pred = predict_bases(b, x.rows_subset(s.test), m.roles);
            for (std::size_t i = 0; i < s.test.size(); ++i) {
                meta_x.row(static_cast<Eigen::Index>(s.test[i])) = pred.row(static_cast<Eigen::Index>(i));
            }
            if (trace) trace->folds.push_back({s.train, s.test});
        }
    }
    BaseModels final_bases = fit_bases(x, y, m.roles, params);
    if (params.naive) meta_x = predict_bases(final_bases, x, m.roles);
    m.audio = std::move(final_bases.audio);
    m.visual = std::move(final_bases.visual);
    m.memory = std::move(final_bases.memory);
    m.meta = fit_ridge(meta_x, y, params.meta_alpha);
    return m;
}

LateFusionModel late_fusion_fit(std::span<const ModalityBundle> bundles, const Vector& y,
                                std::span<const std::string> groups, const LateFusionParams& params) {
    return late_fusion_fit(ModalitySet::from_bundles(bundles), y, groups, params);
}

Matrix late_fusion_base_predictions(const LateFusionModel& m, const ModalitySet& x) {
    check_shape(x, m.shape);
    BaseModels b{m.audio, m.visual, m.memory};
    return predict_bases(b, x, m.roles);
}

Vector late_fusion_predict(const LateFusionModel& m, const ModalitySet& x) {
    return predict_ridge(m.meta, late_fusion_base_predictions(m, x));
}

Vector fusion_predict(const FusionModel& m, const ModalitySet& x) {
    if (const auto* e = std::get_if<EarlyFusionModel>(&m)) return early_fusion_predict(*e, x);
    return late_fusion_predict(std::get<LateFusionModel>(m), x);
}

// ---------------------------------------------------------------------------

namespace {

json shape_to_json(std::span<const ModalityShape> shape) {
    json out = json::array();
    for (const auto& s : shape) out.push_back({{"modality", modality_name(s.modality)}, {"dim", s.dim}});
    return out;
}

std::vector<ModalityShape> shape_from_json(const json& j) {
    std::vector<ModalityShape> out;
    for (const auto& e : j) {
        out.push_back({modality_from_name(e.at("modality").get<std::string>()), e.at("dim").get<Eigen::Index>()});
    }
    return out;
}

}  // namespace

void save_fusion_model(const std::filesystem::path& dir, const FusionModel& model) {
    std::filesystem::create_directories(dir);
    json manifest = {{"kind", "fusion"}, {"format_version", kModelFormatVersion}};
    if (const auto* e = std::get_if<EarlyFusionModel>(&model)) {
        manifest["strategy"] = "early";
        manifest["shape"] = shape_to_json(e->shape);
        manifest["files"] = {{"svr", "svr.json"}};
        save_json_file(dir / "svr.json", svr_to_json(e->svr));
    } else {
        const auto& l = std::get<LateFusionModel>(model);
        manifest["strategy"] = "late";
        manifest["shape"] = shape_to_json(l.shape);
        manifest["naive"] = l.naive;
        json roles = json::array();
        for (BaseRole r : l.roles) roles.push_back(base_role_name(r));
        manifest["roles"] = roles;
        json files = {{"meta", "meta_ridge.json"}};
        if (l.audio) {
            files["audio"] = "audio_svr.json";
            save_json_file(dir / "audio_svr.json", svr_to_json(*l.audio));
        }
        if (l.visual) {
            files["visual"] = "visual_svr.json";
            save_json_file(dir / "visual_svr.json", svr_to_json(*l.visual));
        }
        if (l.memory) {
            files["memory"] = "memory_forest.json";
            save_json_file(dir / "memory_forest.json", forest_to_json(*l.memory));
        }
        save_json_file(dir / "meta_ridge.json", ridge_to_json(l.meta));
        manifest["files"] = files;
    }
    save_json_file(dir / "manifest.json", manifest);
}

FusionModel load_fusion_model(const std::filesystem::path& dir) {
    const json manifest = load_json_file(dir / "manifest.json");
    check_header(manifest, "fusion");
    try {
        const auto strategy = manifest.at("strategy").get<std::string>();
        const json& files = manifest.at("files");
        auto file = [&](const char* key) { return load_json_file(dir / files.at(key).get<std::string>()); };
        if (strategy == "early") {
            EarlyFusionModel e;
            e.shape = shape_from_json(manifest.at("shape"));
            e.svr = svr_from_json(file("svr"));
            return e;
        }
        if (strategy != "late") throw InputError("fusion manifest: unknown strategy '" + strategy + "'");
        LateFusionModel l;
        l.shape = shape_from_json(manifest.at("shape"));
        l.naive = manifest.at("naive").get<bool>();
        for (const auto& r : manifest.at("roles")) {
            const auto name = r.get<std::string>();
            if (name == "audio") {
                l.roles.push_back(BaseRole::audio);
                l.audio = svr_from_json(file("audio"));
            } else if (name == "visual") {
                l.roles.push_back(BaseRole::visual);
                l.visual = svr_from_json(file("visual"));
            } else if (name == "memory") {
                l.roles.push_back(BaseRole::memory);
                l.memory = forest_from_json(file("memory"));
            } else {
                throw InputError("fusion manifest: unknown base role '" + name + "'");
            }
        }
        l.meta = ridge_from_json(file("meta"));
        if (l.meta.weights.size() != static_cast<Eigen::Index>(l.roles.size())) {
            throw InputError("fusion manifest: meta input width does not match base models");
        }
        return l;
    } catch (const json::exception& e) {
        throw InputError((dir / "manifest.json").string() + ": " + e.what());
    }
}

}  // namespace memfuse
