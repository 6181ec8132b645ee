// memfuse: feature extraction, experiments, variance analysis and synthetic data.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"
#include "memfuse/experiment.hpp"
#include "memfuse/parallel.hpp"
#include "memfuse/synth_data.hpp"
#include "memfuse/text_affect.hpp"
#include "memfuse/variance_analysis.hpp"

#ifndef MEMFUSE_RESOURCE_DIR
#define MEMFUSE_RESOURCE_DIR "resources"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace memfuse;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out;
    std::string condition;
    std::string fusion;
};

struct Config {
    json doc = json::object();
    fs::path base;  // relative paths resolve here

    std::optional<fs::path> path(const char* key) const {
        if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
        if (!doc.at(key).is_string()) throw InputError(std::string("config: '") + key + "' must be a path string");
        fs::path p = doc.at(key).get<std::string>();
        return p.is_absolute() ? p : base / p;
    }

    fs::path required_path(const char* key) const {
        auto p = path(key);
        if (!p) throw InputError(std::string("config: missing '") + key + "'");
        if (!fs::exists(*p)) throw InputError(std::string("config: ") + key + " '" + p->string() + "' does not exist");
        return *p;
    }
};

Config load_config(const Flags& f) {
    Config c;
    if (f.config.empty()) return c;
    const fs::path p = f.config;
    try {
        c.doc = json::parse(read_text_file(p));
    } catch (const json::exception& e) {
        throw InputError(p.string() + ": " + e.what());
    }
    if (!c.doc.is_object()) throw InputError(p.string() + ": config must be a JSON object");
    c.base = p.parent_path();
    return c;
}

std::uint64_t resolve_seed(const Flags& f, const Config& c) {
    if (f.seed) return *f.seed;
    if (c.doc.contains("seed")) {
        if (!c.doc.at("seed").is_number_unsigned()) throw InputError("config: seed must be a non-negative integer");
        return c.doc.at("seed").get<std::uint64_t>();
    }
    throw InputError("a seed is required (--seed, MEMFUSE_SEED or \"seed\" in the config)");
}

fs::path resolve_out(const Flags& f, const Config& c) {
    if (!f.out.empty()) return f.out;
    if (auto p = c.path("output_dir")) return *p;
    throw InputError("an output directory is required (--out, MEMFUSE_OUT or \"output_dir\" in the config)");
}

int resolve_workers(const Flags& f, const Config& c) {
    int w = f.workers ? *f.workers : c.doc.value("workers", 0);
    if (w < 0) throw InputError("workers must be >= 0");
    return w == 0 ? default_workers() : w;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

fs::path text_resources_path(const Config& c) {
    if (auto p = c.path("text_resources")) {
        if (!fs::exists(*p)) throw InputError("config: text_resources '" + p->string() + "' does not exist");
        return *p;
    }
    return fs::path(MEMFUSE_RESOURCE_DIR) / "text_resources.json";
}

DatasetLoad load_checked(const fs::path& p) {
    DatasetLoad load = load_dataset(p);
    for (const auto& w : load.warnings) std::cerr << "memfuse: warning: " << w << "\n";
    return load;
}

std::vector<TextFeatureRow> extract_rows(const Dataset& memory_ds, const TextResources& res) {
    std::vector<TextFeatureRow> rows;
    for (const auto& r : memory_ds.responses()) {
        rows.push_back({r.participant_id, r.video_id, res.extract(r.memories.front().text)});
    }
    return rows;
}

// ---------------------------------------------------------------------------

int cmd_extract_text(const Flags& f) {
    const Config c = load_config(f);
    const DatasetLoad load = load_checked(c.required_path("dataset"));
    const TextResources res = load_text_resources(text_resources_path(c));
    const fs::path out = resolve_out(f, c);
    const Dataset ds = memory_subset(load.dataset);
    const auto rows = extract_rows(ds, res);
    const auto manifest = write_text_features(out, rows, res.lexical_dim(), res.embedding_dim());
    std::cerr << "memfuse: wrote " << rows.size() << " feature rows (" << res.lexical_dim() << " lexical, "
              << res.embedding_dim() << " embedding dims) to " << manifest.string() << "\n";
    return 0;
}

ExperimentOptions experiment_options(const Flags& f, const Config& c) {
    ExperimentOptions opt;
    opt.seed = resolve_seed(f, c);
    opt.workers = resolve_workers(f, c);
    const json& d = c.doc;
    try {
        opt.grid = grid_from_json(d.value("grid", json::object()));
        opt.k_outer = d.value("k_outer", 5);
        opt.k_inner = d.value("k_inner", 4);
        if (d.contains("settings")) {
            // baseline values for anything the grid does not vary
            HyperPoint base;
            for (const auto& [k, v] : d.at("settings").items()) {
                if (k == "naive_stacking") {
                    opt.settings.naive_stacking = v.get<bool>();
                } else if (v.is_string() && v.get<std::string>() == "scale" && k == "svr.gamma") {
                    base[k] = 0.0;
                } else {
                    base[k] = v.get<double>();
                }
            }
            opt.settings = opt.settings.with(base);
        }
        std::vector<std::string> conds;
        if (!f.condition.empty()) {
            conds = split_list(f.condition);
        } else if (d.contains("conditions")) {
            conds = d.at("conditions").get<std::vector<std::string>>();
        } else {
            conds = {"M", "AV", "AVM", "AV†"};
        }
        for (const auto& s : conds) opt.conditions.push_back(condition_from_name(s));

        std::vector<std::string> strategies;
        std::string fusion = f.fusion;
        if (fusion.empty() && d.contains("fusion")) {
            if (d.at("fusion").is_string()) {
                fusion = d.at("fusion").get<std::string>();
            } else {
                strategies = d.at("fusion").get<std::vector<std::string>>();
            }
        }
        if (!fusion.empty()) strategies = fusion == "both" ? std::vector<std::string>{"early", "late"}
                                                           : std::vector<std::string>{fusion};
        if (!strategies.empty()) {
            opt.strategies.clear();
            for (const auto& s : strategies) opt.strategies.push_back(strategy_from_name(s));
        }
        if (d.contains("dimensions")) {
            opt.dimensions.clear();
            for (const auto& name : d.at("dimensions").get<std::vector<std::string>>()) {
                const auto it = std::find(kPadNames.begin(), kPadNames.end(), name);
                if (it == kPadNames.end()) throw InputError("config: unknown dimension '" + name + "'");
                opt.dimensions.push_back(static_cast<int>(it - kPadNames.begin()));
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return opt;
}

void write_report(const fs::path& out, const ExperimentReport& r) {
    write_text_file(out / (r.experiment + ".json"), report_to_json(r).dump(1) + "\n");
    const std::string table = render_report_table(r);
    write_text_file(out / (r.experiment + ".txt"), table);
    std::cout << table << "\n";
}

int cmd_experiment(const Flags& f) {
    const Config c = load_config(f);
    if (f.config.empty()) throw InputError("experiment needs --config");
    const ExperimentOptions opt = experiment_options(f, c);
    const fs::path out = resolve_out(f, c);
    const DatasetLoad load = load_checked(c.required_path("dataset"));
    const Dataset ds = memory_subset(load.dataset);

    bool want_m = false;
    bool want_av = false;
    for (Condition cond : opt.conditions) (cond == Condition::M ? want_m : want_av) = true;
    bool needs_text = want_m;
    bool needs_av = false;
    for (Condition cond : opt.conditions) {
        if (cond == Condition::AVM) needs_text = true;
        if (cond == Condition::AV || cond == Condition::AVM) needs_av = true;
    }

    std::optional<std::vector<TextFeatureRow>> text;
    if (needs_text) {
        if (auto p = c.path("text_features")) {
            if (!fs::exists(*p)) throw InputError("config: text_features '" + p->string() + "' does not exist");
            text = load_text_features(*p);
        } else {
            text = extract_rows(ds, load_text_resources(text_resources_path(c)));
        }
    }
    std::optional<std::map<std::string, VideoAv>> av;
    if (needs_av) {
        AvDims dims;
        if (c.doc.contains("av_dims")) {
            dims.audio = c.doc.at("av_dims").value("audio", dims.audio);
            dims.visual = c.doc.at("av_dims").value("visual", dims.visual);
        }
        av = load_av_features(c.required_path("av_manifest"), dims);
    }
    const SampleTable table = build_sample_table(ds, text ? &*text : nullptr, av ? &*av : nullptr);

    if (want_m) {
        ExperimentOptions o = opt;
        write_report(out, run_experiment1(table, o));
    }
    if (want_av) {
        ExperimentOptions o = opt;
        o.conditions.erase(std::remove(o.conditions.begin(), o.conditions.end(), Condition::M), o.conditions.end());
        write_report(out, run_experiment2(table, o));
    }
    return 0;
}

int cmd_variance(const Flags& f) {
    const Config c = load_config(f);
    if (f.config.empty()) throw InputError("variance needs --config");
    const fs::path out = resolve_out(f, c);
    const DatasetLoad load = load_checked(c.required_path("dataset"));
    const VarianceReport r = run_variance_analysis(load.dataset);
    write_text_file(out / "variance.json", variance_report_to_json(r).dump(1) + "\n");
    const std::string table = render_variance_table(r);
    write_text_file(out / "variance.txt", table);
    std::cout << table;
    return 0;
}

int cmd_synth(const Flags& f) {
    const Config c = load_config(f);
    json spec_doc = c.doc;
    spec_doc.erase("output_dir");
    spec_doc.erase("workers");
    SynthSpec spec = synth_spec_from_json(spec_doc);
    spec.seed = resolve_seed(f, c);
    const fs::path out = resolve_out(f, c);
    const SynthOutput data = generate(spec);
    write_synth_output(out, data, spec.decimals);

    // ready-to-run experiment and variance configs for the generated data
    json exp = {{"dataset", "dataset.json"},
                {"av_manifest", "av/manifest.json"},
                {"av_dims", {{"audio", spec.audio_dim}, {"visual", spec.visual_dim}}},
                {"text_resources", fs::absolute(text_resources_path(c)).lexically_normal().string()},
                {"seed", spec.seed},
                {"conditions", {"M", "AV", "AVM", "AV†"}},
                {"fusion", "both"},
                {"grid", {{"svr.c", {1.0}}, {"svr.epsilon", {0.05}}, {"ridge.alpha", {1.0}}}},
                {"output_dir", "results"}};
    write_text_file(out / "experiment_config.json", exp.dump(1) + "\n");
    write_text_file(out / "variance_config.json",
                    json{{"dataset", "dataset.json"}, {"output_dir", "results"}}.dump(1) + "\n");
    std::cerr << "memfuse: wrote " << data.dataset.size() << " responses (clipping rate "
              << data.ground_truth.at("clipping_rate").get<double>() << ") to " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memfuse: memory-augmented affect prediction toolkit"};
    app.require_subcommand(1);
    Flags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "JSON config file")->envname("MEMFUSE_CONFIG");
        sub->add_option("--seed", flags.seed, "random seed (overrides the config)")->envname("MEMFUSE_SEED");
        sub->add_option("--workers", flags.workers, "worker threads (0 = all cores)")->envname("MEMFUSE_WORKERS");
        sub->add_option("--out", flags.out, "output directory")->envname("MEMFUSE_OUT");
    };
    auto* extract = app.add_subcommand("extract-text", "extract lexical and embedding features of memory texts");
    auto* experiment = app.add_subcommand("experiment", "run experiments 1 and/or 2 with nested cross-validation");
    auto* variance = app.add_subcommand("variance", "nested mixed-model variance analysis");
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with planted effects");
    for (auto* s : {extract, experiment, variance, synth}) add_common(s);
    experiment->add_option("--condition", flags.condition, "comma list of M, AV, AVM, AV†")
        ->envname("MEMFUSE_CONDITION");
    experiment->add_option("--fusion", flags.fusion, "early, late or both")
        ->envname("MEMFUSE_FUSION")
        ->check(CLI::IsMember({"early", "late", "both"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*extract) return cmd_extract_text(flags);
        if (*experiment) return cmd_experiment(flags);
        if (*variance) return cmd_variance(flags);
        if (*synth) return cmd_synth(flags);
    } catch (const InputError& e) {
        std::cerr << "memfuse: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "memfuse: failure: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
