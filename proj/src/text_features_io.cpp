#include <json.hpp>

#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"
#include "memfuse/text_affect.hpp"

namespace memfuse {

std::filesystem::path write_text_features(const std::filesystem::path& dir, std::span<const TextFeatureRow> rows,
                                          std::size_t lexical_dim, std::size_t embedding_dim) {
    NumericRows lexical;
    NumericRows embedding;
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& r : rows) {
        if (r.features.lexical.size() != lexical_dim || r.features.embedding.size() != embedding_dim) {
            throw std::invalid_argument("write_text_features: feature width mismatch for participant " +
                                        r.participant_id + ", video " + r.video_id);
        }
        lexical.push_back(r.features.lexical);
        embedding.push_back(r.features.embedding);
        keys.push_back({{"participant_id", r.participant_id},
                        {"video_id", r.video_id},
                        {"lexical_coverage", r.features.lexical_coverage},
                        {"embedding_coverage", r.features.embedding_coverage}});
    }
    write_numeric_csv(dir / "lexical.csv", lexical);
    write_numeric_csv(dir / "embedding.csv", embedding);
    nlohmann::json manifest = {{"kind", "text_features"},
                               {"format_version", 1},
                               {"lexical_dim", lexical_dim},
                               {"embedding_dim", embedding_dim},
                               {"lexical_path", "lexical.csv"},
                               {"embedding_path", "embedding.csv"},
                               {"rows", keys}};
    const auto path = dir / "manifest.json";
    write_text_file(path, manifest.dump(1) + "\n");
    return path;
}

std::vector<TextFeatureRow> load_text_features(const std::filesystem::path& manifest_path) {
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(manifest_path.string() + ": " + e.what());
    }
    try {
        if (m.at("kind").get<std::string>() != "text_features") {
            throw InputError(manifest_path.string() + ": not a text feature manifest");
        }
        const auto base = manifest_path.parent_path();
        auto resolve = [&](const char* key) {
            std::filesystem::path p = m.at(key).get<std::string>();
            return p.is_absolute() ? p : base / p;
        };
        const auto lex_dim = m.at("lexical_dim").get<std::size_t>();
        const auto emb_dim = m.at("embedding_dim").get<std::size_t>();
        const auto& keys = m.at("rows");
        NumericRows lexical;
        NumericRows embedding;
        if (!keys.empty()) {
            lexical = read_numeric_csv(resolve("lexical_path"), lex_dim);
            embedding = read_numeric_csv(resolve("embedding_path"), emb_dim);
        }
        if (lexical.size() != keys.size() || embedding.size() != keys.size()) {
            throw InputError(manifest_path.string() + ": manifest lists " + std::to_string(keys.size()) +
                             " rows but the feature files hold " + std::to_string(lexical.size()) + " and " +
                             std::to_string(embedding.size()));
        }
        std::vector<TextFeatureRow> out;
        out.reserve(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
            TextFeatureRow r;
            r.participant_id = keys[i].at("participant_id").get<std::string>();
            r.video_id = keys[i].at("video_id").get<std::string>();
            r.features.lexical = std::move(lexical[i]);
            r.features.embedding = std::move(embedding[i]);
            r.features.lexical_coverage = keys[i].at("lexical_coverage").get<double>();
            r.features.embedding_coverage = keys[i].at("embedding_coverage").get<double>();
            out.push_back(std::move(r));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(manifest_path.string() + ": " + e.what());
    }
}

}  // namespace memfuse
