#include "memfuse/av_features.hpp"

#include <json.hpp>

#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"

namespace memfuse {

namespace {

void check_width(const NumericRows& rows, std::size_t dim, const std::filesystem::path& path) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim) {
            throw InputError(path.string() + ": line " + std::to_string(i + 1) + ": dimension mismatch, expected " +
                             std::to_string(dim) + " values, found " + std::to_string(rows[i].size()));
        }
    }
}

}  // namespace

AudioFeatures load_audio_features(const std::filesystem::path& path, std::string video_id, std::size_t dim) {
    NumericRows rows = read_numeric_csv(path);
    if (rows.size() != 1) {
        throw InputError(path.string() + ": expected exactly one audio feature row, found " +
                         std::to_string(rows.size()));
    }
    check_width(rows, dim, path);
    return AudioFeatures{std::move(video_id), std::move(rows.front())};
}

FrameFeatures load_frame_features(const std::filesystem::path& path, std::string video_id, std::size_t dim) {
    NumericRows rows = read_numeric_csv(path);
    if (rows.empty()) throw InputError(path.string() + ": no frames");
    check_width(rows, dim, path);
    return FrameFeatures{std::move(video_id), std::move(rows)};
}

std::vector<double> pool_frames(const FrameFeatures& f) {
    if (f.frames.empty()) throw std::invalid_argument("pool_frames: no frames for video " + f.video_id);
    const std::size_t dim = f.frames.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& frame : f.frames) {
        if (frame.size() != dim) throw std::invalid_argument("pool_frames: ragged frames for video " + f.video_id);
        for (std::size_t k = 0; k < dim; ++k) mean[k] += frame[k];
    }
    const double n = static_cast<double>(f.frames.size());
    for (double& v : mean) v /= n;
    return mean;
}

void write_audio_features(const std::filesystem::path& path, const AudioFeatures& f, std::optional<int> decimals) {
    write_numeric_csv(path, NumericRows{f.vector}, decimals);
}

void write_frame_features(const std::filesystem::path& path, const FrameFeatures& f, std::optional<int> decimals) {
    write_numeric_csv(path, f.frames, decimals);
}

std::map<std::string, AvPaths> load_av_manifest(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw InputError(path.string() + ": manifest must map video ids to path objects");
    const auto base = path.parent_path();
    std::map<std::string, AvPaths> out;
    for (const auto& [video, entry] : doc.items()) {
        if (!entry.is_object() || !entry.contains("audio_path") || !entry.contains("frames_path")) {
            throw InputError(path.string() + ": entry '" + video + "' needs audio_path and frames_path");
        }
        auto resolve = [&](const char* key) {
            std::filesystem::path p = entry.at(key).get<std::string>();
            return p.is_absolute() ? p : base / p;
        };
        out.emplace(video, AvPaths{resolve("audio_path"), resolve("frames_path")});
    }
    return out;
}

void write_av_manifest(const std::filesystem::path& path, const std::map<std::string, AvPaths>& entries) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [video, p] : entries) {
        doc[video] = {{"audio_path", p.audio_path.generic_string()}, {"frames_path", p.frames_path.generic_string()}};
    }
    write_text_file(path, doc.dump(2) + "\n");
}

std::map<std::string, VideoAv> load_av_features(const std::filesystem::path& manifest, const AvDims& dims) {
    std::map<std::string, VideoAv> out;
    for (const auto& [video, paths] : load_av_manifest(manifest)) {
        auto audio = load_audio_features(paths.audio_path, video, dims.audio);
        auto frames = load_frame_features(paths.frames_path, video, dims.visual);
        out.emplace(video, VideoAv{std::move(audio.vector), pool_frames(frames)});
    }
    return out;
}

}  // namespace memfuse
