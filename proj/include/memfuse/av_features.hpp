#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace memfuse {

// Dimensional contract of the precomputed stimulus descriptors.
inline constexpr std::size_t kAudioDim = 1582;        // emobase2010 statistics
inline constexpr std::size_t kTheoryVisualDim = 271;  // art/psychology-inspired frame descriptors
inline constexpr std::size_t kDeepVisualDim = 4096;   // VGG16 FC1 activations
inline constexpr std::size_t kAnpVisualDim = 4342;    // adjective-noun-pair class probabilities
inline constexpr std::size_t kVisualDim = kTheoryVisualDim + kDeepVisualDim + kAnpVisualDim;

static_assert(kVisualDim == 8709);

// Expected widths; overridable for small fixtures.
struct AvDims {
    std::size_t audio = kAudioDim;
    std::size_t visual = kVisualDim;
};

struct AudioFeatures {
    std::string video_id;
    std::vector<double> vector;
};

struct FrameFeatures {
    std::string video_id;
    std::vector<std::vector<double>> frames;  // one per extracted second
};

// Single headerless CSV row of `dim` finite values.
AudioFeatures load_audio_features(const std::filesystem::path& path, std::string video_id,
                                  std::size_t dim = kAudioDim);

// One CSV row per frame; at least one frame, every row `dim` wide.
FrameFeatures load_frame_features(const std::filesystem::path& path, std::string video_id,
                                  std::size_t dim = kVisualDim);

// Dimension-wise mean over frames.
std::vector<double> pool_frames(const FrameFeatures& f);

void write_audio_features(const std::filesystem::path& path, const AudioFeatures& f,
                          std::optional<int> decimals = {});
void write_frame_features(const std::filesystem::path& path, const FrameFeatures& f,
                          std::optional<int> decimals = {});

struct AvPaths {
    std::filesystem::path audio_path;
    std::filesystem::path frames_path;
};

// Sidecar manifest: {"<video_id>": {"audio_path": ..., "frames_path": ...}, ...}.
// Relative paths are resolved against the manifest's directory on load.
std::map<std::string, AvPaths> load_av_manifest(const std::filesystem::path& path);
void write_av_manifest(const std::filesystem::path& path, const std::map<std::string, AvPaths>& entries);

struct VideoAv {
    std::vector<double> audio;
    std::vector<double> visual;  // pooled over frames
};

// Loads and pools every video listed in the manifest.
std::map<std::string, VideoAv> load_av_features(const std::filesystem::path& manifest, const AvDims& dims = {});

}  // namespace memfuse
