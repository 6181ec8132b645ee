#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "memfuse/av_features.hpp"
#include "memfuse/model.hpp"

namespace memfuse {

// Standard deviations of the additive terms of one affective dimension. Each
// driver is scaled to unit variance first, so weight^2 is the variance the
// term contributes before clipping.
struct EffectWeights {
    double video = 0.0;    // video latent
    double memory = 0.0;   // affect of the selected memory (same dimension)
    double context = 0.0;  // projection of age, HEXACO and mood
    double person = 0.0;   // participant random intercept
    double noise = 0.0;    // residual
    double base = 0.0;     // intercept
};

struct SynthSpec {
    int n_participants = 260;
    int n_videos = 42;
    int videos_per_participant = 7;
    double memory_rate = 978.0 / 2098.0;
    double multi_memory_rate = 51.0 / 978.0;  // among responses with a memory
    std::array<EffectWeights, 3> weights;     // P, A, D
    std::size_t audio_dim = kAudioDim;
    std::size_t visual_dim = kVisualDim;
    int frames_per_video = 2;
    double av_noise = 0.5;  // feature-space noise relative to the embedded latent
    int decimals = 6;       // rounding of generated reals, matching the written files
    std::uint64_t seed = 0;

    // Weights with memory affect driving pleasure.
    static SynthSpec planted();
    // planted() with every memory weight set to zero.
    static SynthSpec null_memory();

    void validate() const;
};

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& s);

struct SynthOutput {
    Dataset dataset;
    std::map<std::string, AudioFeatures> audio;
    std::map<std::string, FrameFeatures> frames;
    nlohmann::json ground_truth;

    // Pooled features keyed by video, as load_av_features would return them.
    std::map<std::string, VideoAv> video_av() const;
};

SynthOutput generate(const SynthSpec& spec);

// Writes dataset.json, av/<video>_audio.csv, av/<video>_frames.csv,
// av/manifest.json and ground_truth.json under `dir`.
void write_synth_output(const std::filesystem::path& dir, const SynthOutput& out, int decimals);

// Phrase bank used for memory texts: eight PAD octants (index bit 2 = P >= 0,
// bit 1 = A >= 0, bit 0 = D >= 0) plus neutral filler.
const std::array<std::vector<std::string>, 8>& octant_phrases();
const std::vector<std::string>& neutral_phrases();
int pad_octant(const PadTriple& t);

}  // namespace memfuse
