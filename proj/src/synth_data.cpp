#include "memfuse/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"
#include "memfuse/seeds.hpp"

namespace memfuse {

using nlohmann::json;

namespace {

double round_to(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double r = std::round(v * scale) / scale;
    return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string padded_id(char prefix, int i, int total) {
    const int width = static_cast<int>(std::to_string(total).size());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, i + 1);
    return buf;
}

// Analytic moments of the context variables, used to standardize them.
constexpr int kAgeMin = 18;
constexpr int kAgeMax = 65;
constexpr double kMoodRange = 0.8;
constexpr int kContextVars = 10;  // age, six HEXACO, three mood

std::array<double, kContextVars> standardized_context(const ViewerContext& c) {
    std::array<double, kContextVars> z{};
    const double age_mean = 0.5 * (kAgeMin + kAgeMax);
    const double levels = kAgeMax - kAgeMin + 1;
    const double age_var = (levels * levels - 1.0) / 12.0;
    z[0] = (c.age - age_mean) / std::sqrt(age_var);
    for (std::size_t k = 0; k < 6; ++k) z[1 + k] = (c.hexaco[k] - 3.0) / std::sqrt(16.0 / 12.0);
    const double mood_sd = 2.0 * kMoodRange / std::sqrt(12.0);
    for (std::size_t k = 0; k < 3; ++k) z[7 + k] = c.mood[k] / mood_sd;
    return z;
}

const std::vector<std::pair<std::string, double>>& genders() {
    static const std::vector<std::pair<std::string, double>> g = {{"female", 0.52}, {"male", 0.45}, {"diverse", 0.03}};
    return g;
}

const std::vector<std::pair<std::string, double>>& nationalities() {
    static const std::vector<std::pair<std::string, double>> n = {
        {"DE", 0.55}, {"AT", 0.12}, {"CH", 0.08}, {"IT", 0.07}, {"US", 0.06}, {"other", 0.12}};
    return n;
}

const std::string& pick_weighted(Rng& rng, const std::vector<std::pair<std::string, double>>& options) {
    double u = rng.uniform();
    for (const auto& [name, p] : options) {
        if (u < p) return name;
        u -= p;
    }
    return options.back().first;
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

// Intense memories get more affective sentences and less filler.
std::string memory_text(const PadTriple& affect, Rng& rng) {
    const auto& bank = octant_phrases()[static_cast<std::size_t>(pad_octant(affect))];
    const double strength = affect.intensity() / std::sqrt(3.0);
    const int n_affect = 1 + static_cast<int>(std::lround(2.0 * strength));
    const int n_neutral = 3 - n_affect + static_cast<int>(rng.index(2));
    std::vector<std::string> sentences;
    std::vector<std::size_t> picks(bank.size());
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    rng.shuffle(picks);
    for (int k = 0; k < n_affect; ++k) sentences.push_back(bank[picks[static_cast<std::size_t>(k) % picks.size()]]);
    for (int k = 0; k < n_neutral; ++k) sentences.push_back(neutral_phrases()[rng.index(neutral_phrases().size())]);
    rng.shuffle(sentences);
    std::string text;
    for (const auto& s : sentences) {
        if (!text.empty()) text += ' ';
        text += capitalize(s) + '.';
    }
    return text;
}

PadTriple uniform_pad(Rng& rng, double range) {
    PadTriple t;
    t.p = rng.uniform(-range, range);
    t.a = rng.uniform(-range, range);
    t.d = rng.uniform(-range, range);
    return t;
}

json weights_to_json(const EffectWeights& w) {
    return {{"video", w.video},   {"memory", w.memory}, {"context", w.context},
            {"person", w.person}, {"noise", w.noise},   {"base", w.base}};
}

EffectWeights weights_from_json(const json& j, EffectWeights w) {
    auto read = [&](const char* key, double& field) {
        if (!j.contains(key)) return;
        if (!j.at(key).is_number()) throw InputError(std::string("synth spec: weight '") + key + "' must be a number");
        field = j.at(key).get<double>();
    };
    read("video", w.video);
    read("memory", w.memory);
    read("context", w.context);
    read("person", w.person);
    read("noise", w.noise);
    read("base", w.base);
    return w;
}

}  // namespace

int pad_octant(const PadTriple& t) { return (t.p >= 0.0 ? 4 : 0) | (t.a >= 0.0 ? 2 : 0) | (t.d >= 0.0 ? 1 : 0); }

const std::array<std::vector<std::string>, 8>& octant_phrases() {
    static const std::array<std::vector<std::string>, 8> bank = {{
        // 0: P- A- D-
        {"i was alone and lonely", "the funeral and the grief", "i miss her and i cry", "a sad and depressing breakup",
         "i was stuck and sad", "i felt lonely and depressed", "we lose and i cry"},
        // 1: P- A- D+
        {"a boring lecture", "the routine was dull and tedious", "a bland and mediocre day",
         "i was indifferent and unimpressed", "it was pointless and boring", "a tedious and dull lecture"},
        // 2: P- A+ D-
        {"i was scared and anxious", "the accident and the hospital", "i was nervous before the exam",
         "panic during the storm", "i felt helpless and terrified", "the surgery and my fear"},
        // 3: P- A+ D+
        {"a heated argument with my boss", "i was furious and angry", "we fight and yell", "i hate that rival",
         "a bitter quarrel", "rage and revenge after the cheat", "i was annoyed and angry"},
        // 4: P+ A- D-
        {"my grandmother would hold me", "a tender lullaby from my mother", "i felt safe and protected",
         "sleepy in bed with a blanket", "my cat would cuddle with me", "i was grateful for her gentle care"},
        // 5: P+ A- D+
        {"a peaceful day at the lake", "i read in the quiet garden", "relaxed and comfortable at home",
         "a cozy evening with wine", "i was content and calm", "a calm afternoon at the beach"},
        // 6: P+ A+ D-
        {"i was amazed by the firework", "a magical surprise", "i was speechless and fascinated",
         "the rollercoaster was astonishing", "we giggle and i was overwhelmed", "an amazing and magical show"},
        // 7: P+ A+ D+
        {"we won the championship", "we celebrate at the party", "a great concert with my team",
         "we dance all night", "i was so proud and excited", "the trip was an adventure",
         "the victory at the game"},
    }};
    return bank;
}

const std::vector<std::string>& neutral_phrases() {
    static const std::vector<std::string> filler = {
        "it was at night", "i remember that time", "we were in the room", "this video remind me of that day",
        "after school we come back", "on the road by car", "it was in the city", "we watch it on television"};
    return filler;
}

SynthSpec SynthSpec::planted() {
    SynthSpec s;
    // memory^2 = 6 * context^2 on pleasure
    s.weights[0] = EffectWeights{0.15, 0.08 * std::sqrt(6.0), 0.08, 0.10, 0.15, 0.10};
    s.weights[1] = EffectWeights{0.20, 0.08, 0.05, 0.10, 0.15, 0.15};
    s.weights[2] = EffectWeights{0.15, 0.08, 0.05, 0.10, 0.15, 0.00};
    return s;
}

SynthSpec SynthSpec::null_memory() {
    SynthSpec s = planted();
    for (auto& w : s.weights) w.memory = 0.0;
    return s;
}

void SynthSpec::validate() const {
    if (n_participants < 1) throw InputError("synth spec: n_participants must be positive");
    if (n_videos < 1) throw InputError("synth spec: n_videos must be positive");
    if (videos_per_participant < 1 || videos_per_participant > n_videos) {
        throw InputError("synth spec: videos_per_participant must be in [1, n_videos]");
    }
    if (!(memory_rate >= 0.0 && memory_rate <= 1.0)) throw InputError("synth spec: memory_rate must be in [0, 1]");
    if (!(multi_memory_rate >= 0.0 && multi_memory_rate <= 1.0)) {
        throw InputError("synth spec: multi_memory_rate must be in [0, 1]");
    }
    for (const auto& w : weights) {
        for (double v : {w.video, w.memory, w.context, w.person, w.noise, w.base}) {
            if (!std::isfinite(v)) throw InputError("synth spec: weights must be finite");
        }
        for (double v : {w.person, w.noise}) {
            if (v < 0.0) throw InputError("synth spec: person and noise weights are standard deviations");
        }
    }
    if (audio_dim < 1 || visual_dim < 1) throw InputError("synth spec: feature dims must be positive");
    if (frames_per_video < 1) throw InputError("synth spec: frames_per_video must be positive");
    if (!(av_noise >= 0.0) || !std::isfinite(av_noise)) throw InputError("synth spec: av_noise must be >= 0");
    if (decimals < 1 || decimals > 12) throw InputError("synth spec: decimals must be in [1, 12]");
}

SynthSpec synth_spec_from_json(const json& j) {
    if (!j.is_object()) throw InputError("synth spec: expected an object");
    const std::string preset = j.value("preset", std::string("planted"));
    SynthSpec s;
    if (preset == "planted") {
        s = SynthSpec::planted();
    } else if (preset == "null_memory") {
        s = SynthSpec::null_memory();
    } else {
        throw InputError("synth spec: unknown preset '" + preset + "' (expected planted or null_memory)");
    }
    try {
        s.n_participants = j.value("n_participants", s.n_participants);
        s.n_videos = j.value("n_videos", s.n_videos);
        s.videos_per_participant = j.value("videos_per_participant", s.videos_per_participant);
        s.memory_rate = j.value("memory_rate", s.memory_rate);
        s.multi_memory_rate = j.value("multi_memory_rate", s.multi_memory_rate);
        s.audio_dim = j.value("audio_dim", s.audio_dim);
        s.visual_dim = j.value("visual_dim", s.visual_dim);
        s.frames_per_video = j.value("frames_per_video", s.frames_per_video);
        s.av_noise = j.value("av_noise", s.av_noise);
        s.decimals = j.value("decimals", s.decimals);
        s.seed = j.value("seed", s.seed);
        if (j.contains("weights")) {
            const json& w = j.at("weights");
            for (std::size_t d = 0; d < 3; ++d) {
                if (w.contains(kPadNames[d])) s.weights[d] = weights_from_json(w.at(kPadNames[d]), s.weights[d]);
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

json synth_spec_to_json(const SynthSpec& s) {
    json w = json::object();
    for (std::size_t d = 0; d < 3; ++d) w[kPadNames[d]] = weights_to_json(s.weights[d]);
    return {{"n_participants", s.n_participants},
            {"n_videos", s.n_videos},
            {"videos_per_participant", s.videos_per_participant},
            {"memory_rate", s.memory_rate},
            {"multi_memory_rate", s.multi_memory_rate},
            {"weights", w},
            {"audio_dim", s.audio_dim},
            {"visual_dim", s.visual_dim},
            {"frames_per_video", s.frames_per_video},
            {"av_noise", s.av_noise},
            {"decimals", s.decimals},
            {"seed", s.seed}};
}

std::map<std::string, VideoAv> SynthOutput::video_av() const {
    std::map<std::string, VideoAv> out;
    for (const auto& [video, a] : audio) out.emplace(video, VideoAv{a.vector, pool_frames(frames.at(video))});
    return out;
}

SynthOutput generate(const SynthSpec& spec) {
    spec.validate();
    const int dec = spec.decimals;
    SynthOutput out;

    // independent streams per component
    Rng video_rng(derive_seed(spec.seed, "videos"));
    Rng people_rng(derive_seed(spec.seed, "participants"));
    Rng assign_rng(derive_seed(spec.seed, "assignment"));
    Rng response_rng(derive_seed(spec.seed, "responses"));
    Rng text_rng(derive_seed(spec.seed, "memory-text"));
    Rng av_rng(derive_seed(spec.seed, "av-features"));

    std::vector<std::string> videos;
    std::vector<std::array<double, 3>> latent;
    for (int v = 0; v < spec.n_videos; ++v) {
        videos.push_back(padded_id('v', v, spec.n_videos));
        latent.push_back({video_rng.normal(), video_rng.normal(), video_rng.normal()});
    }

    // signs of the context projection per dimension
    std::array<std::array<double, kContextVars>, 3> ctx_sign{};
    for (auto& row : ctx_sign) {
        for (double& s : row) s = video_rng.bernoulli(0.5) ? 1.0 : -1.0;
    }

    std::vector<int> counts(static_cast<std::size_t>(spec.n_videos), 0);
    std::vector<ViewerResponse> responses;
    std::size_t clipped = 0;
    std::size_t with_memory = 0;
    for (int p = 0; p < spec.n_participants; ++p) {
        ViewerContext ctx;
        ctx.age = kAgeMin + static_cast<int>(people_rng.index(kAgeMax - kAgeMin + 1));
        ctx.gender = pick_weighted(people_rng, genders());
        ctx.nationality = pick_weighted(people_rng, nationalities());
        for (double& h : ctx.hexaco) h = round_to(people_rng.uniform(1.0, 5.0), dec);
        ctx.mood = uniform_pad(people_rng, kMoodRange);
        for (std::size_t k = 0; k < 3; ++k) ctx.mood[k] = round_to(ctx.mood[k], dec);
        std::array<double, 3> person{};
        for (std::size_t d = 0; d < 3; ++d) person[d] = spec.weights[d].person * people_rng.normal();
        const auto z = standardized_context(ctx);
        const std::string pid = padded_id('p', p, spec.n_participants);

        // least-watched videos first, ties in random order
        std::vector<int> order(static_cast<std::size_t>(spec.n_videos));
        std::iota(order.begin(), order.end(), 0);
        assign_rng.shuffle(order);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return counts[static_cast<std::size_t>(a)] < counts[static_cast<std::size_t>(b)];
        });
        order.resize(static_cast<std::size_t>(spec.videos_per_participant));
        std::sort(order.begin(), order.end());

        for (int v : order) {
            ++counts[static_cast<std::size_t>(v)];
            ViewerResponse r;
            r.participant_id = pid;
            r.video_id = videos[static_cast<std::size_t>(v)];
            r.context = ctx;
            if (response_rng.bernoulli(spec.memory_rate)) {
                ++with_memory;
                const int n_mem = response_rng.bernoulli(spec.multi_memory_rate) ? 2 : 1;
                for (int k = 0; k < n_mem; ++k) {
                    MemoryRecord m;
                    m.affect = uniform_pad(response_rng, 1.0);
                    for (std::size_t d = 0; d < 3; ++d) m.affect[d] = round_to(m.affect[d], dec);
                    m.text = memory_text(m.affect, text_rng);
                    r.memories.push_back(std::move(m));
                }
            }
            for (std::size_t d = 0; d < 3; ++d) {
                const EffectWeights& w = spec.weights[d];
                double ctx_proj = 0.0;
                for (int k = 0; k < kContextVars; ++k) ctx_proj += ctx_sign[d][static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(k)];
                ctx_proj /= std::sqrt(static_cast<double>(kContextVars));
                double y = w.base + w.video * latent[static_cast<std::size_t>(v)][d] + w.context * ctx_proj + person[d] +
                           w.noise * response_rng.normal();
                if (!r.memories.empty()) y += w.memory * std::sqrt(3.0) * select_memory(r.memories).affect[d];
                if (y < -1.0 || y > 1.0) ++clipped;
                r.induced[d] = round_to(std::clamp(y, -1.0, 1.0), dec);
            }
            responses.push_back(std::move(r));
        }
    }
    out.dataset = Dataset(std::move(responses));

    // AV descriptors: the three video latents mapped through fixed random
    // loadings, plus per-video (audio) or per-frame (visual) noise
    auto loadings = [&](std::size_t dim) {
        std::vector<std::array<double, 3>> a(dim);
        for (auto& row : a) {
            for (double& x : row) x = av_rng.normal();
        }
        return a;
    };
    const auto audio_load = loadings(spec.audio_dim);
    const auto visual_load = loadings(spec.visual_dim);
    for (std::size_t v = 0; v < videos.size(); ++v) {
        AudioFeatures a{videos[v], std::vector<double>(spec.audio_dim)};
        for (std::size_t k = 0; k < spec.audio_dim; ++k) {
            double x = spec.av_noise * av_rng.normal();
            for (std::size_t d = 0; d < 3; ++d) x += audio_load[k][d] * latent[v][d];
            a.vector[k] = round_to(x, dec);
        }
        FrameFeatures f{videos[v], {}};
        for (int t = 0; t < spec.frames_per_video; ++t) {
            std::vector<double> frame(spec.visual_dim);
            for (std::size_t k = 0; k < spec.visual_dim; ++k) {
                double x = spec.av_noise * av_rng.normal();
                for (std::size_t d = 0; d < 3; ++d) x += visual_load[k][d] * latent[v][d];
                frame[k] = round_to(x, dec);
            }
            f.frames.push_back(std::move(frame));
        }
        out.audio.emplace(videos[v], std::move(a));
        out.frames.emplace(videos[v], std::move(f));
    }

    const std::size_t n = out.dataset.size();
    json gt;
    gt["kind"] = "synth_ground_truth";
    gt["format_version"] = 1;
    gt["spec"] = synth_spec_to_json(spec);
    gt["n_responses"] = n;
    gt["n_with_memory"] = with_memory;
    gt["clipping_rate"] = n == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(3 * n);
    json lat = json::object();
    for (std::size_t v = 0; v < videos.size(); ++v) lat[videos[v]] = latent[v];
    gt["video_latent"] = lat;
    json signs = json::object();
    json shares = json::object();
    for (std::size_t d = 0; d < 3; ++d) {
        signs[kPadNames[d]] = ctx_sign[d];
        const auto& w = spec.weights[d];
        // variance shares among responses with a memory, before clipping
        const double total = w.video * w.video + w.memory * w.memory + w.context * w.context + w.person * w.person +
                             w.noise * w.noise;
        shares[kPadNames[d]] = {{"video", total > 0 ? w.video * w.video / total : 0.0},
                                {"memory", total > 0 ? w.memory * w.memory / total : 0.0},
                                {"context", total > 0 ? w.context * w.context / total : 0.0}};
    }
    gt["context_signs"] = signs;
    gt["context_variables"] = {"age", "hexaco_h", "hexaco_e", "hexaco_x", "hexaco_a", "hexaco_c", "hexaco_o",
                               "mood_P", "mood_A", "mood_D"};
    gt["variance_shares"] = shares;
    out.ground_truth = std::move(gt);
    return out;
}

void write_synth_output(const std::filesystem::path& dir, const SynthOutput& out, int decimals) {
    save_dataset(out.dataset, dir / "dataset.json");
    std::map<std::string, AvPaths> manifest;
    for (const auto& [video, a] : out.audio) {
        const std::string audio_name = video + "_audio.csv";
        const std::string frames_name = video + "_frames.csv";
        write_audio_features(dir / "av" / audio_name, a, decimals);
        write_frame_features(dir / "av" / frames_name, out.frames.at(video), decimals);
        manifest.emplace(video, AvPaths{audio_name, frames_name});
    }
    write_av_manifest(dir / "av" / "manifest.json", manifest);
    write_text_file(dir / "ground_truth.json", out.ground_truth.dump(1) + "\n");
}

}  // namespace memfuse
