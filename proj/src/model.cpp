#include "memfuse/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "memfuse/error.hpp"
#include "memfuse/csv.hpp"

namespace memfuse {

using nlohmann::json;

double PadTriple::intensity() const { return std::sqrt(p * p + a * a + d * d); }

bool PadTriple::in_range() const {
    for (std::size_t i = 0; i < 3; ++i) {
        const double v = (*this)[i];
        if (!std::isfinite(v) || v < -1.0 || v > 1.0) return false;
    }
    return true;
}

Dataset::Dataset(std::vector<ViewerResponse> responses) : responses_(std::move(responses)) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : responses_) {
        if (!seen.emplace(r.participant_id, r.video_id).second) {
            throw InputError("duplicate response for participant '" + r.participant_id + "' and video '" +
                             r.video_id + "'");
        }
        videos_.insert(r.video_id);
        participants_.insert(r.participant_id);
    }
}

const MemoryRecord& select_memory(const std::vector<MemoryRecord>& memories) {
    if (memories.empty()) throw std::invalid_argument("no memories");
    std::size_t best = 0;
    double best_intensity = memories[0].affect.intensity();
    for (std::size_t i = 1; i < memories.size(); ++i) {
        const double v = memories[i].affect.intensity();
        if (v > best_intensity) {
            best = i;
            best_intensity = v;
        }
    }
    return memories[best];
}

Dataset memory_subset(const Dataset& ds) {
    std::vector<ViewerResponse> kept;
    for (const auto& r : ds.responses()) {
        if (r.memories.empty()) continue;
        ViewerResponse reduced = r;
        reduced.memories = {select_memory(r.memories)};
        kept.push_back(std::move(reduced));
    }
    return Dataset(std::move(kept));
}

std::size_t count_words(const std::string& text) {
    std::istringstream in(text);
    std::string w;
    std::size_t n = 0;
    while (in >> w) ++n;
    return n;
}

namespace {

double finite_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw InputError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw InputError(where + ": non-finite value");
    return v;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_string()) {
        throw InputError(where + ": missing or non-string field '" + key + "'");
    }
    return obj.at(key).get<std::string>();
}

PadTriple pad_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw InputError(where + ": expected an object with p, a, d");
    PadTriple t;
    const char* keys[3] = {"p", "a", "d"};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!j.contains(keys[i])) throw InputError(where + ": missing '" + keys[i] + "'");
        const double v = finite_number(j.at(keys[i]), where + "." + keys[i]);
        if (v < -1.0 || v > 1.0) {
            std::ostringstream msg;
            msg << where << "." << keys[i] << " = " << v << " outside [-1, 1]";
            throw InputError(msg.str());
        }
        t[i] = v;
    }
    return t;
}

ViewerContext context_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw InputError(where + ": expected an object");
    ViewerContext c;
    if (!j.contains("age") || !j.at("age").is_number_integer()) {
        throw InputError(where + ": 'age' must be an integer");
    }
    c.age = j.at("age").get<int>();
    c.gender = string_field(j, "gender", where);
    c.nationality = string_field(j, "nationality", where);
    if (!j.contains("hexaco") || !j.at("hexaco").is_array() || j.at("hexaco").size() != 6) {
        throw InputError(where + ": 'hexaco' must be an array of 6 numbers");
    }
    for (std::size_t i = 0; i < 6; ++i) {
        c.hexaco[i] = finite_number(j.at("hexaco").at(i), where + ".hexaco[" + std::to_string(i) + "]");
    }
    if (!j.contains("mood")) throw InputError(where + ": missing 'mood'");
    c.mood = pad_from_json(j.at("mood"), where + ".mood");
    return c;
}

}  // namespace

DatasetLoad dataset_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("responses") || !doc.at("responses").is_array()) {
        throw InputError("dataset: top-level object must contain a 'responses' array");
    }
    DatasetLoad out;
    std::vector<ViewerResponse> responses;
    const auto& arr = doc.at("responses");
    responses.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& r = arr[i];
        std::string where = "responses[" + std::to_string(i) + "]";
        if (!r.is_object()) throw InputError(where + ": expected an object");
        ViewerResponse resp;
        resp.participant_id = string_field(r, "participant_id", where);
        resp.video_id = string_field(r, "video_id", where);
        where += " (participant " + resp.participant_id + ", video " + resp.video_id + ")";
        if (!r.contains("induced")) throw InputError(where + ": missing 'induced'");
        resp.induced = pad_from_json(r.at("induced"), where + ".induced");
        if (r.contains("memories")) {
            const json& mems = r.at("memories");
            if (!mems.is_array()) throw InputError(where + ": 'memories' must be an array");
            for (std::size_t m = 0; m < mems.size(); ++m) {
                const std::string mw = where + ".memories[" + std::to_string(m) + "]";
                MemoryRecord rec;
                rec.text = string_field(mems[m], "text", mw);
                if (!mems[m].contains("affect")) throw InputError(mw + ": missing 'affect'");
                rec.affect = pad_from_json(mems[m].at("affect"), mw + ".affect");
                if (count_words(rec.text) < 3) {
                    out.warnings.push_back(mw + ": memory description shorter than three words");
                }
                resp.memories.push_back(std::move(rec));
            }
        }
        if (!r.contains("context")) throw InputError(where + ": missing 'context'");
        resp.context = context_from_json(r.at("context"), where + ".context");
        responses.push_back(std::move(resp));
    }
    out.dataset = Dataset(std::move(responses));
    return out;
}

DatasetLoad load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw InputError("dataset " + path.string() + ": " + e.what());
    }
    return dataset_from_json(doc);
}

json pad_to_json(const PadTriple& t) { return json{{"p", t.p}, {"a", t.a}, {"d", t.d}}; }

json dataset_to_json(const Dataset& ds) {
    json arr = json::array();
    for (const auto& r : ds.responses()) {
        json mems = json::array();
        for (const auto& m : r.memories) mems.push_back(json{{"text", m.text}, {"affect", pad_to_json(m.affect)}});
        json ctx{{"age", r.context.age},
                 {"gender", r.context.gender},
                 {"nationality", r.context.nationality},
                 {"hexaco", r.context.hexaco},
                 {"mood", pad_to_json(r.context.mood)}};
        arr.push_back(json{{"participant_id", r.participant_id},
                           {"video_id", r.video_id},
                           {"induced", pad_to_json(r.induced)},
                           {"memories", std::move(mems)},
                           {"context", std::move(ctx)}});
    }
    return json{{"responses", std::move(arr)}};
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    write_text_file(path, dataset_to_json(ds).dump(1) + "\n");
}

}  // namespace memfuse
