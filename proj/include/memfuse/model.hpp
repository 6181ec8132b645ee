#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace memfuse {

// Pleasure / arousal / dominance rating, each component in [-1, +1].
struct PadTriple {
    double p = 0.0;
    double a = 0.0;
    double d = 0.0;

    double operator[](std::size_t i) const { return i == 0 ? p : (i == 1 ? a : d); }
    double& operator[](std::size_t i) { return i == 0 ? p : (i == 1 ? a : d); }

    // Euclidean norm of (p, a, d); used as memory intensity.
    double intensity() const;
    bool in_range() const;

    friend bool operator==(const PadTriple&, const PadTriple&) = default;
};

inline constexpr std::array<const char*, 3> kPadNames = {"P", "A", "D"};

struct ViewerContext {
    int age = 0;
    std::string gender;
    std::string nationality;
    // Honesty-Humility, Emotionality, eXtraversion, Agreeableness,
    // Conscientiousness, Openness.
    std::array<double, 6> hexaco{};
    PadTriple mood;

    friend bool operator==(const ViewerContext&, const ViewerContext&) = default;
};

struct MemoryRecord {
    std::string text;
    PadTriple affect;

    friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

struct ViewerResponse {
    std::string participant_id;
    std::string video_id;
    PadTriple induced;
    std::vector<MemoryRecord> memories;
    ViewerContext context;

    friend bool operator==(const ViewerResponse&, const ViewerResponse&) = default;
};

// Immutable collection of responses. Construction validates that
// (participant_id, video_id) pairs are unique and derives the id sets.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<ViewerResponse> responses);

    const std::vector<ViewerResponse>& responses() const { return responses_; }
    const std::set<std::string>& videos() const { return videos_; }
    const std::set<std::string>& participants() const { return participants_; }
    std::size_t size() const { return responses_.size(); }
    bool empty() const { return responses_.empty(); }

    friend bool operator==(const Dataset& a, const Dataset& b) { return a.responses_ == b.responses_; }

private:
    std::vector<ViewerResponse> responses_;
    std::set<std::string> videos_;
    std::set<std::string> participants_;
};

// Record with the largest affect intensity; ties go to the earliest record.
// Throws std::invalid_argument("no memories") on an empty list.
const MemoryRecord& select_memory(const std::vector<MemoryRecord>& memories);

// Responses with at least one memory, each reduced to its most intense memory.
Dataset memory_subset(const Dataset& ds);

std::size_t count_words(const std::string& text);

struct DatasetLoad {
    Dataset dataset;
    std::vector<std::string> warnings;
};

DatasetLoad dataset_from_json(const nlohmann::json& doc);
DatasetLoad load_dataset(const std::filesystem::path& path);

nlohmann::json dataset_to_json(const Dataset& ds);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

nlohmann::json pad_to_json(const PadTriple& t);

}  // namespace memfuse
