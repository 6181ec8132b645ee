#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "memfuse/model.hpp"
#include "memfuse/seeds.hpp"

namespace testing {

// Fresh directory under the build tree, wiped on creation.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::path(MEMFUSE_TEST_SCRATCH) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline memfuse::ViewerContext plain_context(int age = 30) {
    memfuse::ViewerContext c;
    c.age = age;
    c.gender = "female";
    c.nationality = "DE";
    c.hexaco = {3, 3, 3, 3, 3, 3};
    return c;
}

inline memfuse::ViewerResponse response(std::string p, std::string v, memfuse::PadTriple induced,
                                        std::vector<memfuse::MemoryRecord> memories = {}) {
    memfuse::ViewerResponse r;
    r.participant_id = std::move(p);
    r.video_id = std::move(v);
    r.induced = induced;
    r.memories = std::move(memories);
    r.context = plain_context();
    return r;
}

}  // namespace testing
