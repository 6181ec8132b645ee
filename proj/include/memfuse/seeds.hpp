#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace memfuse {

// Child seeds are derived from a parent seed by fixed hashing (FNV-1a of the
// tag, mixed with SplitMix64), so every randomized component gets an
// independent stream that does not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

// Portable random source: the distribution algorithms are implemented here
// rather than taken from <random>, whose distributions are
// implementation-defined, so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    double normal();
    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace memfuse
