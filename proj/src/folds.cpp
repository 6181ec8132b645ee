#include "memfuse/folds.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "memfuse/error.hpp"
#include "memfuse/seeds.hpp"

namespace memfuse {

CvPlan make_lpo_folds(const std::set<std::string>& participants, int k, std::uint64_t seed) {
    if (k < 2) throw InputError("folds: k must be at least 2, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > participants.size()) {
        throw InputError("folds: k = " + std::to_string(k) + " exceeds the " + std::to_string(participants.size()) +
                         " participants");
    }
    std::vector<std::string> order(participants.begin(), participants.end());
    Rng rng(seed);
    rng.shuffle(order);

    CvPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.folds.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < order.size(); ++i) {
        const int f = static_cast<int>(i % static_cast<std::size_t>(k));
        plan.fold_of[order[i]] = f;
        plan.folds[static_cast<std::size_t>(f)].push_back(order[i]);
    }
    for (auto& f : plan.folds) std::sort(f.begin(), f.end());
    return plan;
}

std::vector<Split> plan_splits(const CvPlan& plan, std::span<const std::string> groups,
                               std::span<const std::size_t> rows) {
    std::vector<std::size_t> all;
    if (rows.empty()) {
        all.resize(groups.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        rows = all;
    }
    std::vector<Split> splits(static_cast<std::size_t>(plan.k));
    for (std::size_t r : rows) {
        const auto it = plan.fold_of.find(groups[r]);
        if (it == plan.fold_of.end()) {
            throw std::invalid_argument("plan_splits: participant '" + groups[r] + "' has no fold");
        }
        for (int f = 0; f < plan.k; ++f) {
            auto& s = splits[static_cast<std::size_t>(f)];
            (f == it->second ? s.test : s.train).push_back(r);
        }
    }
    return splits;
}

std::set<std::string> groups_of(std::span<const std::string> groups, std::span<const std::size_t> rows) {
    std::set<std::string> out;
    for (std::size_t r : rows) out.insert(groups[r]);
    return out;
}

void assert_disjoint(const Split& split, std::span<const std::string> groups) {
    const auto train = groups_of(groups, split.train);
    for (std::size_t r : split.test) {
        if (train.count(groups[r])) {
            throw std::logic_error("fold integrity violated: participant '" + groups[r] +
                                   "' is in both train and test");
        }
    }
}

}  // namespace memfuse
