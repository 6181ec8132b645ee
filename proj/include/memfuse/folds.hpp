#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace memfuse {

// Participant-level fold assignment.
struct CvPlan {
    int k = 5;
    std::uint64_t seed = 0;
    std::map<std::string, int> fold_of;
    std::vector<std::vector<std::string>> folds;  // participants per fold, sorted
};

// Sorts participants, shuffles them with the seeded generator and deals them
// round-robin into k folds. Throws InputError when k < 2 or k exceeds the
// participant count.
CvPlan make_lpo_folds(const std::set<std::string>& participants, int k, std::uint64_t seed);

// Row indices into some table whose row r belongs to participant groups[r].
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// One split per fold. `rows` restricts the split to a subset of table rows
// (the inner loop splits an outer training set); empty means all rows.
std::vector<Split> plan_splits(const CvPlan& plan, std::span<const std::string> groups,
                               std::span<const std::size_t> rows = {});

// Distinct groups among the given rows.
std::set<std::string> groups_of(std::span<const std::string> groups, std::span<const std::size_t> rows);

// Throws std::logic_error if any participant occurs on both sides.
void assert_disjoint(const Split& split, std::span<const std::string> groups);

}  // namespace memfuse
