#pragma once

#include <cstdint>
#include <vector>

#include "rns/corpus.hpp"

namespace rns {

/// Planted-pattern generator: items are partitioned into groups, each group
/// has a deterministic successor group (group_hop steps around the cycle; 0
/// keeps the group), and every user's sequence follows the chain with
/// probability pattern_strength, otherwise jumps to a uniform random item.
/// Within the chosen group, items rotate through a shared counter so the
/// catalog gets covered. Reviews are synthesized from a per-group vocabulary,
/// so documents carry the group signal.
struct SyntheticOptions {
    int users = 20;
    int items = 125;
    int history_len = 3;  // L; only bounds the items >= 2*users*L precondition
    double pattern_strength = 0.9;
    std::uint64_t seed = 1;
    int seq_len = 24;    // interactions per user
    int group_size = 5;  // items per group
    int group_hop = 0;   // successor group distance around the cycle
    int words_per_group = 8;
    int words_per_review = 8;
};

std::vector<Interaction> generate_synthetic(const SyntheticOptions& options);

/// Convenience overload with the remaining knobs at their defaults.
std::vector<Interaction> generate_synthetic(int users, int items, int history_len,
                                            double pattern_strength, std::uint64_t seed);

/// Group of an item's external id under the generator's layout, for tests
/// that verify the planted transition structure.
int synthetic_group_of(const std::string& item_name, const SyntheticOptions& options);

}  // namespace rns
