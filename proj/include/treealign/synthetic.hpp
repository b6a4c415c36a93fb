#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treealign/attention.hpp"

namespace treealign {

/// Balanced taxonomy plus feature-geometry knobs for desk-scale data.
/// branching[i] is the child count of every node at depth i, so
/// {2, 2, 2} yields the 2-4-8 taxonomy.
struct SyntheticSpec {
    std::vector<int> branching{2, 2, 2};
    int dim = 64;
    double separation = 0.3;
    double noise = 0.05;
    int samples_per_leaf = 16;
    std::uint64_t seed = 0;

    int depth() const { return static_cast<int>(branching.size()); }
};

struct Sample {
    TokenStack stack;
    TextTree text;
    std::vector<std::string> labels; // per-level labels, coarse to fine
};

struct Dataset {
    std::vector<Sample> samples;
    int depth = 0;
    int dim = 0;
};

/// Hierarchically drawn class prototypes (child = parent + perturbation)
/// with per-level text features equal to the prototypes and token rows
/// carrying the level-j prototype signal plus noise: coarse information
/// in early rows, fine in the last. Fully deterministic given the seed.
Dataset synthesize_dataset(const SyntheticSpec& spec);

} // namespace treealign
