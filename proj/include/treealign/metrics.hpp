#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "treealign/taxonomy.hpp"

namespace treealign {

/// One evaluated sample: ground-truth leaf plus per-node scores from
/// which the argmax over any candidate set is computed.
struct PredictionRecord {
    std::string truth_leaf;
    std::map<std::string, double> scores;
};

using PredictionTable = std::vector<PredictionRecord>;

/// Argmax over the candidate set with deterministic tie-breaking (the
/// lexicographically lowest identifier wins). Every candidate must have
/// a score.
std::string predict(const PredictionRecord& record,
                    const std::vector<std::string>& candidates);

/// Fraction of samples whose argmax over the leaf set is the true leaf.
double leaf_accuracy(const Taxonomy& tax, const PredictionTable& preds);

/// Fraction of samples correct at the leaf AND at every ancestor
/// decision, where the decision at ancestor n is the argmax over the
/// children of n and must land on the ground-truth path. Never exceeds
/// leaf accuracy.
double hierarchical_consistent_accuracy(const Taxonomy& tax, const PredictionTable& preds);

/// Antichain of nodes covering every leaf exactly once.
struct Treecut {
    std::vector<std::string> frontier; // sorted
};

/// Samples treecuts by recursive coin-flip expansion from the root: each
/// internal node independently expands with probability 1/2, leaves
/// always terminate. Cuts may repeat (sampling with replacement).
std::vector<Treecut> sample_treecuts(const Taxonomy& tax, int count, std::uint64_t seed);

/// All treecuts via the product construction
/// cuts(node) = {node} + combinations of the children's cuts; guarded by
/// an incremental count against combinatorial blowup.
std::vector<Treecut> enumerate_treecuts(const Taxonomy& tax, std::size_t limit = 10000);

/// Number of treecuts without materializing them; saturates at limit+1.
std::size_t count_treecuts(const Taxonomy& tax, std::size_t limit = 10000);

/// Accuracy over one cut: prediction is the argmax over the frontier,
/// truth is the unique frontier node on the sample's root-to-leaf path.
double treecut_accuracy(const Taxonomy& tax, const PredictionTable& preds,
                        const Treecut& cut);

double mean_treecut_accuracy(const Taxonomy& tax, const PredictionTable& preds,
                             const std::vector<Treecut>& cuts);

struct HarmonicMean {
    double value;
    bool degenerate; // both inputs were zero
};

HarmonicMean harmonic_mean(double base, double novel);

struct MetricReport {
    double la = 0.0;
    double hca = 0.0;
    double mta = 0.0;
    int num_treecuts = 0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

/// LA, HCA and MTA with freshly sampled treecuts.
MetricReport evaluate(const Taxonomy& tax, const PredictionTable& preds,
                      int treecut_count, std::uint64_t seed);

} // namespace treealign
