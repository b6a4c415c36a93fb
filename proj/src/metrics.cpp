#include "treealign/metrics.hpp"

#include <algorithm>
#include <random>

namespace treealign {

namespace {

double score_of(const PredictionRecord& record, const std::string& id) {
    auto it = record.scores.find(id);
    if (it == record.scores.end()) {
        throw ContractViolation("prediction record missing score for node '" + id + "'");
    }
    return it->second;
}

void check_preds(const Taxonomy& tax, const PredictionTable& preds) {
    if (preds.empty()) throw ContractViolation("metrics: empty prediction table");
    for (const auto& p : preds) {
        if (!tax.is_leaf(p.truth_leaf)) {
            throw ContractViolation("metrics: ground truth '" + p.truth_leaf +
                                    "' is not a leaf");
        }
    }
}

} // namespace

std::string predict(const PredictionRecord& record,
                    const std::vector<std::string>& candidates) {
    if (candidates.empty()) throw ContractViolation("predict: empty candidate set");
    const std::string* best = nullptr;
    double best_score = 0.0;
    for (const auto& id : candidates) {
        const double s = score_of(record, id);
        if (best == nullptr || s > best_score ||
            (s == best_score && id < *best)) {
            best = &id;
            best_score = s;
        }
    }
    return *best;
}

double leaf_accuracy(const Taxonomy& tax, const PredictionTable& preds) {
    check_preds(tax, preds);
    const std::vector<std::string> leaf_set(tax.leaves().begin(), tax.leaves().end());
    int correct = 0;
    for (const auto& p : preds) {
        if (predict(p, leaf_set) == p.truth_leaf) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double hierarchical_consistent_accuracy(const Taxonomy& tax, const PredictionTable& preds) {
    check_preds(tax, preds);
    const std::vector<std::string> leaf_set(tax.leaves().begin(), tax.leaves().end());
    int correct = 0;
    for (const auto& p : preds) {
        if (predict(p, leaf_set) != p.truth_leaf) continue;
        const auto path = tax.path_from_root(p.truth_leaf);
        bool consistent = true;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            // Decision at ancestor path[i]: argmax over its children must
            // be the next node on the ground-truth path.
            if (predict(p, tax.children(path[i])) != path[i + 1]) {
                consistent = false;
                break;
            }
        }
        if (consistent) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::vector<Treecut> sample_treecuts(const Taxonomy& tax, int count, std::uint64_t seed) {
    if (count <= 0) throw ContractViolation("sample_treecuts: count must be positive");
    std::mt19937_64 gen(seed);
    std::vector<Treecut> cuts;
    cuts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Treecut cut;
        std::vector<std::string> stack{tax.root()};
        while (!stack.empty()) {
            const std::string node = std::move(stack.back());
            stack.pop_back();
            const bool expand = !tax.is_leaf(node) && (gen() & 1ull) == 1ull;
            if (expand) {
                const auto& kids = tax.children(node);
                stack.insert(stack.end(), kids.rbegin(), kids.rend());
            } else {
                cut.frontier.push_back(node);
            }
        }
        std::sort(cut.frontier.begin(), cut.frontier.end());
        cuts.push_back(std::move(cut));
    }
    return cuts;
}

std::size_t count_treecuts(const Taxonomy& tax, std::size_t limit) {
    // cuts(leaf) = 1, cuts(node) = 1 + prod cuts(children), saturating at
    // limit + 1 to avoid overflow.
    const std::size_t cap = limit + 1;
    std::map<std::string, std::size_t> memo;
    auto count = [&](auto&& self, const std::string& node) -> std::size_t {
        auto it = memo.find(node);
        if (it != memo.end()) return it->second;
        std::size_t result = 1;
        if (!tax.is_leaf(node)) {
            std::size_t prod = 1;
            for (const auto& child : tax.children(node)) {
                const std::size_t c = self(self, child);
                if (prod > cap / c) {
                    prod = cap;
                    break;
                }
                prod = std::min(prod * c, cap);
            }
            result = std::min(prod + 1, cap);
        }
        memo[node] = result;
        return result;
    };
    return count(count, tax.root());
}

std::vector<Treecut> enumerate_treecuts(const Taxonomy& tax, std::size_t limit) {
    if (count_treecuts(tax, limit) > limit) {
        throw NumericError("enumerate_treecuts: more than " + std::to_string(limit) +
                           " treecuts");
    }
    auto cuts_of = [&](auto&& self, const std::string& node)
        -> std::vector<std::vector<std::string>> {
        std::vector<std::vector<std::string>> result;
        result.push_back({node});
        if (tax.is_leaf(node)) return result;
        std::vector<std::vector<std::string>> combos{{}};
        for (const auto& child : tax.children(node)) {
            const auto child_cuts = self(self, child);
            std::vector<std::vector<std::string>> next;
            next.reserve(combos.size() * child_cuts.size());
            for (const auto& combo : combos) {
                for (const auto& cc : child_cuts) {
                    auto merged = combo;
                    merged.insert(merged.end(), cc.begin(), cc.end());
                    next.push_back(std::move(merged));
                }
            }
            combos = std::move(next);
        }
        result.insert(result.end(), combos.begin(), combos.end());
        return result;
    };

    std::vector<Treecut> cuts;
    for (auto& frontier : cuts_of(cuts_of, tax.root())) {
        std::sort(frontier.begin(), frontier.end());
        cuts.push_back(Treecut{std::move(frontier)});
    }
    return cuts;
}

double treecut_accuracy(const Taxonomy& tax, const PredictionTable& preds,
                        const Treecut& cut) {
    check_preds(tax, preds);
    if (cut.frontier.empty()) throw ContractViolation("treecut_accuracy: empty frontier");
    const std::set<std::string> frontier(cut.frontier.begin(), cut.frontier.end());
    int correct = 0;
    for (const auto& p : preds) {
        const auto path = tax.path_from_root(p.truth_leaf);
        const std::string* truth = nullptr;
        for (const auto& node : path) {
            if (frontier.count(node)) {
                truth = &node;
                break;
            }
        }
        if (truth == nullptr) {
            throw ContractViolation("treecut_accuracy: frontier misses leaf '" +
                                    p.truth_leaf + "'");
        }
        if (predict(p, cut.frontier) == *truth) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double mean_treecut_accuracy(const Taxonomy& tax, const PredictionTable& preds,
                             const std::vector<Treecut>& cuts) {
    if (cuts.empty()) throw ContractViolation("mean_treecut_accuracy: no cuts");
    double sum = 0.0;
    for (const auto& cut : cuts) sum += treecut_accuracy(tax, preds, cut);
    return sum / static_cast<double>(cuts.size());
}

HarmonicMean harmonic_mean(double base, double novel) {
    if (base < 0.0 || novel < 0.0) {
        throw ContractViolation("harmonic_mean: inputs must be non-negative");
    }
    if (base == 0.0 && novel == 0.0) return {0.0, true};
    return {2.0 * base * novel / (base + novel), false};
}

nlohmann::json MetricReport::to_json() const {
    return {{"la", la},
            {"hca", hca},
            {"mta", mta},
            {"num_treecuts", num_treecuts},
            {"seed", seed}};
}

MetricReport evaluate(const Taxonomy& tax, const PredictionTable& preds,
                      int treecut_count, std::uint64_t seed) {
    MetricReport report;
    report.la = leaf_accuracy(tax, preds);
    report.hca = hierarchical_consistent_accuracy(tax, preds);
    const auto cuts = sample_treecuts(tax, treecut_count, seed);
    report.mta = mean_treecut_accuracy(tax, preds, cuts);
    report.num_treecuts = treecut_count;
    report.seed = seed;
    return report;
}

} // namespace treealign
