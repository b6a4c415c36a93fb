#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "treealign/errors.hpp"

namespace treealign {

/// Rooted label tree. Node identifiers are strings; the root has the
/// empty identifier, and nodes built from annotations use the
/// concatenation of their level labels (disambiguating repeated names
/// across lineages). Immutable after construction.
class Taxonomy {
public:
    /// Builds the tree from per-sample label tuples: the leaf identifier
    /// concatenates all level labels, internal nodes group samples by
    /// prefix per level, and everything hangs off a single shared root.
    /// All tuples must have equal length.
    static Taxonomy from_annotations(const std::vector<std::vector<std::string>>& tuples);

    /// Direct construction from parent links. `display` may name a
    /// per-node label; missing entries default to the identifier.
    Taxonomy(std::string root, std::map<std::string, std::string> parent,
             std::map<std::string, std::string> display = {});

    const std::string& root() const { return root_; }
    const std::set<std::string>& leaves() const { return leaves_; }
    const std::vector<std::string>& children(const std::string& id) const;
    const std::string& parent(const std::string& id) const;
    const std::string& display(const std::string& id) const;
    bool contains(const std::string& id) const;
    bool is_leaf(const std::string& id) const;
    int depth(const std::string& id) const; // root has depth 0
    std::size_t node_count() const { return display_.size(); }
    std::vector<std::string> nodes() const; // sorted identifiers

    /// Nodes from the root to `id`, inclusive.
    std::vector<std::string> path_from_root(const std::string& id) const;
    /// Level labels along the path (excluding the root), which for trees
    /// built from annotations reproduces the original tuple.
    std::vector<std::string> display_path(const std::string& leaf) const;

    static Taxonomy from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    void index();

    std::string root_;
    std::map<std::string, std::string> parent_;
    std::map<std::string, std::string> display_;
    std::map<std::string, std::vector<std::string>> children_;
    std::map<std::string, int> depth_;
    std::set<std::string> leaves_;
};

/// Splits the leaves into equal halves (base keeps the extra leaf on odd
/// counts) and returns the base and novel subtrees as unions of
/// root-to-leaf paths. Deterministic under the seed.
std::pair<Taxonomy, Taxonomy> base_novel_split(const Taxonomy& tax, std::uint64_t seed);

} // namespace treealign
