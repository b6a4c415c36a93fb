#include "treealign/taxonomy.hpp"

#include <algorithm>
#include <random>

namespace treealign {

Taxonomy Taxonomy::from_annotations(const std::vector<std::vector<std::string>>& tuples) {
    if (tuples.empty()) throw ContractViolation("build_taxonomy: no annotations");
    const std::size_t depth = tuples.front().size();
    if (depth == 0) throw ContractViolation("build_taxonomy: empty label tuples");

    std::map<std::string, std::string> parent;
    std::map<std::string, std::string> display;
    for (const auto& tuple : tuples) {
        if (tuple.size() != depth) {
            throw ContractViolation("build_taxonomy: ragged label tuples");
        }
        std::string prefix;
        for (const std::string& label : tuple) {
            if (label.empty()) {
                throw ContractViolation("build_taxonomy: empty label");
            }
            const std::string parent_id = prefix;
            prefix += label;
            auto [it, inserted] = display.emplace(prefix, label);
            if (!inserted && it->second != label) {
                throw ContractViolation(
                    "build_taxonomy: ambiguous concatenated identifier '" + prefix + "'");
            }
            auto [pit, pinserted] = parent.emplace(prefix, parent_id);
            if (!pinserted && pit->second != parent_id) {
                throw ContractViolation(
                    "build_taxonomy: ambiguous concatenated identifier '" + prefix + "'");
            }
        }
    }
    display.emplace("", "root");
    return Taxonomy("", std::move(parent), std::move(display));
}

Taxonomy::Taxonomy(std::string root, std::map<std::string, std::string> parent,
                   std::map<std::string, std::string> display)
    : root_(std::move(root)), parent_(std::move(parent)), display_(std::move(display)) {
    index();
}

void Taxonomy::index() {
    if (parent_.count(root_)) {
        throw ContractViolation("taxonomy: root must not have a parent");
    }
    display_.emplace(root_, root_.empty() ? "root" : root_);
    for (const auto& [child, par] : parent_) {
        display_.emplace(child, child);
        if (par != root_ && !parent_.count(par)) {
            throw ContractViolation("taxonomy: dangling parent '" + par + "'");
        }
        children_[par].push_back(child);
    }
    for (auto& [id, kids] : children_) std::sort(kids.begin(), kids.end());

    // Depths via walk-up with cycle guard.
    depth_[root_] = 0;
    for (const auto& [child, unused] : parent_) {
        std::vector<std::string> chain;
        std::string cur = child;
        while (!depth_.count(cur)) {
            chain.push_back(cur);
            auto it = parent_.find(cur);
            if (it == parent_.end()) {
                throw ContractViolation("taxonomy: node '" + child + "' not connected to root");
            }
            cur = it->second;
            if (chain.size() > parent_.size() + 1) {
                throw ContractViolation("taxonomy: cycle detected");
            }
        }
        int d = depth_.at(cur);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth_[*it] = ++d;
    }

    for (const auto& [id, unused] : display_) {
        if (!children_.count(id)) leaves_.insert(id);
    }
    if (leaves_.count(root_) && !parent_.empty()) {
        throw ContractViolation("taxonomy: root marked leaf in non-trivial tree");
    }
}

const std::vector<std::string>& Taxonomy::children(const std::string& id) const {
    static const std::vector<std::string> kNone;
    auto it = children_.find(id);
    return it == children_.end() ? kNone : it->second;
}

const std::string& Taxonomy::parent(const std::string& id) const {
    auto it = parent_.find(id);
    if (it == parent_.end()) {
        throw ContractViolation("taxonomy: node '" + id + "' has no parent");
    }
    return it->second;
}

const std::string& Taxonomy::display(const std::string& id) const {
    auto it = display_.find(id);
    if (it == display_.end()) throw ContractViolation("taxonomy: unknown node '" + id + "'");
    return it->second;
}

bool Taxonomy::contains(const std::string& id) const { return display_.count(id) > 0; }

bool Taxonomy::is_leaf(const std::string& id) const { return leaves_.count(id) > 0; }

int Taxonomy::depth(const std::string& id) const {
    auto it = depth_.find(id);
    if (it == depth_.end()) throw ContractViolation("taxonomy: unknown node '" + id + "'");
    return it->second;
}

std::vector<std::string> Taxonomy::nodes() const {
    std::vector<std::string> out;
    out.reserve(display_.size());
    for (const auto& [id, unused] : display_) out.push_back(id);
    return out;
}

std::vector<std::string> Taxonomy::path_from_root(const std::string& id) const {
    if (!contains(id)) throw ContractViolation("taxonomy: unknown node '" + id + "'");
    std::vector<std::string> path;
    std::string cur = id;
    path.push_back(cur);
    while (cur != root_) {
        cur = parent(cur);
        path.push_back(cur);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::string> Taxonomy::display_path(const std::string& leaf) const {
    std::vector<std::string> out;
    for (const std::string& id : path_from_root(leaf)) {
        if (id == root_) continue;
        out.push_back(display(id));
    }
    return out;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& j) {
    std::map<std::string, std::string> display;
    for (const auto& [id, name] : j.at("nodes").items()) {
        display[id] = name.get<std::string>();
    }
    std::map<std::string, std::string> parent;
    for (const auto& edge : j.at("edges")) {
        parent[edge.at(1).get<std::string>()] = edge.at(0).get<std::string>();
    }
    return Taxonomy(j.at("root").get<std::string>(), std::move(parent), std::move(display));
}

nlohmann::json Taxonomy::to_json() const {
    nlohmann::json j;
    j["root"] = root_;
    nlohmann::json nodes = nlohmann::json::object();
    for (const auto& [id, name] : display_) nodes[id] = name;
    j["nodes"] = std::move(nodes);
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [child, par] : parent_) {
        edges.push_back(nlohmann::json::array({par, child}));
    }
    j["edges"] = std::move(edges);
    return j;
}

std::pair<Taxonomy, Taxonomy> base_novel_split(const Taxonomy& tax, std::uint64_t seed) {
    if (tax.leaves().size() < 2) {
        throw ContractViolation("base_novel_split: need at least 2 leaves");
    }
    std::vector<std::string> leaves(tax.leaves().begin(), tax.leaves().end());
    std::mt19937_64 gen(seed);
    std::shuffle(leaves.begin(), leaves.end(), gen);
    const std::size_t base_count = (leaves.size() + 1) / 2;

    auto subtree = [&](std::size_t begin, std::size_t end) {
        std::map<std::string, std::string> parent;
        std::map<std::string, std::string> display;
        display[tax.root()] = tax.display(tax.root());
        for (std::size_t i = begin; i < end; ++i) {
            const auto path = tax.path_from_root(leaves[i]);
            for (std::size_t k = 1; k < path.size(); ++k) {
                parent[path[k]] = path[k - 1];
                display[path[k]] = tax.display(path[k]);
            }
        }
        return Taxonomy(tax.root(), std::move(parent), std::move(display));
    };

    return {subtree(0, base_count), subtree(base_count, leaves.size())};
}

} // namespace treealign
