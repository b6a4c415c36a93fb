#include "treealign/synthetic.hpp"

#include <cmath>
#include <random>

#include "treealign/errors.hpp"

namespace treealign {

namespace {

void validate_spec(const SyntheticSpec& spec) {
    if (spec.branching.empty()) {
        throw ContractViolation("synthetic spec: depth must be at least 1");
    }
    for (int b : spec.branching) {
        if (b < 1) throw ContractViolation("synthetic spec: branching factors must be >= 1");
    }
    if (spec.dim < 1) throw ContractViolation("synthetic spec: dim must be >= 1");
    if (spec.samples_per_leaf < 1) {
        throw ContractViolation("synthetic spec: samples_per_leaf must be >= 1");
    }
    if (spec.separation <= 0.0 || !std::isfinite(spec.separation)) {
        throw ContractViolation("synthetic spec: separation must be positive");
    }
    if (spec.noise < 0.0 || !std::isfinite(spec.noise)) {
        throw ContractViolation("synthetic spec: noise must be non-negative");
    }
}

std::vector<int> default_layer_ids(int depth) {
    // Mirrors the backbone metadata convention: intermediate layers
    // starting at 4, final layer 11.
    std::vector<int> ids(static_cast<std::size_t>(depth));
    if (depth == 1) {
        ids[0] = 11;
        return ids;
    }
    for (int j = 0; j < depth; ++j) {
        ids[static_cast<std::size_t>(j)] = 4 + (j * 7) / (depth - 1);
    }
    return ids;
}

std::string level_label(int level, int index) {
    return std::string(1, static_cast<char>('a' + level)) + std::to_string(index);
}

} // namespace

Dataset synthesize_dataset(const SyntheticSpec& spec) {
    validate_spec(spec);
    const int h = spec.depth();
    const int d = spec.dim;

    std::mt19937_64 gen(spec.seed);
    std::normal_distribution<double> randn(0.0, 1.0);
    auto draw = [&](int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = randn(gen);
        return v;
    };

    // Prototypes level by level: child = parent + decaying perturbation.
    // node index within level = parent_index * branching + child slot.
    std::vector<std::vector<Eigen::VectorXd>> prototypes(static_cast<std::size_t>(h));
    int level_count = 1;
    for (int lev = 0; lev < h; ++lev) {
        const int b = spec.branching[static_cast<std::size_t>(lev)];
        level_count *= b;
        const double scale = spec.separation * std::pow(0.6, lev);
        auto& protos = prototypes[static_cast<std::size_t>(lev)];
        protos.reserve(static_cast<std::size_t>(level_count));
        for (int i = 0; i < level_count; ++i) {
            Eigen::VectorXd parent = lev == 0
                ? Eigen::VectorXd::Zero(d)
                : prototypes[static_cast<std::size_t>(lev - 1)]
                            [static_cast<std::size_t>(i / b)];
            protos.push_back(parent + scale * draw(d));
        }
    }

    const int leaf_count = level_count;
    const std::vector<int> layer_ids = default_layer_ids(h);

    Dataset data;
    data.depth = h;
    data.dim = d;
    data.samples.reserve(static_cast<std::size_t>(leaf_count * spec.samples_per_leaf));

    for (int leaf = 0; leaf < leaf_count; ++leaf) {
        // Ancestor index at each level for this leaf.
        std::vector<int> path(static_cast<std::size_t>(h));
        int idx = leaf;
        for (int lev = h - 1; lev >= 0; --lev) {
            path[static_cast<std::size_t>(lev)] = idx;
            idx /= spec.branching[static_cast<std::size_t>(lev)];
        }

        Eigen::MatrixXd text(h, d);
        std::vector<std::string> labels(static_cast<std::size_t>(h));
        for (int lev = 0; lev < h; ++lev) {
            text.row(lev) = prototypes[static_cast<std::size_t>(lev)]
                                      [static_cast<std::size_t>(path[static_cast<std::size_t>(lev)])]
                                .transpose();
            labels[static_cast<std::size_t>(lev)] =
                level_label(lev, path[static_cast<std::size_t>(lev)]);
        }

        for (int s = 0; s < spec.samples_per_leaf; ++s) {
            Eigen::MatrixXd tokens(h, d);
            for (int lev = 0; lev < h; ++lev) {
                tokens.row(lev) = text.row(lev) + spec.noise * draw(d).transpose();
            }
            data.samples.push_back({TokenStack{std::move(tokens), layer_ids},
                                    TextTree{text}, labels});
        }
    }
    return data;
}

} // namespace treealign
