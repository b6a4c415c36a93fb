#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "treealign/errors.hpp"

namespace treealign {

/// Mapped intermediate-layer class tokens plus the final-layer token,
/// one row each. layer_ids records which backbone layers the rows came
/// from (metadata only at desk scale).
struct TokenStack {
    Eigen::MatrixXd tokens; // (m+1) x d
    std::vector<int> layer_ids;
};

/// Per-level textual features, coarse to fine, one row per level.
struct TextTree {
    Eigen::MatrixXd features; // H x d
};

enum class Modality { text, visual };

/// Per-level features for one sample and one modality.
struct FeatureTree {
    Eigen::MatrixXd features; // H x d
    Modality modality;
};

/// Single-head query/key/value projections of the cross-attention
/// extractor.
struct AttentionParams {
    Eigen::MatrixXd wq, wk, wv; // each d x d
    std::uint64_t seed = 0;

    int dim() const { return static_cast<int>(wq.rows()); }
};

/// Deterministically initializes d x d projections with N(0, scale^2)
/// entries; identical seeds reproduce identical matrices bit-for-bit.
AttentionParams init_attention(int d, std::uint64_t seed, double scale = 0.02);

/// Hierarchical visual features: text rows as queries, token rows as
/// keys and values, softmax(Q K^T / sqrt(d)) V. Output is H x d.
FeatureTree cross_attention_extract(const TextTree& text, const TokenStack& stack,
                                    const AttentionParams& params);

struct AttentionGrads {
    Eigen::MatrixXd d_wq, d_wk, d_wv;
    Eigen::MatrixXd d_text;
    Eigen::MatrixXd d_tokens;
};

/// Backward pass of the extractor given the gradient of a scalar loss
/// w.r.t. the H x d output.
AttentionGrads cross_attention_backward(const TextTree& text, const TokenStack& stack,
                                        const AttentionParams& params,
                                        const Eigen::MatrixXd& d_output);

} // namespace treealign
