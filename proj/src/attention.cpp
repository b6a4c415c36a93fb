#include "treealign/attention.hpp"

#include <cmath>
#include <random>

namespace treealign {

namespace {

void check_inputs(const TextTree& text, const TokenStack& stack,
                  const AttentionParams& params) {
    const Eigen::Index d = params.wq.rows();
    if (params.wq.cols() != d || params.wk.rows() != d || params.wk.cols() != d ||
        params.wv.rows() != d || params.wv.cols() != d) {
        throw ContractViolation("attention: projections must be square and equal-sized");
    }
    if (text.features.cols() != d || stack.tokens.cols() != d) {
        throw ContractViolation("attention: feature dimension mismatch");
    }
    if (text.features.rows() < 1 || stack.tokens.rows() < 1) {
        throw ContractViolation("attention: empty queries or tokens");
    }
    if (!text.features.allFinite() || !stack.tokens.allFinite()) {
        throw ContractViolation("attention: non-finite inputs");
    }
}

/// Numerically stable row-wise softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        Eigen::ArrayXd e = (logits.row(i).array() - m).exp();
        out.row(i) = (e / e.sum()).matrix();
    }
    return out;
}

} // namespace

AttentionParams init_attention(int d, std::uint64_t seed, double scale) {
    if (d <= 0) throw ContractViolation("init_attention: dimension must be positive");
    if (!(scale > 0.0)) throw ContractViolation("init_attention: scale must be positive");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, scale);
    AttentionParams params;
    params.seed = seed;
    for (Eigen::MatrixXd* m : {&params.wq, &params.wk, &params.wv}) {
        m->resize(d, d);
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index c = 0; c < d; ++c) (*m)(r, c) = dist(gen);
        }
    }
    return params;
}

FeatureTree cross_attention_extract(const TextTree& text, const TokenStack& stack,
                                    const AttentionParams& params) {
    check_inputs(text, stack, params);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(params.dim()));
    const Eigen::MatrixXd q = text.features * params.wq;
    const Eigen::MatrixXd k = stack.tokens * params.wk;
    const Eigen::MatrixXd v = stack.tokens * params.wv;
    const Eigen::MatrixXd attn = softmax_rows(q * k.transpose() * inv_sqrt_d);
    return {attn * v, Modality::visual};
}

AttentionGrads cross_attention_backward(const TextTree& text, const TokenStack& stack,
                                        const AttentionParams& params,
                                        const Eigen::MatrixXd& d_output) {
    check_inputs(text, stack, params);
    if (d_output.rows() != text.features.rows() || d_output.cols() != params.dim()) {
        throw ContractViolation("attention backward: output gradient shape mismatch");
    }
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(params.dim()));
    const Eigen::MatrixXd q = text.features * params.wq;
    const Eigen::MatrixXd k = stack.tokens * params.wk;
    const Eigen::MatrixXd v = stack.tokens * params.wv;
    const Eigen::MatrixXd attn = softmax_rows(q * k.transpose() * inv_sqrt_d);

    const Eigen::MatrixXd d_v = attn.transpose() * d_output;
    const Eigen::MatrixXd d_attn = d_output * v.transpose();

    // softmax backward per row: dS_ij = P_ij (dP_ij - sum_k P_ik dP_ik)
    Eigen::MatrixXd d_scores(attn.rows(), attn.cols());
    for (Eigen::Index i = 0; i < attn.rows(); ++i) {
        const double rowdot = attn.row(i).dot(d_attn.row(i));
        d_scores.row(i) =
            attn.row(i).cwiseProduct(d_attn.row(i).array().matrix() -
                                     Eigen::RowVectorXd::Constant(attn.cols(), rowdot));
    }
    d_scores *= inv_sqrt_d;

    const Eigen::MatrixXd d_q = d_scores * k;
    const Eigen::MatrixXd d_k = d_scores.transpose() * q;

    AttentionGrads g;
    g.d_wq = text.features.transpose() * d_q;
    g.d_wk = stack.tokens.transpose() * d_k;
    g.d_wv = stack.tokens.transpose() * d_v;
    g.d_text = d_q * params.wq.transpose();
    g.d_tokens = d_k * params.wk.transpose() + d_v * params.wv.transpose();
    return g;
}

} // namespace treealign
