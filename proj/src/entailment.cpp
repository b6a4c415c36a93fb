#include "treealign/entailment.hpp"

#include <cmath>

namespace treealign {

namespace {

/// Gradient bundle of one cone violation w.r.t. the ambient coordinates
/// of both points and the shared curvature. Zero when the hinge is
/// inactive.
struct ConeViolationGrad {
    double loss = 0.0;
    bool active = false;
    Eigen::VectorXd d_child_space;
    double d_child_time = 0.0;
    Eigen::VectorXd d_parent_space;
    double d_parent_time = 0.0;
    double d_curvature = 0.0;
};

ConeViolationGrad cone_violation_grad(const LorentzPoint& child,
                                      const LorentzPoint& parent) {
    ConeViolationGrad g;
    g.d_child_space = Eigen::VectorXd::Zero(child.dim());
    g.d_parent_space = Eigen::VectorXd::Zero(parent.dim());

    const ExteriorAngleGrad angle = exterior_angle_grad(child, parent);
    const HalfApertureGrad aperture = half_aperture_grad(parent);
    const double margin = angle.value - aperture.value;
    if (margin <= 0.0) return g;

    g.loss = margin;
    g.active = true;
    g.d_child_space = angle.d_child_space;
    g.d_child_time = angle.d_child_time;
    g.d_parent_space = angle.d_parent_space - aperture.d_space;
    g.d_parent_time = angle.d_parent_time;
    g.d_curvature = angle.d_curvature - aperture.d_curvature;
    return g;
}

void check_tree(const std::vector<LorentzPoint>& tree, const char* what) {
    if (tree.empty()) throw ContractViolation(std::string(what) + ": empty tree");
    for (std::size_t i = 1; i < tree.size(); ++i) {
        if (tree[i].curvature.value() != tree[0].curvature.value()) {
            throw ContractViolation(std::string(what) +
                                    ": levels on different curvatures");
        }
    }
}

} // namespace

double cone_violation(const LorentzPoint& child, const LorentzPoint& parent) {
    const double angle = exterior_angle(child, parent);
    const double aperture = half_aperture(parent);
    return std::max(0.0, angle - aperture);
}

EntailmentReport cross_modal_loss(const std::vector<LorentzPoint>& visual,
                                  const std::vector<LorentzPoint>& textual) {
    if (visual.size() != textual.size()) {
        throw ContractViolation("cross_modal_loss: tree depth mismatch");
    }
    check_tree(visual, "cross_modal_loss");
    check_tree(textual, "cross_modal_loss");
    if (visual[0].curvature.value() != textual[0].curvature.value()) {
        throw ContractViolation("cross_modal_loss: modalities on different curvatures");
    }

    EntailmentReport report;
    for (std::size_t i = 0; i < visual.size(); ++i) {
        const double loss = cone_violation(visual[i], textual[i]);
        report.per_level_losses.push_back(loss);
        report.total += loss;
        if (loss > 0.0) ++report.violation_count;
    }
    return report;
}

EntailmentReport in_modal_loss(const std::vector<LorentzPoint>& tree) {
    check_tree(tree, "in_modal_loss");
    EntailmentReport report;
    for (std::size_t i = 0; i + 1 < tree.size(); ++i) {
        const double loss = cone_violation(tree[i + 1], tree[i]);
        report.per_level_losses.push_back(loss);
        report.total += loss;
        if (loss > 0.0) ++report.violation_count;
    }
    return report;
}

GeometricLoss geometric_loss(const std::vector<LorentzPoint>& text_tree_c1,
                             const std::vector<LorentzPoint>& visual_tree_c2,
                             const std::vector<LorentzPoint>& text_tree_c3,
                             const std::vector<LorentzPoint>& visual_tree_c3) {
    if (text_tree_c1.size() != visual_tree_c2.size() ||
        text_tree_c1.size() != text_tree_c3.size() ||
        text_tree_c1.size() != visual_tree_c3.size()) {
        throw ContractViolation("geometric_loss: inconsistent tree depths");
    }
    GeometricLoss out;
    out.text_in_modal = in_modal_loss(text_tree_c1);
    out.visual_in_modal = in_modal_loss(visual_tree_c2);
    out.cross_modal = cross_modal_loss(visual_tree_c3, text_tree_c3);
    out.total = out.text_in_modal.total + out.visual_in_modal.total +
                out.cross_modal.total;
    return out;
}

std::vector<LorentzPoint> lift_tree(const Eigen::MatrixXd& features, Curvature c) {
    std::vector<LorentzPoint> out;
    out.reserve(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        out.push_back(expm_origin(c, features.row(i).transpose()));
    }
    return out;
}

InModalGrad in_modal_loss_grad(const Eigen::MatrixXd& features, Curvature c) {
    const Eigen::Index h = features.rows();
    const Eigen::Index d = features.cols();
    if (h < 1 || d < 1) throw ContractViolation("in_modal_loss_grad: empty tree");

    InModalGrad out;
    out.d_features = Eigen::MatrixXd::Zero(h, d);
    if (h < 2) return out;

    const std::vector<LorentzPoint> points = lift_tree(features, c);

    // Ambient gradients per level, accumulated across the pairs each
    // level participates in (as child of i-1 and parent of i+1).
    Eigen::MatrixXd d_space = Eigen::MatrixXd::Zero(h, d);
    Eigen::VectorXd d_time = Eigen::VectorXd::Zero(h);

    for (Eigen::Index i = 0; i + 1 < h; ++i) {
        const auto g = cone_violation_grad(points[static_cast<std::size_t>(i + 1)],
                                           points[static_cast<std::size_t>(i)]);
        out.report.per_level_losses.push_back(g.loss);
        out.report.total += g.loss;
        if (!g.active) continue;
        ++out.report.violation_count;
        d_space.row(i + 1) += g.d_child_space.transpose();
        d_time[i + 1] += g.d_child_time;
        d_space.row(i) += g.d_parent_space.transpose();
        d_time[i] += g.d_parent_time;
        out.d_curvature += g.d_curvature;
    }

    for (Eigen::Index i = 0; i < h; ++i) {
        const auto back = expm_origin_backward(c, features.row(i).transpose(),
                                               d_space.row(i).transpose(), d_time[i]);
        out.d_features.row(i) = back.d_features.transpose();
        out.d_curvature += back.d_curvature;
    }
    return out;
}

CrossModalGrad cross_modal_loss_grad(const Eigen::MatrixXd& visual,
                                     const Eigen::MatrixXd& text, Curvature c) {
    if (visual.rows() != text.rows() || visual.cols() != text.cols()) {
        throw ContractViolation("cross_modal_loss_grad: shape mismatch");
    }
    const Eigen::Index h = visual.rows();
    const Eigen::Index d = visual.cols();
    if (h < 1 || d < 1) throw ContractViolation("cross_modal_loss_grad: empty tree");

    CrossModalGrad out;
    out.d_visual = Eigen::MatrixXd::Zero(h, d);
    out.d_text = Eigen::MatrixXd::Zero(h, d);

    const std::vector<LorentzPoint> v_points = lift_tree(visual, c);
    const std::vector<LorentzPoint> t_points = lift_tree(text, c);

    for (Eigen::Index i = 0; i < h; ++i) {
        const auto g = cone_violation_grad(v_points[static_cast<std::size_t>(i)],
                                           t_points[static_cast<std::size_t>(i)]);
        out.report.per_level_losses.push_back(g.loss);
        out.report.total += g.loss;
        if (!g.active) continue;
        ++out.report.violation_count;

        const auto v_back = expm_origin_backward(c, visual.row(i).transpose(),
                                                 g.d_child_space, g.d_child_time);
        out.d_visual.row(i) = v_back.d_features.transpose();
        const auto t_back = expm_origin_backward(c, text.row(i).transpose(),
                                                 g.d_parent_space, g.d_parent_time);
        out.d_text.row(i) = t_back.d_features.transpose();
        out.d_curvature += g.d_curvature + v_back.d_curvature + t_back.d_curvature;
    }
    return out;
}

} // namespace treealign
