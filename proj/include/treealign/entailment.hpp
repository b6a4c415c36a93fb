#pragma once

#include <vector>

#include <Eigen/Dense>

#include "treealign/lorentz.hpp"

namespace treealign {

/// Decomposed entailment loss: one hinge value per hierarchy level (or
/// adjacent level pair), their sum, and how many hinges are active.
struct EntailmentReport {
    std::vector<double> per_level_losses;
    double total = 0.0;
    int violation_count = 0;
};

/// Hinge on the cone constraint: max(0, angle(child, parent) - aperture(parent)).
double cone_violation(const LorentzPoint& child, const LorentzPoint& parent);

/// Cross-modal alignment loss on a shared manifold: each visual feature
/// must lie in the cone of the textual feature at the same level (text
/// is the broader context and acts as parent).
EntailmentReport cross_modal_loss(const std::vector<LorentzPoint>& visual,
                                  const std::vector<LorentzPoint>& textual);

/// In-modal hierarchy loss: each finer level must lie in the cone of the
/// adjacent coarser level. Trees of depth < 2 yield the zero report.
EntailmentReport in_modal_loss(const std::vector<LorentzPoint>& tree);

struct GeometricLoss {
    double total = 0.0;
    EntailmentReport text_in_modal;
    EntailmentReport visual_in_modal;
    EntailmentReport cross_modal;
};

/// Combined geometric loss J_Tent + J_Vent + J_ent. The entailment
/// weight alpha is applied by the caller.
GeometricLoss geometric_loss(const std::vector<LorentzPoint>& text_tree_c1,
                             const std::vector<LorentzPoint>& visual_tree_c2,
                             const std::vector<LorentzPoint>& text_tree_c3,
                             const std::vector<LorentzPoint>& visual_tree_c3);

/// Lifts each row of an H x d feature matrix onto the hyperboloid of
/// curvature c via the exponential map at the origin.
std::vector<LorentzPoint> lift_tree(const Eigen::MatrixXd& features, Curvature c);

// ---------------------------------------------------------------------------
// Fused lift + loss with gradients. Inputs are Euclidean feature trees
// (H x d, coarse to fine); gradients flow back through the origin lift
// and the explicit curvature dependence of angles and apertures. The
// hinge subgradient at the exact cone boundary is zero.
// ---------------------------------------------------------------------------

struct InModalGrad {
    EntailmentReport report;
    Eigen::MatrixXd d_features;
    double d_curvature = 0.0;
};

InModalGrad in_modal_loss_grad(const Eigen::MatrixXd& features, Curvature c);

struct CrossModalGrad {
    EntailmentReport report;
    Eigen::MatrixXd d_visual;
    Eigen::MatrixXd d_text;
    double d_curvature = 0.0;
};

CrossModalGrad cross_modal_loss_grad(const Eigen::MatrixXd& visual,
                                     const Eigen::MatrixXd& text, Curvature c);

} // namespace treealign
