#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "treealign/errors.hpp"
#include "treealign/lorentz.hpp"

namespace treealign {

/// Tangent-space mean norm entering the manifold distance. Either fixed
/// by configuration or recomputed from the current batch. A zero radius
/// is representable (opposite features cancel in the mean) but must be
/// clamped upward before use in any distance evaluation.
struct RadiusParameter {
    enum class Source { fixed, batch_computed };

    double r;
    Source source = Source::fixed;

    RadiusParameter(double radius, Source src);
};

/// Which component of the sufficient-condition max{...} binds.
enum class BindingTerm {
    inv_sqrt_c_low,   // 1/sqrt(c_low)
    two_over_l,       // 2/L, L = sqrt(c_low) - sqrt(c_min)
    log_term_low,     // ln(12 sqrt(c_low) / (c_min^{3/2} L^2)) / L
    inv_sqrt_c_high,  // 1/sqrt(c_high)
    two_over_m_min,   // 2/M_min, M_min = sqrt(c_high) - sqrt(c_min)
    log_term_high,    // ln(12 sqrt(c_high) / (c_min^{3/2} M_min^2)) / M_min
    four_over_m,      // 4/M, M = sqrt(c_high) - sqrt(c_low)
    three_over_sqrt_c_high,
};

const char* binding_term_name(BindingTerm term);

/// Radius threshold above which the intermediate-curvature objective is
/// strictly convex on the bracket (unique minimizer guaranteed).
struct ConvexityCertificate {
    double r_min_star;
    BindingTerm binding_term;
    bool satisfied; // set against the radius the certificate was checked with

    bool satisfied_for(double r) const { return r >= r_min_star; }
};

/// Optimal intermediate curvature with its implicit partial derivatives.
struct IntermediateSolution {
    Curvature c3_star;
    double dc3_dc1;
    double dc3_dc2;
    double objective_value;
    double bracket_low;
    double bracket_high;
    int iterations;
    bool certificate_satisfied;
};

struct GoldenSectionResult {
    double x_star;
    double f_star;
    int iterations;
};

/// Distance between the hyperbolic manifolds of curvature c_a (reference)
/// and c_b (candidate):
///   (-sqrt(c_a) + 2 sqrt(c_b) cosh((sqrt(c_b)-sqrt(c_a)) r)) / (2 sqrt(c_a) c_b).
/// Asymmetric in its arguments by construction.
double manifold_distance(Curvature c_a, Curvature c_b, const RadiusParameter& r);

/// J_c(c3) = D(c1, c3) + D(c2, c3), the intermediate-curvature objective.
double objective_jc(Curvature c3, Curvature c1, Curvature c2, const RadiusParameter& r);

struct JcDerivatives {
    double d_c3;    // dJ/dc3
    double d_c3c3;  // d2J/dc3^2
    double d_c3c1;  // d2J/dc3 dc1
    double d_c3c2;  // d2J/dc3 dc2
};

/// Closed-form first and second partials of the objective.
JcDerivatives jc_derivatives(Curvature c3, Curvature c1, Curvature c2,
                             const RadiusParameter& r);

/// Minimizes a unimodal function on [low, high] to absolute tolerance tol.
GoldenSectionResult golden_section_minimize(const std::function<double(double)>& f,
                                            double low, double high, double tol);

/// Solves for the intermediate curvature on [min(c1,c2), max(c1,c2)] and
/// attaches implicit-function-theorem partials dc3*/dc1, dc3*/dc2. The
/// golden-section bracket is polished with safeguarded Newton steps on
/// the closed-form derivative so the stationarity residual reaches
/// 1e-8 * max(1, |J_c|).
IntermediateSolution solve_intermediate(Curvature c1, Curvature c2,
                                        const RadiusParameter& r, double tol = 1e-8,
                                        double c_min = Curvature::kDefaultFloor);

/// Root of A(y) + B(y)/2 = 0 for the Taylor anchor of the distance
/// derivation; approximately 3.016.
double solve_y1_star();

/// Sufficient radius threshold for strict convexity of J_c over the
/// bracket, combining the single-manifold condition for both curvatures
/// with the bracket-endpoint terms 4/M and 3/sqrt(c_high). Degenerate
/// L = 0 or M = 0 drops the corresponding terms.
ConvexityCertificate r_min_threshold(Curvature c1, Curvature c2, double c_min);

/// Euclidean norm of the arithmetic mean of the tangent features.
RadiusParameter compute_r(const std::vector<Eigen::VectorXd>& tangent_features);

} // namespace treealign
