#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treealign/dual.hpp"
#include "treealign/errors.hpp"

namespace treealign {

/// Magnitude of the (negative) sectional curvature. Always strictly
/// positive and at or above a configurable floor that keeps the
/// convexity analysis of the manifold-distance objective applicable.
class Curvature {
public:
    static constexpr double kDefaultFloor = 1e-4;

    explicit Curvature(double value, double floor = kDefaultFloor);

    double value() const { return value_; }
    double floor() const { return floor_; }

private:
    double value_;
    double floor_;
};

/// Point on the hyperboloid { x : <x,x>_L = -1/c }, stored as spatial
/// coordinates plus the (positive) time coordinate. Ambient layout is
/// [space..., time].
struct LorentzPoint {
    Eigen::VectorXd space;
    double time;
    Curvature curvature;

    /// Validating constructor; rejects coordinates off the hyperboloid.
    LorentzPoint(Eigen::VectorXd space_coords, double time_coord, Curvature c);

    /// Lifts spatial coordinates onto the hyperboloid by deriving time.
    static LorentzPoint from_space(Eigen::VectorXd space_coords, Curvature c);

    int dim() const { return static_cast<int>(space.size()); }
    Eigen::VectorXd ambient() const;
};

/// Element of the tangent space at `base`, stored in ambient coordinates
/// (Lorentz-orthogonal to the base point).
struct TangentVector {
    Eigen::VectorXd ambient; // [space..., time]
    LorentzPoint base;

    TangentVector(Eigen::VectorXd ambient_coords, LorentzPoint base_point);

    /// sqrt(|<v,v>_L|); tangent vectors on the hyperboloid are spacelike.
    double lorentz_norm() const;
};

LorentzPoint origin(Curvature c, int dim);

// ---------------------------------------------------------------------------
// Scalar-generic kernels. Instantiated with double for values and with
// Dual for exact directional derivatives. Free parameters are the
// spatial coordinates (time is derived) and the curvature.
// ---------------------------------------------------------------------------
namespace detail {

constexpr double kDomainGuard = 1e-6;   // arcosh/series domain tolerance
constexpr double kSeriesSwitch = 1e-8;  // sinh(a)/a series switchover
constexpr double kConeDegenerate = 1e-12;
constexpr double kHalfPi = 1.5707963267948966;
constexpr double kPi = 3.141592653589793;

using std::abs;
using std::acos;
using std::acosh;
using std::asin;
using std::cosh;
using std::max;
using std::min;
using std::sinh;
using std::sqrt;

template <class S>
S dot(std::span<const S> a, std::span<const S> b) {
    S acc(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

template <class S>
S time_of(S c, std::span<const S> space) {
    return sqrt(S(1.0) / c + dot(space, space));
}

/// <x,y>_L on ambient coordinates [space..., time].
template <class S>
S inner_ambient(std::span<const S> x, std::span<const S> y) {
    const std::size_t n = x.size() - 1;
    S acc(0.0);
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc - x[n] * y[n];
}

template <class S>
S distance_core(S c, std::span<const S> xs, std::span<const S> ys) {
    const S xt = time_of(c, xs);
    const S yt = time_of(c, ys);
    S beta = -c * (dot(xs, ys) - xt * yt);
    if (value_of(beta) < 1.0 - kDomainGuard) {
        throw NumericError("distance: arcosh argument " +
                           std::to_string(value_of(beta)) + " below domain");
    }
    if (beta < S(1.0)) beta = S(1.0);
    return sqrt(S(1.0) / c) * acosh(beta);
}

template <class S>
std::vector<S> proj_core(S c, std::span<const S> x_ambient, std::span<const S> u) {
    const S inner = inner_ambient(x_ambient, u);
    std::vector<S> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + c * x_ambient[i] * inner;
    return out;
}

/// sinh(a)/a with its series limit near zero.
template <class S>
S sinhc(S a) {
    if (value_of(a) < kSeriesSwitch) return S(1.0) + a * a / S(6.0);
    return sinh(a) / a;
}

template <class S>
std::vector<S> expm_core(S c, std::span<const S> x_ambient, std::span<const S> v) {
    S vv = inner_ambient(v, v);
    if (vv < S(0.0)) vv = -vv;
    const S a = sqrt(c) * sqrt(vv);
    const S ch = cosh(a);
    const S factor = sinhc(a);
    std::vector<S> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = ch * x_ambient[i] + factor * v[i];
    return out;
}

template <class S>
std::vector<S> logm_core(S c, std::span<const S> y_ambient, std::span<const S> x_ambient) {
    const S inner = inner_ambient(y_ambient, x_ambient);
    S q = (c * inner) * (c * inner) - S(1.0);
    if (value_of(q) < -kDomainGuard) {
        throw NumericError("logm: (c<y,x>_L)^2 - 1 = " + std::to_string(value_of(q)) +
                           " below domain");
    }
    if (q < S(0.0)) q = S(0.0);
    S factor(1.0);
    if (value_of(q) > 1e-12) {
        S beta = -c * inner;
        if (beta < S(1.0)) beta = S(1.0);
        factor = acosh(beta) / sqrt(q);
    }
    std::vector<S> out = proj_core(c, y_ambient, x_ambient);
    for (auto& e : out) e *= factor;
    return out;
}

template <class S>
std::vector<S> expm_origin_core(S c, std::span<const S> v_space) {
    const S a = sqrt(c) * sqrt(dot(v_space, v_space));
    const S factor = sinhc(a);
    std::vector<S> out(v_space.size() + 1);
    for (std::size_t i = 0; i < v_space.size(); ++i) out[i] = factor * v_space[i];
    out[v_space.size()] = cosh(a) / sqrt(c);
    return out;
}

template <class S>
S half_aperture_core(S c, std::span<const S> t_space, S k) {
    const S ns = sqrt(dot(t_space, t_space));
    if (value_of(ns) == 0.0) throw NumericError("half_aperture: degenerate apex");
    const S q = S(2.0) * k / (sqrt(c) * ns);
    if (value_of(q) >= 1.0) return S(kHalfPi);
    return asin(q);
}

template <class S>
S exterior_angle_core(S c, std::span<const S> v_space, S v_time,
                      std::span<const S> t_space, S t_time) {
    const S ns = sqrt(dot(t_space, t_space));
    const S cu = c * (dot(t_space, v_space) - t_time * v_time);
    const S q = cu * cu - S(1.0);
    if (value_of(ns) == 0.0 || value_of(q) <= kConeDegenerate) {
        throw NumericError("exterior_angle: degenerate geometry");
    }
    const S arg = (v_time + t_time * cu) / (ns * sqrt(q));
    if (value_of(arg) >= 1.0) return S(0.0);
    if (value_of(arg) <= -1.0) return S(kPi);
    return acos(arg);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Primary operations (double precision, validated types).
// ---------------------------------------------------------------------------

/// <x,y>_L = <x_space,y_space> - x_time*y_time on ambient coordinates.
double lorentz_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Geodesic distance sqrt(1/c)*arcosh(-c<x,y>_L); requires shared curvature.
double distance(const LorentzPoint& x, const LorentzPoint& y);

/// Projects an ambient vector onto the tangent space at x.
TangentVector proj_tangent(const LorentzPoint& x, const Eigen::VectorXd& u);

/// Exponential map: follows the geodesic from x with initial velocity v.
LorentzPoint expm(const LorentzPoint& x, const TangentVector& v);

/// Logarithmic map: tangent vector at y pointing to x, inverse of expm.
TangentVector logm(const LorentzPoint& y, const LorentzPoint& x);

/// Lifts a Euclidean feature (tangent at the origin, zero time component)
/// onto the hyperboloid of curvature c.
LorentzPoint expm_origin(Curvature c, const Eigen::VectorXd& v_space);

/// Half-aperture arcsin(min(1, 2k/(sqrt(c)*||x_space||))) of the
/// entailment cone with apex x.
double half_aperture(const LorentzPoint& x, double k = 0.1);

/// Exterior angle at t between the geodesic from the origin and the
/// geodesic toward v; v lies in t's cone iff the angle is at most the
/// half-aperture of t.
double exterior_angle(const LorentzPoint& v, const LorentzPoint& t);

// ---------------------------------------------------------------------------
// Derivative surfaces.
//
// JVPs differentiate along a caller-chosen direction of the free
// parameters: spatial coordinates of each point (time is re-derived) and
// the curvature. expm_jvp additionally re-projects its raw ambient input
// onto the tangent space so the composition is a genuine function of
// unconstrained inputs. All are exact (forward-mode), matching central
// finite differences away from branch points.
// ---------------------------------------------------------------------------

struct ScalarJvp {
    double value;
    double dot;
};

struct VectorJvp {
    Eigen::VectorXd value;
    Eigen::VectorXd dot;
};

double lorentz_inner_jvp(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& dx, const Eigen::VectorXd& dy);

ScalarJvp distance_jvp(const LorentzPoint& x, const LorentzPoint& y,
                       const Eigen::VectorXd& dx_space,
                       const Eigen::VectorXd& dy_space, double dcurv);

VectorJvp proj_tangent_jvp(const LorentzPoint& x, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& dx_space,
                           const Eigen::VectorXd& du, double dcurv);

/// Surface: expm(x, proj_tangent(x, u_raw)) over (x_space, u_raw, c).
VectorJvp expm_jvp(const LorentzPoint& x, const Eigen::VectorXd& u_raw,
                   const Eigen::VectorXd& dx_space, const Eigen::VectorXd& du,
                   double dcurv);

VectorJvp logm_jvp(const LorentzPoint& y, const LorentzPoint& x,
                   const Eigen::VectorXd& dy_space,
                   const Eigen::VectorXd& dx_space, double dcurv);

VectorJvp expm_origin_jvp(Curvature c, const Eigen::VectorXd& v_space,
                          const Eigen::VectorXd& dv, double dcurv);

ScalarJvp half_aperture_jvp(const LorentzPoint& x, const Eigen::VectorXd& dx_space,
                            double dcurv, double k = 0.1);

ScalarJvp exterior_angle_jvp(const LorentzPoint& v, const LorentzPoint& t,
                             const Eigen::VectorXd& dv_space,
                             const Eigen::VectorXd& dt_space, double dcurv);

// ---------------------------------------------------------------------------
// Closed-form gradients for the loss pipeline. These treat the ambient
// coordinates (space and time) as free inputs since upstream lifts
// produce both, and report the explicit curvature partial separately.
// ---------------------------------------------------------------------------

struct HalfApertureGrad {
    double value;
    Eigen::VectorXd d_space;
    double d_curvature;
};

HalfApertureGrad half_aperture_grad(const LorentzPoint& x, double k = 0.1);

struct ExteriorAngleGrad {
    double value;
    Eigen::VectorXd d_child_space;
    double d_child_time;
    Eigen::VectorXd d_parent_space;
    double d_parent_time;
    double d_curvature;
};

ExteriorAngleGrad exterior_angle_grad(const LorentzPoint& v, const LorentzPoint& t);

struct ExpOriginBackward {
    Eigen::VectorXd d_features;
    double d_curvature;
};

/// Pulls gradients at the lifted point (grad_space, grad_time) back to
/// the Euclidean feature vector and the curvature.
ExpOriginBackward expm_origin_backward(Curvature c, const Eigen::VectorXd& v_space,
                                       const Eigen::VectorXd& grad_space,
                                       double grad_time);

} // namespace treealign
