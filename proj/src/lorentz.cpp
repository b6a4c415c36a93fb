#include "treealign/lorentz.hpp"

#include <cmath>
#include <limits>

namespace treealign {

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

std::vector<Dual> seed(const Eigen::VectorXd& value, const Eigen::VectorXd& direction) {
    if (value.size() != direction.size()) {
        throw ContractViolation("jvp: direction dimension mismatch");
    }
    std::vector<Dual> out(static_cast<std::size_t>(value.size()));
    for (Eigen::Index i = 0; i < value.size(); ++i) {
        out[static_cast<std::size_t>(i)] = Dual(value[i], direction[i]);
    }
    return out;
}

VectorJvp unpack(const std::vector<Dual>& v) {
    VectorJvp out;
    out.value.resize(static_cast<Eigen::Index>(v.size()));
    out.dot.resize(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.value[static_cast<Eigen::Index>(i)] = v[i].v;
        out.dot[static_cast<Eigen::Index>(i)] = v[i].d;
    }
    return out;
}

void require_finite(const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) throw ContractViolation(std::string(what) + ": non-finite entries");
}

void require_same_curvature(const LorentzPoint& a, const LorentzPoint& b) {
    if (a.curvature.value() != b.curvature.value()) {
        throw ContractViolation("curvature mismatch between points");
    }
}

LorentzPoint point_from_ambient(const std::vector<double>& ambient, Curvature c) {
    const auto n = static_cast<Eigen::Index>(ambient.size()) - 1;
    Eigen::VectorXd space(n);
    for (Eigen::Index i = 0; i < n; ++i) space[i] = ambient[static_cast<std::size_t>(i)];
    return {std::move(space), ambient.back(), c};
}

} // namespace

Curvature::Curvature(double value, double floor) : value_(value), floor_(floor) {
    if (!(floor > 0.0) || !std::isfinite(floor)) {
        throw ContractViolation("curvature floor must be positive and finite");
    }
    if (!std::isfinite(value) || value <= 0.0) {
        throw ContractViolation("curvature must be positive and finite, got " +
                                std::to_string(value));
    }
    if (value < floor) {
        throw ContractViolation("curvature " + std::to_string(value) +
                                " below floor " + std::to_string(floor));
    }
}

LorentzPoint::LorentzPoint(Eigen::VectorXd space_coords, double time_coord, Curvature c)
    : space(std::move(space_coords)), time(time_coord), curvature(c) {
    require_finite(space, "LorentzPoint");
    if (!std::isfinite(time) || time <= 0.0) {
        throw ContractViolation("LorentzPoint: time coordinate must be positive");
    }
    const double residual = space.squaredNorm() - time * time + 1.0 / c.value();
    const double scale = std::max(1.0, space.squaredNorm() + time * time);
    if (std::abs(residual) > 1e-8 * scale) {
        throw ContractViolation("LorentzPoint: coordinates off the hyperboloid, residual " +
                                std::to_string(residual));
    }
}

LorentzPoint LorentzPoint::from_space(Eigen::VectorXd space_coords, Curvature c) {
    require_finite(space_coords, "LorentzPoint::from_space");
    const double time = std::sqrt(1.0 / c.value() + space_coords.squaredNorm());
    return {std::move(space_coords), time, c};
}

Eigen::VectorXd LorentzPoint::ambient() const {
    Eigen::VectorXd out(space.size() + 1);
    out.head(space.size()) = space;
    out[space.size()] = time;
    return out;
}

TangentVector::TangentVector(Eigen::VectorXd ambient_coords, LorentzPoint base_point)
    : ambient(std::move(ambient_coords)), base(std::move(base_point)) {
    require_finite(ambient, "TangentVector");
    if (ambient.size() != base.space.size() + 1) {
        throw ContractViolation("TangentVector: ambient dimension must be base dim + 1");
    }
    const double inner = lorentz_inner(ambient, base.ambient());
    const double scale = std::max(1.0, ambient.norm() * base.ambient().norm());
    if (std::abs(inner) > 1e-8 * scale) {
        throw ContractViolation("TangentVector: not Lorentz-orthogonal to base, <x,v>_L = " +
                                std::to_string(inner));
    }
}

double TangentVector::lorentz_norm() const {
    return std::sqrt(std::abs(lorentz_inner(ambient, ambient)));
}

LorentzPoint origin(Curvature c, int dim) {
    if (dim <= 0) throw ContractViolation("origin: dimension must be positive");
    return LorentzPoint::from_space(Eigen::VectorXd::Zero(dim), c);
}

double lorentz_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) {
        throw ContractViolation("lorentz_inner: dimension mismatch");
    }
    if (x.size() < 2) throw ContractViolation("lorentz_inner: need at least 2 coordinates");
    require_finite(x, "lorentz_inner");
    require_finite(y, "lorentz_inner");
    return detail::inner_ambient<double>(as_span(x), as_span(y));
}

double distance(const LorentzPoint& x, const LorentzPoint& y) {
    require_same_curvature(x, y);
    if (x.dim() != y.dim()) throw ContractViolation("distance: dimension mismatch");
    return detail::distance_core<double>(x.curvature.value(), as_span(x.space),
                                         as_span(y.space));
}

TangentVector proj_tangent(const LorentzPoint& x, const Eigen::VectorXd& u) {
    if (u.size() != x.space.size() + 1) {
        throw ContractViolation("proj_tangent: ambient dimension must be point dim + 1");
    }
    require_finite(u, "proj_tangent");
    const Eigen::VectorXd xa = x.ambient();
    const double inner = lorentz_inner(xa, u);
    Eigen::VectorXd out = u + x.curvature.value() * inner * xa;
    return {std::move(out), x};
}

LorentzPoint expm(const LorentzPoint& x, const TangentVector& v) {
    if (v.base.space != x.space || v.base.time != x.time ||
        v.base.curvature.value() != x.curvature.value()) {
        throw ContractViolation("expm: tangent vector not based at x");
    }
    std::vector<double> xa(static_cast<std::size_t>(x.dim()) + 1);
    for (int i = 0; i < x.dim(); ++i) xa[static_cast<std::size_t>(i)] = x.space[i];
    xa.back() = x.time;
    const auto out = detail::expm_core<double>(x.curvature.value(), xa, as_span(v.ambient));
    return point_from_ambient(out, x.curvature);
}

TangentVector logm(const LorentzPoint& y, const LorentzPoint& x) {
    require_same_curvature(y, x);
    if (x.dim() != y.dim()) throw ContractViolation("logm: dimension mismatch");
    std::vector<double> ya(static_cast<std::size_t>(y.dim()) + 1);
    for (int i = 0; i < y.dim(); ++i) ya[static_cast<std::size_t>(i)] = y.space[i];
    ya.back() = y.time;
    std::vector<double> xa(static_cast<std::size_t>(x.dim()) + 1);
    for (int i = 0; i < x.dim(); ++i) xa[static_cast<std::size_t>(i)] = x.space[i];
    xa.back() = x.time;
    const auto out = detail::logm_core<double>(y.curvature.value(), ya, xa);
    Eigen::VectorXd ambient(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        ambient[static_cast<Eigen::Index>(i)] = out[i];
    }
    return {std::move(ambient), y};
}

LorentzPoint expm_origin(Curvature c, const Eigen::VectorXd& v_space) {
    require_finite(v_space, "expm_origin");
    if (v_space.size() == 0) throw ContractViolation("expm_origin: empty feature");
    const auto out = detail::expm_origin_core<double>(c.value(), as_span(v_space));
    return point_from_ambient(out, c);
}

double half_aperture(const LorentzPoint& x, double k) {
    if (!(k > 0.0)) throw ContractViolation("half_aperture: k must be positive");
    return detail::half_aperture_core<double>(x.curvature.value(), as_span(x.space), k);
}

double exterior_angle(const LorentzPoint& v, const LorentzPoint& t) {
    require_same_curvature(v, t);
    if (v.dim() != t.dim()) throw ContractViolation("exterior_angle: dimension mismatch");
    return detail::exterior_angle_core<double>(t.curvature.value(), as_span(v.space),
                                               v.time, as_span(t.space), t.time);
}

// --------------------------- JVP surfaces ---------------------------

double lorentz_inner_jvp(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& dx, const Eigen::VectorXd& dy) {
    const auto xd = seed(x, dx);
    const auto yd = seed(y, dy);
    return detail::inner_ambient<Dual>(xd, yd).d;
}

ScalarJvp distance_jvp(const LorentzPoint& x, const LorentzPoint& y,
                       const Eigen::VectorXd& dx_space,
                       const Eigen::VectorXd& dy_space, double dcurv) {
    require_same_curvature(x, y);
    const auto xd = seed(x.space, dx_space);
    const auto yd = seed(y.space, dy_space);
    const Dual c(x.curvature.value(), dcurv);
    const Dual r = detail::distance_core<Dual>(c, xd, yd);
    return {r.v, r.d};
}

VectorJvp proj_tangent_jvp(const LorentzPoint& x, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& dx_space,
                           const Eigen::VectorXd& du, double dcurv) {
    const Dual c(x.curvature.value(), dcurv);
    auto xs = seed(x.space, dx_space);
    std::vector<Dual> xa = xs;
    xa.push_back(detail::time_of<Dual>(c, xs));
    const auto ud = seed(u, du);
    return unpack(detail::proj_core<Dual>(c, xa, ud));
}

VectorJvp expm_jvp(const LorentzPoint& x, const Eigen::VectorXd& u_raw,
                   const Eigen::VectorXd& dx_space, const Eigen::VectorXd& du,
                   double dcurv) {
    const Dual c(x.curvature.value(), dcurv);
    auto xs = seed(x.space, dx_space);
    std::vector<Dual> xa = xs;
    xa.push_back(detail::time_of<Dual>(c, xs));
    const auto ud = seed(u_raw, du);
    const auto tangent = detail::proj_core<Dual>(c, xa, ud);
    return unpack(detail::expm_core<Dual>(c, xa, tangent));
}

VectorJvp logm_jvp(const LorentzPoint& y, const LorentzPoint& x,
                   const Eigen::VectorXd& dy_space,
                   const Eigen::VectorXd& dx_space, double dcurv) {
    require_same_curvature(y, x);
    const Dual c(y.curvature.value(), dcurv);
    auto ys = seed(y.space, dy_space);
    std::vector<Dual> ya = ys;
    ya.push_back(detail::time_of<Dual>(c, ys));
    auto xs = seed(x.space, dx_space);
    std::vector<Dual> xa = xs;
    xa.push_back(detail::time_of<Dual>(c, xs));
    return unpack(detail::logm_core<Dual>(c, ya, xa));
}

VectorJvp expm_origin_jvp(Curvature c, const Eigen::VectorXd& v_space,
                          const Eigen::VectorXd& dv, double dcurv) {
    const Dual cd(c.value(), dcurv);
    const auto vd = seed(v_space, dv);
    return unpack(detail::expm_origin_core<Dual>(cd, vd));
}

ScalarJvp half_aperture_jvp(const LorentzPoint& x, const Eigen::VectorXd& dx_space,
                            double dcurv, double k) {
    const Dual c(x.curvature.value(), dcurv);
    const auto xd = seed(x.space, dx_space);
    const Dual r = detail::half_aperture_core<Dual>(c, xd, Dual(k));
    return {r.v, r.d};
}

ScalarJvp exterior_angle_jvp(const LorentzPoint& v, const LorentzPoint& t,
                             const Eigen::VectorXd& dv_space,
                             const Eigen::VectorXd& dt_space, double dcurv) {
    require_same_curvature(v, t);
    const Dual c(t.curvature.value(), dcurv);
    auto vs = seed(v.space, dv_space);
    const Dual vt = detail::time_of<Dual>(c, vs);
    auto ts = seed(t.space, dt_space);
    const Dual tt = detail::time_of<Dual>(c, ts);
    const Dual r = detail::exterior_angle_core<Dual>(c, vs, vt, ts, tt);
    return {r.v, r.d};
}

// --------------------------- closed-form gradients ---------------------------

HalfApertureGrad half_aperture_grad(const LorentzPoint& x, double k) {
    HalfApertureGrad g;
    g.d_space = Eigen::VectorXd::Zero(x.dim());
    g.d_curvature = 0.0;
    const double c = x.curvature.value();
    const double ns = x.space.norm();
    if (ns == 0.0) throw NumericError("half_aperture: degenerate apex");
    const double q = 2.0 * k / (std::sqrt(c) * ns);
    if (q >= 1.0) {
        g.value = detail::kHalfPi; // saturated branch, locally constant
        return g;
    }
    g.value = std::asin(q);
    const double dwdq = 1.0 / std::sqrt(1.0 - q * q);
    g.d_space = dwdq * (-q / (ns * ns)) * x.space;
    g.d_curvature = dwdq * (-q / (2.0 * c));
    return g;
}

ExteriorAngleGrad exterior_angle_grad(const LorentzPoint& v, const LorentzPoint& t) {
    require_same_curvature(v, t);
    if (v.dim() != t.dim()) throw ContractViolation("exterior_angle: dimension mismatch");
    const double c = t.curvature.value();

    ExteriorAngleGrad g;
    g.d_child_space = Eigen::VectorXd::Zero(v.dim());
    g.d_parent_space = Eigen::VectorXd::Zero(t.dim());
    g.d_child_time = 0.0;
    g.d_parent_time = 0.0;
    g.d_curvature = 0.0;

    const double u = t.space.dot(v.space) - t.time * v.time;
    const double cu = c * u;
    const double q = cu * cu - 1.0;
    const double ns = t.space.norm();
    if (ns == 0.0 || q <= detail::kConeDegenerate) {
        throw NumericError("exterior_angle: degenerate geometry");
    }
    const double sq = std::sqrt(q);
    const double num = v.time + t.time * cu;
    const double den = ns * sq;
    const double arg = num / den;
    if (arg >= 1.0) {
        g.value = 0.0; // clamped branch, locally constant
        return g;
    }
    if (arg <= -1.0) {
        g.value = detail::kPi;
        return g;
    }
    g.value = std::acos(arg);
    const double darg = -1.0 / std::sqrt(1.0 - arg * arg);

    // num = v_t + t_t*c*u,  den = ||t_s|| * sqrt(c^2 u^2 - 1)
    const Eigen::VectorXd du_dvs = t.space;
    const Eigen::VectorXd du_dts = v.space;
    const double du_dvt = -t.time;
    const double du_dtt = -v.time;

    auto combine = [&](double dnum, double dden) {
        return darg * (dnum * den - num * dden) / (den * den);
    };
    const double dsq_du = c * cu / sq; // d sqrt(q) / du

    g.d_child_space = combine(t.time * c, ns * dsq_du) * du_dvs;
    g.d_child_time = combine(1.0 + t.time * c * du_dvt, ns * dsq_du * du_dvt);

    g.d_parent_space = combine(t.time * c, ns * dsq_du) * du_dts +
                       combine(0.0, sq) * (t.space / ns);
    g.d_parent_time = combine(cu + t.time * c * du_dtt, ns * dsq_du * du_dtt);

    const double dsq_dc = cu * u / sq;
    g.d_curvature = combine(t.time * u, ns * dsq_dc);
    return g;
}

ExpOriginBackward expm_origin_backward(Curvature c, const Eigen::VectorXd& v_space,
                                       const Eigen::VectorXd& grad_space,
                                       double grad_time) {
    if (grad_space.size() != v_space.size()) {
        throw ContractViolation("expm_origin_backward: gradient dimension mismatch");
    }
    const double cv = c.value();
    const double s = std::sqrt(cv);
    const double n = v_space.norm();
    const double a = s * n;
    const double gs_dot_v = grad_space.dot(v_space);

    ExpOriginBackward out;
    if (a < detail::kSeriesSwitch) {
        // p_space ~= (1 + a^2/6) v, p_time ~= (1 + a^2/2)/sqrt(c)
        const double g = 1.0 + a * a / 6.0;
        const double sinh_over_n = s * (1.0 + a * a / 6.0);
        out.d_features = g * grad_space +
                         (gs_dot_v * (s * s / 3.0) + grad_time * sinh_over_n) * v_space;
        out.d_curvature = gs_dot_v * (n * n / 6.0) +
                          grad_time * (n * n / (2.0 * s) - (1.0 + a * a / 2.0) /
                                                             (2.0 * cv * s));
        return out;
    }
    const double sh = std::sinh(a);
    const double ch = std::cosh(a);
    const double g = sh / a;
    const double gp = (a * ch - sh) / (a * a);
    out.d_features = g * grad_space +
                     (gp * (s / n) * gs_dot_v + grad_time * sh / n) * v_space;
    out.d_curvature = gs_dot_v * gp * (n / (2.0 * s)) +
                      grad_time * (sh * n / (2.0 * cv) - ch / (2.0 * cv * s));
    return out;
}

} // namespace treealign
