#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "treealign/lorentz.hpp"

using namespace treealign;
using test_support::central_diff;
using test_support::close_rel;
using test_support::random_uniform;
using test_support::random_vector;

namespace {

constexpr double kPi = 3.141592653589793;

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXd vec3(double a, double b, double c) {
    Eigen::VectorXd v(3);
    v << a, b, c;
    return v;
}

LorentzPoint random_point(std::mt19937_64& gen, int dim, Curvature c,
                          double scale = 1.0) {
    return LorentzPoint::from_space(random_vector(gen, dim, scale), c);
}

TangentVector random_tangent(std::mt19937_64& gen, const LorentzPoint& x,
                             double max_norm) {
    const Eigen::VectorXd raw = random_vector(gen, x.dim() + 1, 1.0);
    TangentVector t = proj_tangent(x, raw);
    const double norm = t.lorentz_norm();
    if (norm > max_norm) {
        return {t.ambient * (max_norm / norm) * random_uniform(gen, 0.1, 1.0), x};
    }
    return t;
}

double hyperboloid_residual(const LorentzPoint& p) {
    return std::abs(p.space.squaredNorm() - p.time * p.time + 1.0 / p.curvature.value());
}

} // namespace

TEST_CASE("curvature validation") {
    CHECK_THROWS_AS(Curvature(0.0), ContractViolation);
    CHECK_THROWS_AS(Curvature(-1.0), ContractViolation);
    CHECK_THROWS_AS(Curvature(std::nan("")), ContractViolation);
    CHECK_THROWS_AS(Curvature(1e-6), ContractViolation); // below default floor
    CHECK(Curvature(1e-6, 1e-8).value() == 1e-6);        // explicit lower floor
    CHECK(Curvature(0.25).value() == 0.25);
}

TEST_CASE("lorentz inner product examples") {
    CHECK(lorentz_inner(vec3(0, 0, 1), vec3(0, 0, 1)) == doctest::Approx(-1.0));
    const double s2 = std::sqrt(2.0);
    CHECK(lorentz_inner(vec3(1, 0, s2), vec3(0, 1, s2)) == doctest::Approx(-2.0));
    CHECK(lorentz_inner(vec3(0, 0, 2), vec3(0, 0, 2)) == doctest::Approx(-4.0));
    CHECK_THROWS_AS(lorentz_inner(vec3(0, 0, 1), vec2(0, 1)), ContractViolation);
}

TEST_CASE("point construction enforces the hyperboloid invariant") {
    CHECK_THROWS_AS(LorentzPoint(vec2(1.0, 0.0), 5.0, Curvature(1.0)), ContractViolation);
    const LorentzPoint p = LorentzPoint::from_space(vec2(0.3, -0.4), Curvature(0.5));
    CHECK(hyperboloid_residual(p) < 1e-12);
    CHECK(p.time == doctest::Approx(std::sqrt(2.0 + 0.25)));
}

TEST_CASE("distance basics") {
    std::mt19937_64 gen(7);
    const Curvature c(1.0);
    const LorentzPoint x = random_point(gen, 4, c);
    CHECK(distance(x, x) == doctest::Approx(0.0));

    // expm_origin follows a unit-speed geodesic from the origin.
    Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
    v[0] = 0.5;
    const LorentzPoint y = expm_origin(c, v);
    CHECK(distance(origin(c, 4), y) == doctest::Approx(0.5).epsilon(1e-10));

    for (int i = 0; i < 100; ++i) {
        const LorentzPoint a = random_point(gen, 3, c);
        const LorentzPoint b = random_point(gen, 3, c);
        CHECK(std::abs(distance(a, b) - distance(b, a)) < 1e-10);
        CHECK(distance(a, b) >= 0.0);
    }

    const LorentzPoint other = random_point(gen, 4, Curvature(0.5));
    CHECK_THROWS_AS(distance(x, other), ContractViolation);
}

TEST_CASE("proj_tangent is idempotent and orthogonal to the base") {
    std::mt19937_64 gen(11);
    const Curvature c(1.0);

    // At the origin the projection just zeroes the time component.
    const LorentzPoint o = origin(c, 2);
    const TangentVector t = proj_tangent(o, vec3(0.3, 0.7, 1.2));
    CHECK(t.ambient[0] == doctest::Approx(0.3));
    CHECK(t.ambient[1] == doctest::Approx(0.7));
    CHECK(t.ambient[2] == doctest::Approx(0.0));

    for (int i = 0; i < 50; ++i) {
        const LorentzPoint x = random_point(gen, 5, c);
        const Eigen::VectorXd u = random_vector(gen, 6);
        const TangentVector once = proj_tangent(x, u);
        const TangentVector twice = proj_tangent(x, once.ambient);
        CHECK((twice.ambient - once.ambient).norm() < 1e-10);
        CHECK(std::abs(lorentz_inner(once.ambient, x.ambient())) < 1e-10);
    }
}

TEST_CASE("expm examples and hyperboloid membership") {
    const Curvature c(1.0);
    const LorentzPoint o = origin(c, 2);

    const TangentVector zero(Eigen::VectorXd::Zero(3), o);
    const LorentzPoint same = expm(o, zero);
    CHECK((same.space - o.space).norm() == doctest::Approx(0.0));
    CHECK(same.time == doctest::Approx(o.time));

    const TangentVector v(vec3(1.0, 0.0, 0.0), o);
    const LorentzPoint p = expm(o, v);
    CHECK(p.time == doctest::Approx(1.5430806348152437));
    CHECK(p.space[0] == doctest::Approx(1.1752011936438014));
    CHECK(hyperboloid_residual(p) < 1e-10);
}

TEST_CASE("expm/logm round trips") {
    std::mt19937_64 gen(13);
    for (int i = 0; i < 300; ++i) {
        const int dim = 2 + static_cast<int>(gen() % 7);
        const Curvature c(random_uniform(gen, 0.01, 2.0));
        const LorentzPoint x = random_point(gen, dim, c);
        const TangentVector v = random_tangent(gen, x, 3.0);

        const LorentzPoint y = expm(x, v);
        CHECK(hyperboloid_residual(y) < 1e-8);
        const TangentVector back = logm(x, y);
        CHECK((back.ambient - v.ambient).cwiseAbs().maxCoeff() < 1e-8);

        // norm-distance identity and the inverse direction
        const LorentzPoint z = random_point(gen, dim, c);
        const TangentVector log_xz = logm(x, z);
        CHECK(std::abs(log_xz.lorentz_norm() - distance(x, z)) < 1e-8);
        const LorentzPoint z2 = expm(x, log_xz);
        CHECK((z2.space - z.space).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("logm of coincident points is the zero tangent") {
    std::mt19937_64 gen(17);
    const LorentzPoint x = random_point(gen, 3, Curvature(0.7));
    const TangentVector t = logm(x, x);
    CHECK(t.ambient.norm() == doctest::Approx(0.0));
}

TEST_CASE("expm_origin examples") {
    SUBCASE("zero maps to the origin") {
        const LorentzPoint p = expm_origin(Curvature(0.25), Eigen::VectorXd::Zero(3));
        CHECK(p.space.norm() == 0.0);
        CHECK(p.time == doctest::Approx(2.0));
    }
    SUBCASE("unit step at c=1") {
        const LorentzPoint p = expm_origin(Curvature(1.0), vec2(1.0, 0.0));
        CHECK(p.space[0] == doctest::Approx(1.1752011936438014));
        CHECK(p.space[1] == doctest::Approx(0.0));
        CHECK(p.time == doctest::Approx(1.5430806348152437));
    }
    SUBCASE("hyperboloid invariant on random inputs") {
        std::mt19937_64 gen(19);
        for (int i = 0; i < 200; ++i) {
            const Curvature c(random_uniform(gen, 0.01, 2.0));
            const LorentzPoint p = expm_origin(c, random_vector(gen, 8, 1.5));
            CHECK(hyperboloid_residual(p) < 1e-9);
        }
    }
}

TEST_CASE("half aperture examples") {
    const Curvature c(1.0);
    const LorentzPoint saturated = LorentzPoint::from_space(vec2(0.2, 0.0), c);
    CHECK(half_aperture(saturated) == doctest::Approx(kPi / 2.0));

    const LorentzPoint regular = LorentzPoint::from_space(vec2(0.4, 0.0), c);
    CHECK(half_aperture(regular) == doctest::Approx(kPi / 6.0));

    CHECK_THROWS_AS(half_aperture(origin(c, 2)), NumericError);

    // strictly decreasing in the spatial norm below saturation
    double prev = half_aperture(regular);
    for (double n = 0.5; n < 3.0; n += 0.25) {
        const double cur = half_aperture(LorentzPoint::from_space(vec2(n, 0.0), c));
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("exterior angle on radial geodesics") {
    const Curvature c(1.0);
    // t at radial parameter b, v beyond it at a > b: angle 0.
    const LorentzPoint t = expm_origin(c, vec2(0.8, 0.0));
    const LorentzPoint v_beyond = expm_origin(c, vec2(1.7, 0.0));
    CHECK(exterior_angle(v_beyond, t) < 1e-6);

    // v on the origin side of t: angle pi.
    const LorentzPoint v_inside = expm_origin(c, vec2(0.3, 0.0));
    CHECK(exterior_angle(v_inside, t) > kPi - 1e-6);
    CHECK(exterior_angle(v_inside, t) <= kPi);

    CHECK_THROWS_AS(exterior_angle(t, t), NumericError);
    CHECK_THROWS_AS(exterior_angle(v_inside, origin(c, 2)), NumericError);
}

// ---------------------------------------------------------------------------
// Derivative checks: every exposed derivative against central finite
// differences, relative tolerance 1e-4, step 1e-5, away from branch points.
// ---------------------------------------------------------------------------

TEST_CASE("distance jvp matches finite differences") {
    std::mt19937_64 gen(23);
    for (int i = 0; i < 40; ++i) {
        const int dim = 2 + static_cast<int>(gen() % 4);
        const double cv = random_uniform(gen, 0.2, 2.0);
        const Eigen::VectorXd xs = random_vector(gen, dim);
        Eigen::VectorXd ys = random_vector(gen, dim);
        if ((xs - ys).norm() < 0.3) ys.array() += 0.5;
        const Eigen::VectorXd dx = random_vector(gen, dim);
        const Eigen::VectorXd dy = random_vector(gen, dim);
        const double dc = random_uniform(gen, -1.0, 1.0);

        const ScalarJvp jvp = distance_jvp(
            LorentzPoint::from_space(xs, Curvature(cv)),
            LorentzPoint::from_space(ys, Curvature(cv)), dx, dy, dc);
        const double fd = central_diff(
            [&](double t) {
                const Curvature ct(cv + t * dc);
                return distance(LorentzPoint::from_space(xs + t * dx, ct),
                                LorentzPoint::from_space(ys + t * dy, ct));
            },
            0.0);
        CHECK(close_rel(jvp.dot, fd, 1e-4));
    }
}

TEST_CASE("proj/expm/logm/expm_origin jvps match finite differences") {
    std::mt19937_64 gen(29);
    for (int i = 0; i < 25; ++i) {
        const int dim = 2 + static_cast<int>(gen() % 3);
        const double cv = random_uniform(gen, 0.2, 1.5);
        const Eigen::VectorXd xs = random_vector(gen, dim);
        Eigen::VectorXd ys = random_vector(gen, dim);
        if ((xs - ys).norm() < 0.3) ys.array() += 0.5;
        const Eigen::VectorXd u = random_vector(gen, dim + 1);
        const Eigen::VectorXd dxs = random_vector(gen, dim);
        const Eigen::VectorXd dys = random_vector(gen, dim);
        const Eigen::VectorXd du = random_vector(gen, dim + 1);
        const double dc = random_uniform(gen, -0.5, 0.5);

        SUBCASE("") {}
        const VectorJvp pj = proj_tangent_jvp(LorentzPoint::from_space(xs, Curvature(cv)),
                                              u, dxs, du, dc);
        const VectorJvp ej = expm_jvp(LorentzPoint::from_space(xs, Curvature(cv)), u,
                                      dxs, du, dc);
        const VectorJvp lj = logm_jvp(LorentzPoint::from_space(ys, Curvature(cv)),
                                      LorentzPoint::from_space(xs, Curvature(cv)), dys,
                                      dxs, dc);
        const VectorJvp oj = expm_origin_jvp(Curvature(cv), xs, dxs, dc);

        for (int k = 0; k < dim + 1; ++k) {
            const double fd_p = central_diff(
                [&](double t) {
                    const Curvature ct(cv + t * dc);
                    return proj_tangent(LorentzPoint::from_space(xs + t * dxs, ct),
                                        u + t * du)
                        .ambient[k];
                },
                0.0);
            CHECK(close_rel(pj.dot[k], fd_p, 1e-4));

            const double fd_e = central_diff(
                [&](double t) {
                    const Curvature ct(cv + t * dc);
                    const LorentzPoint xt = LorentzPoint::from_space(xs + t * dxs, ct);
                    const LorentzPoint res = expm(xt, proj_tangent(xt, u + t * du));
                    return k < dim ? res.space[k] : res.time;
                },
                0.0);
            CHECK(close_rel(ej.dot[k], fd_e, 1e-4));

            const double fd_l = central_diff(
                [&](double t) {
                    const Curvature ct(cv + t * dc);
                    return logm(LorentzPoint::from_space(ys + t * dys, ct),
                                LorentzPoint::from_space(xs + t * dxs, ct))
                        .ambient[k];
                },
                0.0);
            CHECK(close_rel(lj.dot[k], fd_l, 1e-4));

            const double fd_o = central_diff(
                [&](double t) {
                    const Curvature ct(cv + t * dc);
                    const LorentzPoint res = expm_origin(ct, xs + t * dxs);
                    return k < dim ? res.space[k] : res.time;
                },
                0.0);
            CHECK(close_rel(oj.dot[k], fd_o, 1e-4));
        }
    }
}

TEST_CASE("aperture and angle jvps match finite differences") {
    std::mt19937_64 gen(31);
    int tested = 0;
    while (tested < 30) {
        const int dim = 2 + static_cast<int>(gen() % 3);
        const double cv = random_uniform(gen, 0.3, 1.5);
        const Eigen::VectorXd ts = random_vector(gen, dim) * 1.2;
        const Eigen::VectorXd vs = random_vector(gen, dim) * 1.2;
        const LorentzPoint t = LorentzPoint::from_space(ts, Curvature(cv));
        const LorentzPoint v = LorentzPoint::from_space(vs, Curvature(cv));
        // keep away from aperture saturation and angle clamping
        if (2.0 * 0.1 / (std::sqrt(cv) * ts.norm()) > 0.95) continue;
        const double angle = exterior_angle(v, t);
        if (angle < 0.05 || angle > kPi - 0.05) continue;
        ++tested;

        const Eigen::VectorXd dts = random_vector(gen, dim);
        const Eigen::VectorXd dvs = random_vector(gen, dim);
        const double dc = random_uniform(gen, -0.5, 0.5);

        const ScalarJvp aj = half_aperture_jvp(t, dts, dc);
        const double fd_a = central_diff(
            [&](double s) {
                return half_aperture(
                    LorentzPoint::from_space(ts + s * dts, Curvature(cv + s * dc)));
            },
            0.0);
        CHECK(close_rel(aj.dot, fd_a, 1e-4));

        const ScalarJvp xj = exterior_angle_jvp(v, t, dvs, dts, dc);
        const double fd_x = central_diff(
            [&](double s) {
                const Curvature ct(cv + s * dc);
                return exterior_angle(LorentzPoint::from_space(vs + s * dvs, ct),
                                      LorentzPoint::from_space(ts + s * dts, ct));
            },
            0.0);
        CHECK(close_rel(xj.dot, fd_x, 1e-4));
    }
}

TEST_CASE("closed-form ambient gradients match finite differences") {
    std::mt19937_64 gen(37);
    int tested = 0;
    while (tested < 25) {
        const int dim = 3;
        const double cv = random_uniform(gen, 0.3, 1.5);
        Eigen::VectorXd ts = random_vector(gen, dim) * 1.2;
        Eigen::VectorXd vs = random_vector(gen, dim) * 1.2;
        const LorentzPoint t = LorentzPoint::from_space(ts, Curvature(cv));
        const LorentzPoint v = LorentzPoint::from_space(vs, Curvature(cv));
        if (2.0 * 0.1 / (std::sqrt(cv) * ts.norm()) > 0.95) continue;
        const double angle = exterior_angle(v, t);
        if (angle < 0.05 || angle > kPi - 0.05) continue;
        ++tested;

        const ExteriorAngleGrad g = exterior_angle_grad(v, t);
        // The closed form treats all four ambient blocks and c as free;
        // check against the raw formula evaluated off-manifold.
        auto raw_angle = [&](const Eigen::VectorXd& vsp, double vt,
                             const Eigen::VectorXd& tsp, double tt, double c) {
            const double cu = c * (tsp.dot(vsp) - tt * vt);
            const double q = cu * cu - 1.0;
            const double arg = (vt + tt * cu) / (tsp.norm() * std::sqrt(q));
            return std::acos(std::clamp(arg, -1.0, 1.0));
        };
        for (int k = 0; k < dim; ++k) {
            const double fd_v = central_diff(
                [&](double s) {
                    Eigen::VectorXd p = vs;
                    p[k] += s;
                    return raw_angle(p, v.time, ts, t.time, cv);
                },
                0.0);
            CHECK(close_rel(g.d_child_space[k], fd_v, 1e-4));
            const double fd_t = central_diff(
                [&](double s) {
                    Eigen::VectorXd p = ts;
                    p[k] += s;
                    return raw_angle(vs, v.time, p, t.time, cv);
                },
                0.0);
            CHECK(close_rel(g.d_parent_space[k], fd_t, 1e-4));
        }
        CHECK(close_rel(g.d_child_time,
                        central_diff([&](double s) {
                            return raw_angle(vs, v.time + s, ts, t.time, cv);
                        }, 0.0),
                        1e-4));
        CHECK(close_rel(g.d_parent_time,
                        central_diff([&](double s) {
                            return raw_angle(vs, v.time, ts, t.time + s, cv);
                        }, 0.0),
                        1e-4));
        CHECK(close_rel(g.d_curvature,
                        central_diff([&](double s) {
                            return raw_angle(vs, v.time, ts, t.time, cv + s);
                        }, 0.0),
                        1e-4));

        const HalfApertureGrad ag = half_aperture_grad(t);
        for (int k = 0; k < dim; ++k) {
            const double fd = central_diff(
                [&](double s) {
                    Eigen::VectorXd p = ts;
                    p[k] += s;
                    const double q = 0.2 / (std::sqrt(cv) * p.norm());
                    return std::asin(std::min(1.0, q));
                },
                0.0);
            CHECK(close_rel(ag.d_space[k], fd, 1e-4));
        }
        CHECK(close_rel(ag.d_curvature,
                        central_diff([&](double s) {
                            const double q = 0.2 / (std::sqrt(cv + s) * ts.norm());
                            return std::asin(std::min(1.0, q));
                        }, 0.0),
                        1e-4));
    }
}

TEST_CASE("expm_origin backward matches finite differences") {
    std::mt19937_64 gen(41);
    for (int i = 0; i < 30; ++i) {
        const int dim = 2 + static_cast<int>(gen() % 5);
        const double cv = random_uniform(gen, 0.1, 2.0);
        const Eigen::VectorXd v = random_vector(gen, dim, 1.2);
        const Eigen::VectorXd gs = random_vector(gen, dim);
        const double gt = random_uniform(gen, -1.0, 1.0);

        const ExpOriginBackward back =
            expm_origin_backward(Curvature(cv), v, gs, gt);

        auto scalarized = [&](const Eigen::VectorXd& feat, double c) {
            const LorentzPoint p = expm_origin(Curvature(c), feat);
            return gs.dot(p.space) + gt * p.time;
        };
        for (int k = 0; k < dim; ++k) {
            const double fd = central_diff(
                [&](double s) {
                    Eigen::VectorXd f = v;
                    f[k] += s;
                    return scalarized(f, cv);
                },
                0.0);
            CHECK(close_rel(back.d_features[k], fd, 1e-4));
        }
        const double fd_c =
            central_diff([&](double s) { return scalarized(v, cv + s); }, 0.0);
        CHECK(close_rel(back.d_curvature, fd_c, 1e-4));
    }
}

TEST_CASE("lorentz inner jvp is exact") {
    std::mt19937_64 gen(43);
    const Eigen::VectorXd x = random_vector(gen, 5);
    const Eigen::VectorXd y = random_vector(gen, 5);
    const Eigen::VectorXd dx = random_vector(gen, 5);
    const Eigen::VectorXd dy = random_vector(gen, 5);
    const double jvp = lorentz_inner_jvp(x, y, dx, dy);
    const double fd = central_diff(
        [&](double t) { return lorentz_inner(x + t * dx, y + t * dy); }, 0.0);
    CHECK(close_rel(jvp, fd, 1e-6));
}
