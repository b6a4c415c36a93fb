#include "treealign/manifold_distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace treealign {

namespace {

constexpr double kCoshOverflow = 700.0;
constexpr double kGoldenRatioConjugate = 0.6180339887498949; // (sqrt(5)-1)/2

void check_overflow(double ca, double cb, double r) {
    const double arg = std::abs(std::sqrt(cb) - std::sqrt(ca)) * r;
    if (arg > kCoshOverflow) {
        throw NumericError("manifold_distance: cosh argument " + std::to_string(arg) +
                           " would overflow");
    }
}

void check_radius(double r) {
    if (!(r > 0.0)) {
        throw ContractViolation("manifold distance requires a strictly positive radius");
    }
}

double distance_term(double ca, double cb, double r) {
    check_overflow(ca, cb, r);
    const double sa = std::sqrt(ca);
    const double sb = std::sqrt(cb);
    return (-sa + 2.0 * sb * std::cosh((sb - sa) * r)) / (2.0 * sa * cb);
}

/// dD(ca, c3)/dc3 = [sqrt(ca) - sqrt(c3) cosh(r d) + c3 r sinh(r d)] / (2 sqrt(ca) c3^2),
/// d = sqrt(c3) - sqrt(ca).
double distance_term_d1(double ca, double c3, double r) {
    check_overflow(ca, c3, r);
    const double sa = std::sqrt(ca);
    const double s3 = std::sqrt(c3);
    const double rd = r * (s3 - sa);
    const double n1 = sa - s3 * std::cosh(rd) + c3 * r * std::sinh(rd);
    return n1 / (2.0 * sa * c3 * c3);
}

double distance_term_d2(double ca, double c3, double r) {
    check_overflow(ca, c3, r);
    const double sa = std::sqrt(ca);
    const double s3 = std::sqrt(c3);
    const double rd = r * (s3 - sa);
    const double n2 = s3 * (3.0 + r * r * c3) * std::cosh(rd) -
                      3.0 * c3 * r * std::sinh(rd) - 4.0 * sa;
    return n2 / (4.0 * sa * c3 * c3 * c3);
}

/// d2D(ca, c3)/dc3 dca.
double distance_term_mixed(double ca, double c3, double r) {
    check_overflow(ca, c3, r);
    const double sa = std::sqrt(ca);
    const double s3 = std::sqrt(c3);
    const double rd = r * (s3 - sa);
    const double ch = std::cosh(rd);
    const double sh = std::sinh(rd);
    const double n1 = sa - s3 * ch + c3 * r * sh;
    const double dn1 = (1.0 + r * s3 * sh - r * r * c3 * ch) / (2.0 * sa);
    return dn1 / (2.0 * sa * c3 * c3) - n1 / (4.0 * sa * ca * c3 * c3);
}

double append_a(double y) {
    const double ac = std::acosh(y);
    return ac * ac - 2.0 * ac * y / std::sqrt(y * y - 1.0);
}

double append_b(double y) {
    return 2.0 * std::acosh(y) / std::sqrt(y * y - 1.0);
}

/// Single-curvature sufficient condition: max{1/sqrt(c), 2/L, ln(...)/L}
/// with L = sqrt(c) - sqrt(c_min). The L terms drop when L = 0.
void collect_single_terms(double c, double c_min, BindingTerm inv_term,
                          BindingTerm two_term, BindingTerm log_term,
                          std::vector<std::pair<double, BindingTerm>>& terms) {
    const double sc = std::sqrt(c);
    terms.emplace_back(1.0 / sc, inv_term);
    const double l = sc - std::sqrt(c_min);
    if (l > 0.0) {
        terms.emplace_back(2.0 / l, two_term);
        terms.emplace_back(std::log(12.0 * sc / (std::pow(c_min, 1.5) * l * l)) / l,
                           log_term);
    }
}

} // namespace

RadiusParameter::RadiusParameter(double radius, Source src) : r(radius), source(src) {
    if (!std::isfinite(radius) || radius < 0.0) {
        throw ContractViolation("radius parameter must be non-negative and finite, got " +
                                std::to_string(radius));
    }
}

const char* binding_term_name(BindingTerm term) {
    switch (term) {
        case BindingTerm::inv_sqrt_c_low: return "1/sqrt(c_low)";
        case BindingTerm::two_over_l: return "2/L";
        case BindingTerm::log_term_low: return "log_term(c_low)";
        case BindingTerm::inv_sqrt_c_high: return "1/sqrt(c_high)";
        case BindingTerm::two_over_m_min: return "2/M_min";
        case BindingTerm::log_term_high: return "log_term(c_high)";
        case BindingTerm::four_over_m: return "4/M";
        case BindingTerm::three_over_sqrt_c_high: return "3/sqrt(c_high)";
    }
    return "unknown";
}

double manifold_distance(Curvature c_a, Curvature c_b, const RadiusParameter& r) {
    check_radius(r.r);
    return distance_term(c_a.value(), c_b.value(), r.r);
}

double objective_jc(Curvature c3, Curvature c1, Curvature c2, const RadiusParameter& r) {
    check_radius(r.r);
    return distance_term(c1.value(), c3.value(), r.r) +
           distance_term(c2.value(), c3.value(), r.r);
}

namespace {

JcDerivatives jc_derivatives_raw(double x3, double x1, double x2, double r) {
    JcDerivatives d;
    d.d_c3 = distance_term_d1(x1, x3, r) + distance_term_d1(x2, x3, r);
    d.d_c3c3 = distance_term_d2(x1, x3, r) + distance_term_d2(x2, x3, r);
    d.d_c3c1 = distance_term_mixed(x1, x3, r);
    d.d_c3c2 = distance_term_mixed(x2, x3, r);
    return d;
}

} // namespace

JcDerivatives jc_derivatives(Curvature c3, Curvature c1, Curvature c2,
                             const RadiusParameter& r) {
    check_radius(r.r);
    return jc_derivatives_raw(c3.value(), c1.value(), c2.value(), r.r);
}

GoldenSectionResult golden_section_minimize(const std::function<double(double)>& f,
                                            double low, double high, double tol) {
    if (!(low < high)) {
        throw ContractViolation("golden_section_minimize: requires low < high");
    }
    if (!(tol > 0.0)) throw ContractViolation("golden_section_minimize: tol must be positive");

    const double rho = kGoldenRatioConjugate;
    double a = low;
    double b = high;
    double x1 = b - rho * (b - a);
    double x2 = a + rho * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    if (!std::isfinite(f1) || !std::isfinite(f2)) {
        throw NumericError("golden_section_minimize: non-finite objective value");
    }
    int iterations = 0;
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - rho * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + rho * (b - a);
            f2 = f(x2);
        }
        if (!std::isfinite(f1) || !std::isfinite(f2)) {
            throw NumericError("golden_section_minimize: non-finite objective value");
        }
        ++iterations;
    }
    const double x_star = f1 <= f2 ? x1 : x2;
    return {x_star, f1 <= f2 ? f1 : f2, iterations};
}

IntermediateSolution solve_intermediate(Curvature c1, Curvature c2,
                                        const RadiusParameter& r, double tol,
                                        double c_min) {
    check_radius(r.r);
    const double lo = std::min(c1.value(), c2.value());
    const double hi = std::max(c1.value(), c2.value());
    const ConvexityCertificate cert = r_min_threshold(c1, c2, c_min);
    const bool certified = cert.satisfied_for(r.r);

    auto objective = [&](double c3) {
        return distance_term(c1.value(), c3, r.r) + distance_term(c2.value(), c3, r.r);
    };
    auto derivative = [&](double c3) {
        return distance_term_d1(c1.value(), c3, r.r) +
               distance_term_d1(c2.value(), c3, r.r);
    };
    auto second = [&](double c3) {
        return distance_term_d2(c1.value(), c3, r.r) +
               distance_term_d2(c2.value(), c3, r.r);
    };

    double c3 = lo;
    int iterations = 0;
    if (hi > lo) {
        const GoldenSectionResult gs = golden_section_minimize(objective, lo, hi, tol);
        c3 = gs.x_star;
        iterations = gs.iterations;
    }

    // Newton polish on the closed-form derivative; golden section alone
    // cannot push the stationarity residual below the function-comparison
    // noise floor. Steps are clamped to the bracket.
    if (hi > lo) {
        for (int i = 0; i < 50; ++i) {
            const double d1 = derivative(c3);
            const double scale = std::max(1.0, std::abs(objective(c3)));
            if (std::abs(d1) <= 1e-10 * scale) break;
            const double d2 = second(c3);
            if (std::abs(d2) < 1e-12) {
                throw NumericError("solve_intermediate: singular Hessian at c3 = " +
                                   std::to_string(c3));
            }
            double next = c3 - d1 / d2;
            next = std::clamp(next, lo, hi);
            if (next == c3) break;
            c3 = next;
        }
    }

    const double hess = second(c3);
    if (std::abs(hess) < 1e-12) {
        throw NumericError("solve_intermediate: singular Hessian at c3 = " +
                           std::to_string(c3));
    }
    const JcDerivatives d = jc_derivatives_raw(c3, c1.value(), c2.value(), r.r);

    IntermediateSolution sol{
        Curvature(c3, std::min({c_min, c3, c1.floor(), c2.floor()})),
        -d.d_c3c1 / d.d_c3c3,
        -d.d_c3c2 / d.d_c3c3,
        objective(c3),
        lo,
        hi,
        iterations,
        certified,
    };
    return sol;
}

double solve_y1_star() {
    auto g = [](double y) { return append_a(y) + append_b(y) / 2.0; };
    double lo = 1.0 + 1e-6;
    double hi = 10.0;
    double glo = g(lo);
    double ghi = g(hi);
    if (glo * ghi > 0.0) {
        throw NumericError("solve_y1_star: no sign change on bracket");
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if (glo * gm < 0.0) {
            hi = mid;
            ghi = gm;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    return 0.5 * (lo + hi);
}

ConvexityCertificate r_min_threshold(Curvature c1, Curvature c2, double c_min) {
    if (!(c_min > 0.0) || !std::isfinite(c_min)) {
        throw ContractViolation("r_min_threshold: c_min must be positive and finite");
    }
    const double lo = std::min(c1.value(), c2.value());
    const double hi = std::max(c1.value(), c2.value());
    if (c_min > lo) {
        throw ContractViolation("r_min_threshold: c_min must not exceed min(c1, c2)");
    }

    std::vector<std::pair<double, BindingTerm>> terms;
    collect_single_terms(lo, c_min, BindingTerm::inv_sqrt_c_low, BindingTerm::two_over_l,
                         BindingTerm::log_term_low, terms);
    const double m = std::sqrt(hi) - std::sqrt(lo);
    if (m > 0.0) {
        collect_single_terms(hi, c_min, BindingTerm::inv_sqrt_c_high,
                             BindingTerm::two_over_m_min, BindingTerm::log_term_high,
                             terms);
        terms.emplace_back(4.0 / m, BindingTerm::four_over_m);
        terms.emplace_back(3.0 / std::sqrt(hi), BindingTerm::three_over_sqrt_c_high);
    }

    auto best = std::max_element(terms.begin(), terms.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
    return {best->first, best->second, false};
}

RadiusParameter compute_r(const std::vector<Eigen::VectorXd>& tangent_features) {
    if (tangent_features.empty()) {
        throw ContractViolation("compute_r: empty feature list");
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(tangent_features.front().size());
    for (const auto& f : tangent_features) {
        if (f.size() != mean.size()) {
            throw ContractViolation("compute_r: inconsistent feature dimensions");
        }
        mean += f;
    }
    mean /= static_cast<double>(tangent_features.size());
    return {mean.norm(), RadiusParameter::Source::batch_computed};
}

} // namespace treealign
