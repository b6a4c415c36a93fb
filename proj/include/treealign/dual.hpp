#pragma once

#include <cmath>

namespace treealign {

/// First-order forward-mode scalar: value plus derivative along one
/// seeded direction. Used to expose exact directional derivatives of
/// the geometry kernels without duplicating their formulas.
struct Dual {
    double v = 0.0;
    double d = 0.0;

    Dual() = default;
    Dual(double value) : v(value) {} // NOLINT: implicit by design for literals
    Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
inline Dual& operator+=(Dual& a, Dual b) { a = a + b; return a; }
inline Dual& operator-=(Dual& a, Dual b) { a = a - b; return a; }
inline Dual& operator*=(Dual& a, Dual b) { a = a * b; return a; }
inline Dual& operator/=(Dual& a, Dual b) { a = a / b; return a; }

inline bool operator<(Dual a, Dual b) { return a.v < b.v; }
inline bool operator>(Dual a, Dual b) { return a.v > b.v; }
inline bool operator<=(Dual a, Dual b) { return a.v <= b.v; }
inline bool operator>=(Dual a, Dual b) { return a.v >= b.v; }
inline bool operator==(Dual a, Dual b) { return a.v == b.v; }
inline bool operator!=(Dual a, Dual b) { return a.v != b.v; }

inline Dual sqrt(Dual x) {
    const double s = std::sqrt(x.v);
    return {s, x.d / (2.0 * s)};
}
inline Dual cosh(Dual x) { return {std::cosh(x.v), x.d * std::sinh(x.v)}; }
inline Dual sinh(Dual x) { return {std::sinh(x.v), x.d * std::cosh(x.v)}; }
inline Dual exp(Dual x) {
    const double e = std::exp(x.v);
    return {e, x.d * e};
}
inline Dual log(Dual x) { return {std::log(x.v), x.d / x.v}; }
inline Dual acosh(Dual x) {
    return {std::acosh(x.v), x.d / std::sqrt(x.v * x.v - 1.0)};
}
inline Dual asin(Dual x) {
    return {std::asin(x.v), x.d / std::sqrt(1.0 - x.v * x.v)};
}
inline Dual acos(Dual x) {
    return {std::acos(x.v), -x.d / std::sqrt(1.0 - x.v * x.v)};
}
inline Dual abs(Dual x) { return x.v < 0.0 ? -x : x; }
inline Dual min(Dual a, Dual b) { return a.v <= b.v ? a : b; }
inline Dual max(Dual a, Dual b) { return a.v >= b.v ? a : b; }

inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.v; }

} // namespace treealign
