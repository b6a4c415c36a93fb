#pragma once

#include <functional>
#include <random>

#include <Eigen/Dense>

namespace test_support {

/// Central finite difference of a scalar function of one scalar input.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Relative agreement with an absolute floor so near-zero derivatives
/// compare sanely.
inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline Eigen::VectorXd random_vector(std::mt19937_64& gen, int n, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(gen);
    return v;
}

inline double random_uniform(std::mt19937_64& gen, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

} // namespace test_support
