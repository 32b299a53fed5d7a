#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kanode {

/// Thrown when a caller violates an interface precondition (dimension
/// mismatches, out-of-range indices, malformed arguments).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

/// Gaussian radial basis function exp(-r^2 / 2h^2).
inline double rbf(double r, double h) {
    return std::exp(-(r * r) / (2.0 * h * h));
}

/// d/dr of rbf(r, h) = -(r/h^2) * rbf(r, h).
inline double rbf_deriv(double r, double h) {
    return -(r / (h * h)) * rbf(r, h);
}

inline double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

/// Swish activation x * sigmoid(x).
inline double swish(double x) {
    return x * sigmoid(x);
}

/// d/dx of swish: s(x) * (1 + x * (1 - s(x))).
inline double swish_deriv(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

inline double tanh_deriv_from_value(double t) {
    return 1.0 - t * t;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline std::vector<double> linspace(double a, double b, int n) {
    require(n >= 1, "linspace: n must be >= 1");
    std::vector<double> xs(n);
    if (n == 1) {
        xs[0] = a;
        return xs;
    }
    for (int i = 0; i < n; ++i) xs[i] = a + (b - a) * double(i) / double(n - 1);
    return xs;
}

}  // namespace kanode
