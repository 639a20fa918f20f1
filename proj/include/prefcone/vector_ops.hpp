#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <vector>

namespace prefcone {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline bool is_zero(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; });
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vector negate(std::span<const double> a) {
    Vector out(a.begin(), a.end());
    for (double& x : out) x = -x;
    return out;
}

inline Vector scaled(std::span<const double> a, double s) {
    Vector out(a.begin(), a.end());
    for (double& x : out) x *= s;
    return out;
}

/// Unit 2-norm copy; the zero vector is returned unchanged.
inline Vector normalized(std::span<const double> a) {
    const double n = norm2(a);
    return n > 0.0 ? scaled(a, 1.0 / n) : Vector(a.begin(), a.end());
}

/// out += s * a
inline void axpy(double s, std::span<const double> a, std::span<double> out) {
    assert(a.size() == out.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += s * a[i];
}

}  // namespace prefcone
