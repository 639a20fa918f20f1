#pragma once

#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

namespace prefcone {

using Rational = boost::multiprecision::cpp_rational;

/// Tolerances for the arithmetic a kernel runs in. Exact types compare against zero.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    /// Primal/dual feasibility tolerance.
    static double tolerance() { return 1e-9; }
    /// Smallest magnitude accepted as a pivot.
    static double pivot_tolerance() { return 1e-9; }
    static double abs(double x) { return std::abs(x); }
    static double to_double(double x) { return x; }
    static double from_double(double x) { return x; }
};

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static Rational tolerance() { return Rational(0); }
    static Rational pivot_tolerance() { return Rational(0); }
    static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
    static double to_double(const Rational& x) { return x.convert_to<double>(); }
    /// Exact value of the binary double.
    static Rational from_double(double x) { return Rational(x); }
};

}  // namespace prefcone
