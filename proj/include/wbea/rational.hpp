#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace wbea {

// Exact rational scalar used throughout the algebra layer. Stored in lowest
// terms with positive denominator; arithmetic never rounds.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational rat(long long num, long long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    return Rational(num, den);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Exact conversion: every finite double is a dyadic rational.
Rational rational_from_double(double x);

// Parses "p/q" or "p"; whitespace around tokens is ignored.
Rational parse_rational(const std::string& text);

std::string to_string(const Rational& r);

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

// r^e for integer e (e < 0 requires r != 0).
Rational pow_rational(const Rational& r, long e);

// n! as a rational (exact).
Rational factorial_rational(unsigned n);

// Binomial coefficient C(n, k).
BigInt binomial(unsigned n, unsigned k);

}  // namespace wbea
