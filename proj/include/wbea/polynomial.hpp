#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "wbea/multi_index.hpp"
#include "wbea/rational.hpp"

namespace wbea {

// Sparse multivariate polynomial with exact rational coefficients.
// Immutable in spirit: every operation returns a fresh value, zero
// coefficients are never stored, and the dimension is fixed at
// construction (1 <= d <= kMaxDim).
class Polynomial {
public:
    using TermMap = std::map<MultiIndex, Rational, GradedLess>;

    explicit Polynomial(int dimension = 1);

    static Polynomial zero(int dimension) { return Polynomial(dimension); }
    static Polynomial constant(int dimension, const Rational& c);
    // The coordinate monomial x_i (0-based).
    static Polynomial variable(int dimension, int i);
    static Polynomial monomial(int dimension, const MultiIndex& m, const Rational& c);

    int dimension() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    // Total degree; -1 for the zero polynomial.
    int degree() const;
    Rational coeff(const MultiIndex& m) const;
    Rational constant_term() const { return coeff(MultiIndex::zero()); }

    Polynomial operator-() const;
    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(const Rational& c) const;
    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);

    bool operator==(const Polynomial& o) const = default;

    // d/dx_i, and the general mixed derivative.
    Polynomial derivative(int i) const;
    Polynomial derivative(const MultiIndex& order) const;

    // Substitute x -> x + shift (exact).
    Polynomial translate(std::span<const Rational> shift) const;

    double eval(std::span<const double> x) const;
    Rational eval_exact(std::span<const Rational> x) const;

    // Parity under x -> -x: +1 even, -1 odd, 0 mixed (nonzero in both parts).
    int parity() const;

    void add_term(const MultiIndex& m, const Rational& c);

    std::string str() const;

private:
    int dim_;
    TermMap terms_;
};

inline Polynomial operator*(const Rational& c, const Polynomial& p) { return p * c; }

// Textual literal: terms "coef * x1^a1*...*xd^ad" joined by '+' (or a bare
// leading '-'), rationals as "p/q". Example: "3/2 * x1^2*x2 + -1/2".
Polynomial parse_polynomial(const std::string& text, int dimension);

}  // namespace wbea
