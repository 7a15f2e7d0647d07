#pragma once

#include <map>
#include <vector>

#include "wbea/polynomial.hpp"

namespace wbea {

// Series in the product basis of scaled probabilists' Hermite polynomials
// for the Gaussian with density proportional to exp(-beta |x|^2 / 2).
//
// Coefficients are stored against the monic variants
//     h_k(x) = beta^{-k/2} He_k(sqrt(beta) x),
// which satisfy h_{k+1} = x h_k - (k/beta) h_{k-1} and therefore have
// rational coefficients for every k and rational beta. The coefficient in
// the raw basis He_k(sqrt(beta) x) is recovered by multiplying with
// beta^{|k|/2}; `he_coeff` does this where the power is rational.
class HermiteSeries {
public:
    using CoeffMap = std::map<MultiIndex, Rational, GradedLess>;

    HermiteSeries(int dimension, Rational beta);

    int dimension() const { return dim_; }
    const Rational& beta() const { return beta_; }
    const CoeffMap& coeffs() const { return coeffs_; }

    // Coefficient against the monic basis h_k.
    Rational coeff(const MultiIndex& k) const;
    // Coefficient against He_k(sqrt(beta) x); exact for even |k| (and for
    // odd |k| when beta is a perfect rational square).
    Rational he_coeff(const MultiIndex& k) const;

    void set_coeff(const MultiIndex& k, const Rational& c);

    bool operator==(const HermiteSeries& o) const = default;

private:
    int dim_;
    Rational beta_;
    CoeffMap coeffs_;
};

// Monic scaled Hermite polynomial h_k in one chosen coordinate of a
// d-dimensional polynomial ring.
Polynomial hermite_monic(int dimension, int coordinate, int k, const Rational& beta);

// Exact change of basis; the two maps compose to the identity.
HermiteSeries poly_to_hermite(const Polynomial& p, const Rational& beta);
Polynomial hermite_to_poly(const HermiteSeries& series);

// Integral of p against the Gaussian exp(-beta |x|^2 / 2) (normalized),
// computed termwise from the closed-form moments of N(0, 1/beta). Equals
// the k = 0 coefficient of poly_to_hermite(p, beta).
Rational gaussian_moment(const Polynomial& p, const Rational& beta);

// Bernoulli number B_n in the convention B_1 = -1/2, from the defining
// recurrence sum_{j<=m} C(m+1, j) B_j = 0.
Rational bernoulli(unsigned n);

}  // namespace wbea
