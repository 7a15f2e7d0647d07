#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wbea/expansion.hpp"
#include "wbea/hermite.hpp"
#include "wbea/operators.hpp"

namespace wbea {

// Gibbs measure exp(-beta F) / Z for an isotropic quadratic potential
//     F = (a/2) |x|^2 + <s, x> + const,   a > 0,
// i.e. a product Gaussian N(center, 1/(a beta)) per coordinate. This covers
// every exactly solvable case in the pipeline; anything else is rejected.
class GibbsMeasure {
public:
    GibbsMeasure(Polynomial potential, Rational beta);

    int dimension() const { return potential_.dimension(); }
    const Polynomial& potential() const { return potential_; }
    const Rational& beta() const { return beta_; }
    const Rational& curvature() const { return curvature_; }
    const std::vector<Rational>& center() const { return center_; }
    // Effective per-coordinate inverse variance a * beta.
    Rational effective_beta() const { return curvature_ * beta_; }
    double log_normalizer() const { return log_normalizer_; }

    // Exact integral of a polynomial against the measure.
    Rational moment(const Polynomial& p) const;
    double density(std::span<const double> x) const;

    DiffOperator langevin_generator() const { return generator(potential_, beta_); }

private:
    Polynomial potential_;
    Rational beta_;
    Rational curvature_;
    std::vector<Rational> center_;
    double log_normalizer_;
};

// Solves L mu = G for the generator of an isotropic quadratic potential,
// with the centering normalization int mu drho = 0. The Hermite basis
// diagonalizes L (eigenvalue -a |k|), so the solve is exact division.
// Throws if G fails the solvability constraint int G drho = 0 exactly,
// or if L is not of the supported form.
Polynomial solve_poisson(const DiffOperator& langevin, const Polynomial& rhs, const Rational& beta);

// Correction densities mu_1..mu_N from the Poisson cascade
//     L mu_m = - sum_{l=1}^{m} (L_l)* mu_{m-l},   mu_0 = 1,
// where the adjoints are taken against exp(-beta F). Every right-hand side
// is checked for exact solvability before the solve.
std::vector<Polynomial> build_mu_cascade(const DiffOperator& langevin,
                                         const std::vector<DiffOperator>& correction_ops,
                                         const Polynomial& potential, const Rational& beta);

// Gibbs base together with the correction ladder: the density is
//     rho(x) (1 + eta mu_1(x) + ... + eta^N mu_N(x)),
// a signed measure once the bracket goes negative. Total mass is exactly 1
// because every mu_k is centered.
class ModifiedMeasure {
public:
    ModifiedMeasure(GibbsMeasure base, std::vector<Polynomial> corrections, Rational eta);

    const GibbsMeasure& base() const { return base_; }
    const std::vector<Polynomial>& corrections() const { return corrections_; }
    const Rational& eta() const { return eta_; }
    int order() const { return static_cast<int>(corrections_.size()); }

    // rho(phi) + sum_k eta^k rho(phi mu_k), exact.
    Rational integrate(const Polynomial& phi) const;
    double integrate_d(const Polynomial& phi) const { return to_double(integrate(phi)); }

    // Pointwise density; may be negative.
    double density(std::span<const double> x) const;

    // With-eta variants used by sweeps (same corrections, different step).
    ModifiedMeasure with_eta(Rational eta) const;

private:
    GibbsMeasure base_;
    std::vector<Polynomial> corrections_;
    Rational eta_;
};

// Step size above which the first-order density turns negative at the
// origin: eta* = -1 / mu_1(0). Requires a first-order measure whose mu_1
// has negative value at the origin.
Rational negativity_threshold(const ModifiedMeasure& pi1);

// Convenience: the full pipeline for a minibatch loss with isotropic
// quadratic empirical potential. Builds A_0..A_{N+1}, the correction
// operators L_1..L_N, the cascade, and the measure.
ModifiedMeasure build_modified_measure(const Polynomial& potential, const MinibatchSpec& batch,
                                       const Rational& beta, const Rational& eta, int order);

}  // namespace wbea
