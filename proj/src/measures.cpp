#include "wbea/measures.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wbea {

namespace {

// Decomposes an isotropic quadratic potential into curvature, linear part
// and center; throws for anything outside the supported family.
struct QuadraticForm {
    Rational curvature;
    std::vector<Rational> center;
};

QuadraticForm analyze_potential(const Polynomial& f) {
    const int d = f.dimension();
    if (f.degree() > 2) throw std::invalid_argument("potential degree exceeds 2");
    Rational a(0);
    bool have_a = false;
    std::vector<Rational> linear(static_cast<std::size_t>(d), Rational(0));
    for (const auto& [m, c] : f.terms()) {
        const int total = m.total();
        if (total == 0) continue;
        if (total == 1) {
            for (int i = 0; i < d; ++i)
                if (m[i] == 1) linear[static_cast<std::size_t>(i)] = c;
            continue;
        }
        // total == 2: require pure squares with a common coefficient.
        for (int i = 0; i < d; ++i)
            if (m[i] == 1) throw std::invalid_argument("potential has cross terms; not isotropic");
        const Rational cur = c * 2;
        if (have_a && cur != a) throw std::invalid_argument("potential is not isotropic");
        a = cur;
        have_a = true;
    }
    if (!have_a || a <= 0) throw std::invalid_argument("potential needs positive isotropic curvature");
    QuadraticForm q;
    q.curvature = a;
    q.center.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) q.center.push_back(-linear[static_cast<std::size_t>(i)] / a);
    return q;
}

}  // namespace

GibbsMeasure::GibbsMeasure(Polynomial potential, Rational beta)
    : potential_(std::move(potential)), beta_(std::move(beta)) {
    if (beta_ <= 0) throw std::invalid_argument("beta must be positive");
    auto q = analyze_potential(potential_);
    curvature_ = std::move(q.curvature);
    center_ = std::move(q.center);
    const double lam = to_double(effective_beta());
    log_normalizer_ = 0.5 * dimension() * std::log(lam / (2.0 * std::numbers::pi));
}

Rational GibbsMeasure::moment(const Polynomial& p) const {
    // Shift to centered coordinates, then use N(0, 1/(a beta)) moments.
    return gaussian_moment(p.translate(center_), effective_beta());
}

double GibbsMeasure::density(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dimension()) throw std::invalid_argument("density point dimension mismatch");
    const double lam = to_double(effective_beta());
    double q = 0.0;
    for (int i = 0; i < dimension(); ++i) {
        const double y = x[static_cast<std::size_t>(i)] - to_double(center_[static_cast<std::size_t>(i)]);
        q += y * y;
    }
    return std::exp(log_normalizer_ - 0.5 * lam * q);
}

namespace {

// Extracts (curvature, center) from an OU-type generator
//   sum_i -a (x_i - m_i) d_i + (1/beta) d_ii
// or throws.
QuadraticForm analyze_generator(const DiffOperator& langevin, const Rational& beta) {
    const int d = langevin.dimension();
    QuadraticForm q;
    q.center.assign(static_cast<std::size_t>(d), Rational(0));
    bool have_a = false;
    for (const auto& [alpha, phi] : langevin.terms()) {
        const int total = alpha.total();
        if (total == 1) {
            int i = -1;
            for (int c = 0; c < d; ++c)
                if (alpha[c] == 1) i = c;
            // Coefficient must be -a x_i + a m_i.
            if (phi.degree() > 1) throw std::invalid_argument("generator drift is not affine");
            MultiIndex xi = MultiIndex::unit(i);
            const Rational slope = phi.coeff(xi);
            for (const auto& [m, c] : phi.terms())
                if (!(m == xi) && !m.is_zero())
                    throw std::invalid_argument("generator drift couples coordinates");
            const Rational a = -slope;
            if (a <= 0) throw std::invalid_argument("generator drift must be contracting");
            if (have_a && a != q.curvature) throw std::invalid_argument("generator is not isotropic");
            q.curvature = a;
            have_a = true;
            q.center[static_cast<std::size_t>(i)] = phi.constant_term() / a;
        } else if (total == 2) {
            int i = -1;
            for (int c = 0; c < d; ++c) {
                if (alpha[c] == 2) i = c;
                if (alpha[c] == 1) throw std::invalid_argument("generator has mixed second derivatives");
            }
            (void)i;
            if (phi.degree() != 0 || phi.constant_term() != Rational(1) / beta)
                throw std::invalid_argument("generator diffusion does not match 1/beta");
        } else {
            throw std::invalid_argument("generator has unsupported derivative order");
        }
    }
    if (!have_a) throw std::invalid_argument("generator has no drift part");
    return q;
}

}  // namespace

Polynomial solve_poisson(const DiffOperator& langevin, const Polynomial& rhs, const Rational& beta) {
    if (langevin.dimension() != rhs.dimension()) throw std::invalid_argument("dimension mismatch");
    const auto form = analyze_generator(langevin, beta);
    const Rational lam = form.curvature * beta;

    const Polynomial centered = rhs.translate(form.center);
    HermiteSeries series = poly_to_hermite(centered, lam);
    if (series.coeff(MultiIndex::zero()) != 0)
        throw std::domain_error("Poisson right-hand side is not centered (no solution)");

    HermiteSeries solved(series.dimension(), lam);
    for (const auto& [k, c] : series.coeffs()) {
        if (k.is_zero()) continue;
        solved.set_coeff(k, c / (-form.curvature * Rational(k.total())));
    }
    Polynomial mu = hermite_to_poly(solved);
    // Back to original coordinates.
    std::vector<Rational> back;
    back.reserve(form.center.size());
    for (const auto& c : form.center) back.push_back(-c);
    return mu.translate(back);
}

std::vector<Polynomial> build_mu_cascade(const DiffOperator& langevin,
                                         const std::vector<DiffOperator>& correction_ops,
                                         const Polynomial& potential, const Rational& beta) {
    const int d = potential.dimension();
    std::vector<Polynomial> mus;
    std::vector<DiffOperator> adjoints;
    adjoints.reserve(correction_ops.size());
    for (const auto& op : correction_ops) adjoints.push_back(adjoint(op, potential, beta));

    std::vector<Polynomial> chain{Polynomial::constant(d, Rational(1))};  // mu_0 = 1
    for (std::size_t m = 1; m <= correction_ops.size(); ++m) {
        Polynomial g(d);
        for (std::size_t l = 1; l <= m; ++l) g -= apply(adjoints[l - 1], chain[m - l]);
        Polynomial mu = solve_poisson(langevin, g, beta);
        chain.push_back(mu);
        mus.push_back(std::move(mu));
    }
    return mus;
}

ModifiedMeasure::ModifiedMeasure(GibbsMeasure base, std::vector<Polynomial> corrections, Rational eta)
    : base_(std::move(base)), corrections_(std::move(corrections)), eta_(std::move(eta)) {
    if (eta_ < 0) throw std::invalid_argument("step size must be nonnegative");
    for (const auto& mu : corrections_) {
        if (mu.dimension() != base_.dimension()) throw std::invalid_argument("correction dimension mismatch");
        if (base_.moment(mu) != 0) throw std::invalid_argument("correction density is not centered");
    }
}

Rational ModifiedMeasure::integrate(const Polynomial& phi) const {
    Rational acc = base_.moment(phi);
    Rational etak(1);
    for (const auto& mu : corrections_) {
        etak *= eta_;
        acc += etak * base_.moment(phi * mu);
    }
    return acc;
}

double ModifiedMeasure::density(std::span<const double> x) const {
    double bracket = 1.0;
    const double eta = to_double(eta_);
    double etak = 1.0;
    for (const auto& mu : corrections_) {
        etak *= eta;
        bracket += etak * mu.eval(x);
    }
    return base_.density(x) * bracket;
}

ModifiedMeasure ModifiedMeasure::with_eta(Rational eta) const {
    return ModifiedMeasure(base_, corrections_, std::move(eta));
}

Rational negativity_threshold(const ModifiedMeasure& pi1) {
    if (pi1.order() != 1) throw std::invalid_argument("threshold is defined for first-order measures");
    const Polynomial& mu1 = pi1.corrections().front();
    if (mu1.degree() != 2) throw std::invalid_argument("threshold needs a quadratic correction");
    std::vector<Rational> origin(static_cast<std::size_t>(mu1.dimension()), Rational(0));
    const Rational v = mu1.eval_exact(origin);
    if (v >= 0) throw std::domain_error("correction is nonnegative at the origin; no sign change");
    return Rational(-1) / v;
}

ModifiedMeasure build_modified_measure(const Polynomial& potential, const MinibatchSpec& batch,
                                       const Rational& beta, const Rational& eta, int order) {
    GibbsMeasure base(potential, beta);
    if (order == 0) return ModifiedMeasure(std::move(base), {}, eta);
    const auto a_ops = one_step_expansion(batch, beta, order + 1);
    const auto l_ops = correction_operators(a_ops, order);
    auto mus = build_mu_cascade(a_ops[1], l_ops, potential, beta);
    return ModifiedMeasure(std::move(base), std::move(mus), eta);
}

}  // namespace wbea
