#include "wbea/hermite.hpp"

#include <stdexcept>

namespace wbea {

namespace {

void check_beta(const Rational& beta) {
    if (beta <= 0) throw std::invalid_argument("beta must be positive");
}

// Exact square root of a rational if it exists.
bool rational_sqrt(const Rational& r, Rational& out) {
    if (r < 0) return false;
    const BigInt n = numerator(r), d = denominator(r);
    const BigInt sn = sqrt(n), sd = sqrt(d);
    if (sn * sn != n || sd * sd != d) return false;
    out = Rational(sn, sd);
    return true;
}

}  // namespace

HermiteSeries::HermiteSeries(int dimension, Rational beta) : dim_(dimension), beta_(std::move(beta)) {
    if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("hermite series dimension out of range");
    check_beta(beta_);
}

Rational HermiteSeries::coeff(const MultiIndex& k) const {
    const auto it = coeffs_.find(k);
    return it == coeffs_.end() ? Rational(0) : it->second;
}

Rational HermiteSeries::he_coeff(const MultiIndex& k) const {
    const Rational b = coeff(k);
    const int total = k.total();
    if (total % 2 == 0) return b * pow_rational(beta_, -(total / 2));
    Rational root;
    if (!rational_sqrt(beta_, root))
        throw std::domain_error("He-basis coefficient is irrational for odd |k| and non-square beta");
    return b * pow_rational(root, -total);
}

void HermiteSeries::set_coeff(const MultiIndex& k, const Rational& c) {
    if (c == 0) {
        coeffs_.erase(k);
    } else {
        coeffs_[k] = c;
    }
}

Polynomial hermite_monic(int dimension, int coordinate, int k, const Rational& beta) {
    check_beta(beta);
    const Polynomial x = Polynomial::variable(dimension, coordinate);
    Polynomial prev = Polynomial::constant(dimension, Rational(1));
    if (k == 0) return prev;
    Polynomial cur = x;
    for (int j = 1; j < k; ++j) {
        Polynomial next = x * cur - prev * (Rational(j) / beta);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

HermiteSeries poly_to_hermite(const Polynomial& p, const Rational& beta) {
    check_beta(beta);
    HermiteSeries series(p.dimension(), beta);
    // Reduce from the top: the basis element for multi-index k is monic with
    // leading monomial x^k, so peeling the current leading term strictly
    // lowers the remainder in the graded order.
    Polynomial rem = p;
    while (!rem.is_zero()) {
        const auto& top = *rem.terms().rbegin();
        const MultiIndex k = top.first;
        const Rational c = top.second;
        Polynomial basis = Polynomial::constant(p.dimension(), Rational(1));
        for (int i = 0; i < p.dimension(); ++i)
            if (k[i] != 0) basis = basis * hermite_monic(p.dimension(), i, k[i], beta);
        rem -= basis * c;
        series.set_coeff(k, c);
    }
    return series;
}

Polynomial hermite_to_poly(const HermiteSeries& series) {
    Polynomial p(series.dimension());
    for (const auto& [k, c] : series.coeffs()) {
        Polynomial basis = Polynomial::constant(series.dimension(), Rational(1));
        for (int i = 0; i < series.dimension(); ++i)
            if (k[i] != 0) basis = basis * hermite_monic(series.dimension(), i, k[i], series.beta());
        p += basis * c;
    }
    return p;
}

Rational gaussian_moment(const Polynomial& p, const Rational& beta) {
    check_beta(beta);
    Rational acc(0);
    for (const auto& [m, c] : p.terms()) {
        Rational t = c;
        bool odd = false;
        for (int i = 0; i < p.dimension() && !odd; ++i) {
            const int a = m[i];
            if (a % 2 != 0) {
                odd = true;
                break;
            }
            if (a == 0) continue;
            // E[x^a] = (a-1)!! / beta^{a/2} under N(0, 1/beta).
            BigInt dfact = 1;
            for (int j = a - 1; j >= 1; j -= 2) dfact *= j;
            t *= Rational(dfact) * pow_rational(beta, -(a / 2));
        }
        if (!odd) acc += t;
    }
    return acc;
}

Rational bernoulli(unsigned n) {
    static std::vector<Rational> cache{Rational(1)};
    while (cache.size() <= n) {
        const unsigned m = static_cast<unsigned>(cache.size());
        Rational s(0);
        for (unsigned j = 0; j < m; ++j) s += Rational(binomial(m + 1, j)) * cache[j];
        cache.push_back(-s / Rational(m + 1));
    }
    return cache[n];
}

}  // namespace wbea
