#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "wbea/expansion.hpp"
#include "wbea/hermite.hpp"
#include "wbea/operators.hpp"

using namespace wbea;
using testutil::random_polynomial;
using testutil::random_small_rational;

namespace {

Polynomial ou_potential(int dim) {
    Polynomial f(dim);
    for (int i = 0; i < dim; ++i) {
        MultiIndex m;
        m[i] = 2;
        f.add_term(m, Rational(1, 2));
    }
    return f;
}

DiffOperator random_operator(std::mt19937_64& rng, int dim, int max_order, int max_coeff_deg) {
    DiffOperator op(dim);
    const int nterms = 2 + static_cast<int>(rng() % 3);
    for (int t = 0; t < nterms; ++t) {
        MultiIndex alpha;
        int budget = static_cast<int>(rng() % (static_cast<unsigned>(max_order) + 1));
        for (int i = 0; i < dim && budget > 0; ++i) {
            const int e = static_cast<int>(rng() % (static_cast<unsigned>(budget) + 1));
            alpha[i] = static_cast<std::uint8_t>(e);
            budget -= e;
        }
        op.add_term(alpha, random_polynomial(rng, dim, max_coeff_deg, 3));
    }
    return op;
}

// Product-Gaussian moment for a diagonal quadratic weight
// exp(-beta sum_i a_i x_i^2 / 2); independent of the library's
// isotropic-only path.
Rational diag_gaussian_moment(const Polynomial& p, const Rational& beta, const std::vector<Rational>& diag) {
    Rational acc(0);
    for (const auto& [m, c] : p.terms()) {
        Rational t = c;
        bool odd = false;
        for (int i = 0; i < p.dimension(); ++i) {
            const int a = m[i];
            if (a % 2 != 0) {
                odd = true;
                break;
            }
            BigInt dfact = 1;
            for (int j = a - 1; j >= 1; j -= 2) dfact *= j;
            t *= Rational(dfact) * pow_rational(beta * diag[static_cast<std::size_t>(i)], -(a / 2));
        }
        if (!odd) acc += t;
    }
    return acc;
}

}  // namespace

TEST_CASE("apply differentiates exactly") {
    const Rational beta(5);
    const DiffOperator l = generator(ou_potential(1), beta);

    // L x^2 = -2 x^2 + 2/beta (hand differentiation).
    Polynomial x2(1);
    MultiIndex m2;
    m2[0] = 2;
    x2.add_term(m2, Rational(1));
    Polynomial expected(1);
    expected.add_term(m2, Rational(-2));
    expected.add_term(MultiIndex::zero(), Rational(2) / beta);
    CHECK(apply(l, x2) == expected);

    // Identity operator.
    std::mt19937_64 rng(3);
    for (int c = 0; c < 10; ++c) {
        const Polynomial p = random_polynomial(rng, 2, 5, 4);
        CHECK(apply(DiffOperator::identity(2), p) == p);
    }

    // He_2(sqrt(beta) x) is an eigenfunction with eigenvalue -2.
    Polynomial he2(1);
    he2.add_term(m2, beta);
    he2.add_term(MultiIndex::zero(), Rational(-1));
    CHECK(apply(l, he2) == he2 * Rational(-2));
}

TEST_CASE("compose follows the product rule") {
    // d/dx composed with multiplication by x: x d + 1.
    const Polynomial x = Polynomial::variable(1, 0);
    const DiffOperator d = DiffOperator::partial(1, 0);
    const DiffOperator mul_x = DiffOperator::multiply_by(x);
    const DiffOperator prod = compose(d, mul_x);
    CHECK(prod.coefficient(MultiIndex::unit(0)) == x);
    CHECK(prod.coefficient(MultiIndex::zero()) == Polynomial::constant(1, Rational(1)));

    std::mt19937_64 rng(5);
    const DiffOperator b = random_operator(rng, 2, 3, 3);
    CHECK(compose(DiffOperator::identity(2), b) == b);
    CHECK(compose(b, DiffOperator::identity(2)) == b);
}

TEST_CASE("compose of the OU generator with itself") {
    const Rational beta(7);
    const DiffOperator l = generator(ou_potential(1), beta);
    const DiffOperator l2 = compose(l, l);

    // x d + (x^2 - 2/beta) d^2 - (2x/beta) d^3 + (1/beta^2) d^4
    const Polynomial x = Polynomial::variable(1, 0);
    MultiIndex m2, m3, m4;
    m2[0] = 2;
    m3[0] = 3;
    m4[0] = 4;
    CHECK(l2.coefficient(MultiIndex::unit(0)) == x);
    Polynomial c2 = x * x;
    c2.add_term(MultiIndex::zero(), Rational(-2) / beta);
    CHECK(l2.coefficient(m2) == c2);
    CHECK(l2.coefficient(m3) == x * (Rational(-2) / beta));
    CHECK(l2.coefficient(m4) == Polynomial::constant(1, pow_rational(beta, -2)));
    CHECK(l2.terms().size() == 4);
}

TEST_CASE("compose agrees with sequential application") {
    std::mt19937_64 rng(9);
    for (int c = 0; c < 200; ++c) {
        const int dim = 1 + static_cast<int>(rng() % 2);
        const DiffOperator a = random_operator(rng, dim, 3, 3);
        const DiffOperator b = random_operator(rng, dim, 3, 3);
        const Polynomial p = random_polynomial(rng, dim, 5, 4);
        CHECK(apply(compose(a, b), p) == apply(a, apply(b, p)));
    }
}

TEST_CASE("compose is associative") {
    std::mt19937_64 rng(23);
    for (int c = 0; c < 200; ++c) {
        const int dim = 1 + static_cast<int>(rng() % 2);
        const DiffOperator a = random_operator(rng, dim, 2, 2);
        const DiffOperator b = random_operator(rng, dim, 2, 2);
        const DiffOperator d = random_operator(rng, dim, 2, 2);
        CHECK(compose(compose(a, b), d) == compose(a, compose(b, d)));
    }
}

TEST_CASE("generator construction") {
    const Rational beta(5);
    // F = x^2/2 gives -x d + (1/beta) d^2.
    const DiffOperator l = generator(ou_potential(1), beta);
    CHECK(l.coefficient(MultiIndex::unit(0)) == -Polynomial::variable(1, 0));
    MultiIndex m2;
    m2[0] = 2;
    CHECK(l.coefficient(m2) == Polynomial::constant(1, Rational(1) / beta));
    CHECK(l.terms().size() == 2);

    // Constant potential leaves only the diffusion.
    const DiffOperator heat = generator(Polynomial::constant(2, Rational(4)), beta);
    CHECK(heat.terms().size() == 2);
    for (const auto& [alpha, phi] : heat.terms()) {
        CHECK(alpha.total() == 2);
        CHECK(phi == Polynomial::constant(2, Rational(1) / beta));
    }

    // F = |x|^2/2 in two dimensions expands coordinatewise.
    const DiffOperator l2 = generator(ou_potential(2), beta);
    CHECK(l2.coefficient(MultiIndex::unit(0)) == -Polynomial::variable(2, 0));
    CHECK(l2.coefficient(MultiIndex::unit(1)) == -Polynomial::variable(2, 1));
    CHECK(l2.terms().size() == 4);
}

TEST_CASE("adjoint matches the closed forms for the quadratic weight") {
    const Rational beta(5);
    const Polynomial f = ou_potential(1);
    const Polynomial x = Polynomial::variable(1, 0);

    // (d)* = -d + beta x.
    const DiffOperator dstar = adjoint(DiffOperator::partial(1, 0), f, beta);
    CHECK(dstar.coefficient(MultiIndex::unit(0)) == Polynomial::constant(1, Rational(-1)));
    CHECK(dstar.coefficient(MultiIndex::zero()) == x * beta);

    // (d^2)* = d^2 - 2 beta x d + beta^2 x^2 - beta.
    MultiIndex m2;
    m2[0] = 2;
    const DiffOperator d2star = adjoint(DiffOperator::partial(1, m2), f, beta);
    CHECK(d2star.coefficient(m2) == Polynomial::constant(1, Rational(1)));
    CHECK(d2star.coefficient(MultiIndex::unit(0)) == x * (-2 * beta));
    Polynomial zero_order = x * x * (beta * beta);
    zero_order.add_term(MultiIndex::zero(), -beta);
    CHECK(d2star.coefficient(MultiIndex::zero()) == zero_order);

    // The OU generator is self-adjoint.
    const DiffOperator l = generator(f, beta);
    CHECK(adjoint(l, f, beta) == l);
}

TEST_CASE("adjoint duality against the Gibbs weight") {
    std::mt19937_64 rng(29);
    // Isotropic: direct gaussian_moment identity.
    for (int c = 0; c < 200; ++c) {
        const int dim = 1 + static_cast<int>(rng() % 2);
        const Rational beta(1 + static_cast<long long>(rng() % 4));
        const Polynomial fpot = ou_potential(dim);
        const DiffOperator op = random_operator(rng, dim, 4, 4);
        const Polynomial f = random_polynomial(rng, dim, 4, 4);
        const Polynomial g = random_polynomial(rng, dim, 4, 4);
        const DiffOperator op_star = adjoint(op, fpot, beta);
        CHECK(gaussian_moment(apply(op, f) * g, beta) == gaussian_moment(f * apply(op_star, g), beta));
    }

    // Diagonal quadratic weight, checked against an independent product
    // moment formula.
    for (int c = 0; c < 50; ++c) {
        const int dim = 2;
        const Rational beta(2);
        std::vector<Rational> diag{Rational(1 + static_cast<long long>(rng() % 3)),
                                   Rational(1 + static_cast<long long>(rng() % 3))};
        Polynomial fpot(dim);
        for (int i = 0; i < dim; ++i) {
            MultiIndex m;
            m[i] = 2;
            fpot.add_term(m, diag[static_cast<std::size_t>(i)] / 2);
        }
        const DiffOperator op = random_operator(rng, dim, 3, 3);
        const Polynomial f = random_polynomial(rng, dim, 3, 3);
        const Polynomial g = random_polynomial(rng, dim, 3, 3);
        const DiffOperator op_star = adjoint(op, fpot, beta);
        CHECK(diag_gaussian_moment(apply(op, f) * g, beta, diag) ==
              diag_gaussian_moment(f * apply(op_star, g), beta, diag));
    }
}

TEST_CASE("adjoint is an involution") {
    std::mt19937_64 rng(31);
    for (int c = 0; c < 100; ++c) {
        const int dim = 1 + static_cast<int>(rng() % 2);
        const Rational beta(1 + static_cast<long long>(rng() % 4));
        const Polynomial fpot = ou_potential(dim);
        const DiffOperator op = random_operator(rng, dim, 3, 3);
        CHECK(adjoint(adjoint(op, fpot, beta), fpot, beta) == op);
    }
}

namespace {

MinibatchSpec quadratic_data_batch(const std::vector<Rational>& data, int batch_size) {
    // f(x, z) = (x - z)^2 / 2 in one dimension: gradient x - z.
    std::vector<std::vector<Polynomial>> grads;
    for (const auto& z : data) {
        Polynomial g = Polynomial::variable(1, 0);
        g.add_term(MultiIndex::zero(), -z);
        grads.push_back({g});
    }
    MinibatchSpec spec;
    spec.gradients = std::move(grads);
    spec.batch_size = batch_size;
    spec.validate();
    return spec;
}

MinibatchSpec ou_batch(int dim) {
    std::vector<Polynomial> g;
    for (int i = 0; i < dim; ++i) g.push_back(Polynomial::variable(dim, i));
    return MinibatchSpec::full_batch({g});
}

// Exhaustive with-replacement enumeration of E[prod_m d_{c_m} F_batch]:
// every batch index tuple has probability n^{-n_b}.
Polynomial enumerated_moment(const MinibatchSpec& batch, const std::vector<int>& coords) {
    const int n = batch.data_count();
    const int nb = batch.batch_size;
    const int d = batch.dimension();
    std::vector<int> tuple(static_cast<std::size_t>(nb), 0);
    Polynomial total(d);
    long count = 0;
    for (;;) {
        Polynomial prod = Polynomial::constant(d, Rational(1));
        for (int c : coords) {
            Polynomial avg(d);
            for (int m = 0; m < nb; ++m)
                avg += batch.gradients[static_cast<std::size_t>(tuple[static_cast<std::size_t>(m)])]
                                      [static_cast<std::size_t>(c)];
            prod = prod * (avg * Rational(1, nb));
        }
        total += prod;
        ++count;
        int i = 0;
        for (; i < nb; ++i) {
            if (++tuple[static_cast<std::size_t>(i)] < n) break;
            tuple[static_cast<std::size_t>(i)] = 0;
        }
        if (i == nb) break;
    }
    return total * (Rational(1) / Rational(count));
}

}  // namespace

TEST_CASE("minibatch gradient moments") {
    const MinibatchSpec batch = quadratic_data_batch({Rational(-1), Rational(0), Rational(2)}, 2);

    // First order is the full-batch gradient regardless of batch size.
    CHECK(gradient_product_moment(batch, {0}) == batch.mean_gradient(0));

    // Second and third order match exhaustive enumeration.
    for (int n = 2; n <= 4; ++n) {
        std::vector<Rational> data;
        for (int i = 0; i < n; ++i) data.push_back(Rational(2 * i - n, 2));
        for (int nb = 1; nb <= std::min(n, 3); ++nb) {
            const MinibatchSpec b = quadratic_data_batch(data, nb);
            CHECK(gradient_product_moment(b, {0, 0}) == enumerated_moment(b, {0, 0}));
            CHECK(gradient_product_moment(b, {0, 0, 0}) == enumerated_moment(b, {0, 0, 0}));
        }
    }

    // Identical data: no subsampling variance at any order.
    const MinibatchSpec same = quadratic_data_batch({Rational(3), Rational(3)}, 1);
    const Polynomial g0 = same.gradients[0][0];
    CHECK(gradient_product_moment(same, {0, 0}) == g0 * g0);
    CHECK(gradient_product_moment(same, {0, 0, 0, 0}) == g0 * g0 * g0 * g0);

    // Unsupported order for genuinely random batches.
    CHECK_THROWS(gradient_product_moment(batch, {0, 0, 0, 0}));
}

TEST_CASE("one step expansion starts with identity and generator") {
    const Rational beta(5);
    for (int dim : {1, 2}) {
        const auto a = one_step_expansion(ou_batch(dim), beta, 2);
        CHECK(a[0] == DiffOperator::identity(dim));
        CHECK(a[1] == generator(ou_potential(dim), beta));
    }
    const MinibatchSpec batch = quadratic_data_batch({Rational(-1), Rational(1), Rational(2)}, 2);
    const auto a = one_step_expansion(batch, beta, 2);
    CHECK(a[0] == DiffOperator::identity(1));
    // A_1 equals the generator of the empirical potential.
    Polynomial fz(1);
    MultiIndex m2;
    m2[0] = 2;
    fz.add_term(m2, Rational(1, 2));
    fz.add_term(MultiIndex::unit(0), Rational(-2, 3));
    CHECK(a[1] == generator(fz, beta));
    CHECK_THROWS(one_step_expansion(batch, beta, 0));
}

TEST_CASE("one step expansion for the OU family") {
    const Rational beta(20);
    const auto a = one_step_expansion(ou_batch(1), beta, 3);

    // A_2 = (x^2/2) d^2 - (x/beta) d^3 + (1/(2 beta^2)) d^4.
    const Polynomial x = Polynomial::variable(1, 0);
    MultiIndex m2, m3, m4;
    m2[0] = 2;
    m3[0] = 3;
    m4[0] = 4;
    CHECK(a[2].coefficient(m2) == x * x * Rational(1, 2));
    CHECK(a[2].coefficient(m3) == x * (Rational(-1) / beta));
    CHECK(a[2].coefficient(m4) == Polynomial::constant(1, pow_rational(beta, -2) / 2));
    CHECK(a[2].terms().size() == 3);
}

namespace {

// Independent one-step oracle in one dimension: expands
// E[x^a applied to x - eta g + sqrt(2 eta/beta) xi] as an exact polynomial
// in (x, eta) by binomial expansion, Gaussian moments of xi, and exhaustive
// minibatch tuples; returns the eta^order coefficient as a polynomial in x.
Polynomial one_step_oracle_coeff(const MinibatchSpec& batch, const Rational& beta, int monomial_degree,
                                 int order) {
    const int n = batch.data_count();
    const int nb = batch.batch_size;
    // Ring in (x, eta).
    const int kX = 0, kEta = 1;
    Polynomial expectation(2);
    std::vector<int> tuple(static_cast<std::size_t>(nb), 0);
    long count = 0;
    for (;;) {
        // Drift polynomial x - eta * g_tuple(x), lifted to the (x, eta) ring.
        Polynomial g(2);
        for (int m = 0; m < nb; ++m) {
            const Polynomial& gm = batch.gradients[static_cast<std::size_t>(tuple[static_cast<std::size_t>(m)])][0];
            for (const auto& [mi, c] : gm.terms()) {
                MultiIndex lifted;
                lifted[kX] = mi[0];
                g.add_term(lifted, c);
            }
        }
        g = g * Rational(1, nb);
        Polynomial drift = Polynomial::variable(2, kX);
        {
            MultiIndex eta1 = MultiIndex::unit(kEta);
            Polynomial eta_poly = Polynomial::monomial(2, eta1, Rational(1));
            drift -= eta_poly * g;
        }
        // E_xi (drift + sqrt(2 eta/beta) xi)^a: xi odd moments vanish.
        Polynomial value(2);
        Polynomial drift_pow = Polynomial::constant(2, Rational(1));
        std::vector<Polynomial> powers{drift_pow};
        for (int j = 1; j <= monomial_degree; ++j) powers.push_back(powers.back() * drift);
        for (int m = 0; m <= monomial_degree; m += 2) {
            BigInt dfact = 1;
            for (int j = m - 1; j >= 1; j -= 2) dfact *= j;
            MultiIndex etam;
            etam[kEta] = static_cast<std::uint8_t>(m / 2);
            const Polynomial noise = Polynomial::monomial(2, etam, pow_rational(Rational(2) / beta, m / 2) * Rational(dfact));
            value += powers[static_cast<std::size_t>(monomial_degree - m)] * noise *
                     Rational(binomial(static_cast<unsigned>(monomial_degree), static_cast<unsigned>(m)));
        }
        expectation += value;
        ++count;
        int i = 0;
        for (; i < nb; ++i) {
            if (++tuple[static_cast<std::size_t>(i)] < n) break;
            tuple[static_cast<std::size_t>(i)] = 0;
        }
        if (i == nb) break;
    }
    expectation = expectation * (Rational(1) / Rational(count));
    // Extract the eta^order slice.
    Polynomial slice(1);
    for (const auto& [mi, c] : expectation.terms()) {
        if (mi[kEta] != order) continue;
        MultiIndex xonly;
        xonly[0] = mi[kX];
        slice.add_term(xonly, c);
    }
    return slice;
}

}  // namespace

TEST_CASE("one step expansion matches the brute-force moment oracle") {
    const Rational beta(3);
    // Full-batch OU and a three-point quadratic-data batch with subsampling.
    std::vector<MinibatchSpec> batches{ou_batch(1),
                                       quadratic_data_batch({Rational(-1), Rational(1, 2), Rational(2)}, 2)};
    for (const auto& batch : batches) {
        const auto a = one_step_expansion(batch, beta, 3);
        for (int deg = 0; deg <= 6; ++deg) {
            Polynomial xm(1);
            MultiIndex mm;
            mm[0] = static_cast<std::uint8_t>(deg);
            xm.add_term(mm, Rational(1));
            for (int order = 0; order <= 3; ++order) {
                CHECK(apply(a[static_cast<std::size_t>(order)], xm) ==
                      one_step_oracle_coeff(batch, beta, deg, order));
            }
        }
    }
}

TEST_CASE("expansion operators annihilate constants") {
    const Rational beta(4);
    const MinibatchSpec batch = quadratic_data_batch({Rational(0), Rational(1), Rational(3, 2)}, 2);
    const auto a = one_step_expansion(batch, beta, 3);
    const Polynomial one = Polynomial::constant(1, Rational(1));
    for (std::size_t j = 1; j < a.size(); ++j) CHECK(apply(a[j], one).is_zero());
}

TEST_CASE("correction operators from the expansion") {
    const Rational beta(5);
    const auto a = one_step_expansion(ou_batch(1), beta, 3);
    const auto l = correction_operators(a, 2);
    REQUIRE(l.size() == 2);

    // L_1 = A_2 - L^2/2 collapses to -(x/2) d + (1/beta) d^2 for OU.
    DiffOperator expected(1);
    expected.add_term(MultiIndex::unit(0), Polynomial::variable(1, 0) * Rational(-1, 2));
    MultiIndex m2;
    m2[0] = 2;
    expected.add_term(m2, Polynomial::constant(1, Rational(1) / beta));
    CHECK(l[0] == expected);

    const DiffOperator gen = a[1];
    CHECK(l[0] == a[2] - compose(gen, gen) * Rational(1, 2));

    // L_1 kills constants; its adjoint does not.
    const Polynomial one = Polynomial::constant(1, Rational(1));
    CHECK(apply(l[0], one).is_zero());
    const Polynomial lstar1 = apply(adjoint(l[0], ou_potential(1), beta), one);
    CHECK(!lstar1.is_zero());
    CHECK(lstar1.degree() == 2);
    // beta x^2/2 - 1/2.
    Polynomial lstar_expected(1);
    lstar_expected.add_term(m2, beta / 2);
    lstar_expected.add_term(MultiIndex::zero(), Rational(-1, 2));
    CHECK(lstar1 == lstar_expected);
}

TEST_CASE("a pure semigroup needs no correction") {
    const Rational beta(5);
    const DiffOperator gen = generator(ou_potential(1), beta);
    std::vector<DiffOperator> a{DiffOperator::identity(1), gen};
    DiffOperator power = gen;
    Rational fact(1);
    for (int j = 2; j <= 4; ++j) {
        power = compose(power, gen);
        fact *= Rational(j);
        a.push_back(power * (Rational(1) / fact));
    }
    const auto l = correction_operators(a, 3);
    for (const auto& op : l) CHECK(op.is_zero());
}

TEST_CASE("corrections reproduce the expansion through the exponential") {
    const Rational beta(3);
    for (const auto& batch : {ou_batch(1), quadratic_data_batch({Rational(-2), Rational(1)}, 1)}) {
        const int order = 3;  // checks eta powers 0..3
        const auto a = one_step_expansion(batch, beta, order);
        const auto l = correction_operators(a, order - 1);

        OperatorSeries s(1, order);
        s.set(1, a[1]);
        for (int j = 1; j < order; ++j) s.set(j + 1, l[static_cast<std::size_t>(j - 1)]);
        const OperatorSeries expanded = OperatorSeries::exponential(s);
        for (int j = 0; j <= order; ++j) CHECK(expanded.at(j) == a[static_cast<std::size_t>(j)]);
    }
}

TEST_CASE("correction recursion rejects a bad identity slot") {
    const Rational beta(2);
    auto a = one_step_expansion(ou_batch(1), beta, 2);
    a[0] = DiffOperator::partial(1, 0);
    CHECK_THROWS(correction_operators(a, 1));
}

TEST_CASE("operator serialization is stable") {
    const Rational beta(5);
    const DiffOperator l = generator(ou_potential(1), beta);
    CHECK(operator_literal(l) == "(-1 * x1) D[1] + (1/5) D[2]");
}
