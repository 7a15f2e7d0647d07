#include "wbea/operators.hpp"

#include <sstream>
#include <stdexcept>

namespace wbea {

namespace {

void check_same_dim(int a, int b) {
    if (a != b) throw std::invalid_argument("operator dimension mismatch");
}

}  // namespace

DiffOperator::DiffOperator(int dimension) : dim_(dimension) {
    if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("operator dimension out of range");
}

DiffOperator DiffOperator::identity(int dimension) {
    DiffOperator op(dimension);
    op.add_term(MultiIndex::zero(), Polynomial::constant(dimension, Rational(1)));
    return op;
}

DiffOperator DiffOperator::partial(int dimension, int coordinate) {
    return partial(dimension, MultiIndex::unit(coordinate));
}

DiffOperator DiffOperator::partial(int dimension, const MultiIndex& order) {
    DiffOperator op(dimension);
    op.add_term(order, Polynomial::constant(dimension, Rational(1)));
    return op;
}

DiffOperator DiffOperator::multiply_by(const Polynomial& p) {
    DiffOperator op(p.dimension());
    op.add_term(MultiIndex::zero(), p);
    return op;
}

int DiffOperator::order() const {
    if (terms_.empty()) return -1;
    return terms_.rbegin()->first.total();
}

Polynomial DiffOperator::coefficient(const MultiIndex& alpha) const {
    const auto it = terms_.find(alpha);
    return it == terms_.end() ? Polynomial::zero(dim_) : it->second;
}

void DiffOperator::add_term(const MultiIndex& alpha, const Polynomial& coeff) {
    if (coeff.is_zero()) return;
    check_same_dim(dim_, coeff.dimension());
    const auto it = terms_.find(alpha);
    if (it == terms_.end()) {
        terms_.emplace(alpha, coeff);
    } else {
        it->second += coeff;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

DiffOperator DiffOperator::operator+(const DiffOperator& o) const {
    DiffOperator r = *this;
    r += o;
    return r;
}

DiffOperator DiffOperator::operator-(const DiffOperator& o) const {
    DiffOperator r = *this;
    r -= o;
    return r;
}

DiffOperator DiffOperator::operator*(const Rational& c) const {
    DiffOperator r(dim_);
    if (c == 0) return r;
    for (const auto& [a, p] : terms_) r.terms_.emplace(a, p * c);
    return r;
}

DiffOperator& DiffOperator::operator+=(const DiffOperator& o) {
    check_same_dim(dim_, o.dim_);
    for (const auto& [a, p] : o.terms_) add_term(a, p);
    return *this;
}

DiffOperator& DiffOperator::operator-=(const DiffOperator& o) {
    check_same_dim(dim_, o.dim_);
    for (const auto& [a, p] : o.terms_) add_term(a, -p);
    return *this;
}

Polynomial apply(const DiffOperator& op, const Polynomial& p) {
    check_same_dim(op.dimension(), p.dimension());
    Polynomial out(p.dimension());
    for (const auto& [alpha, phi] : op.terms()) out += phi * p.derivative(alpha);
    return out;
}

DiffOperator compose(const DiffOperator& a, const DiffOperator& b) {
    check_same_dim(a.dimension(), b.dimension());
    const int d = a.dimension();
    DiffOperator out(d);
    // a = phi D^alpha, b = psi D^gamma:
    //   phi D^alpha (psi D^gamma u) = phi sum_{mu <= alpha} C(alpha, mu)
    //                                  (D^mu psi) D^{alpha - mu + gamma} u.
    for (const auto& [alpha, phi] : a.terms()) {
        for (const auto& [gamma, psi] : b.terms()) {
            // Enumerate mu <= alpha componentwise.
            MultiIndex mu;
            while (true) {
                Rational binom(1);
                for (int i = 0; i < d; ++i) binom *= Rational(binomial(alpha[i], mu[i]));
                const Polynomial dpsi = psi.derivative(mu);
                if (!dpsi.is_zero()) out.add_term(alpha.minus(mu).plus(gamma), phi * dpsi * binom);
                // Odometer increment of mu within the box [0, alpha].
                int i = 0;
                for (; i < d; ++i) {
                    if (mu[i] < alpha[i]) {
                        mu[i] = static_cast<std::uint8_t>(mu[i] + 1);
                        break;
                    }
                    mu[i] = 0;
                }
                if (i == d) break;
            }
        }
    }
    return out;
}

DiffOperator generator(const Polynomial& potential, const Rational& beta) {
    if (beta <= 0) throw std::invalid_argument("beta must be positive");
    const int d = potential.dimension();
    DiffOperator op(d);
    for (int i = 0; i < d; ++i) {
        op.add_term(MultiIndex::unit(i), -potential.derivative(i));
        MultiIndex second;
        second[i] = 2;
        op.add_term(second, Polynomial::constant(d, Rational(1) / beta));
    }
    return op;
}

DiffOperator adjoint(const DiffOperator& op, const Polynomial& potential, const Rational& beta) {
    if (beta <= 0) throw std::invalid_argument("beta must be positive");
    check_same_dim(op.dimension(), potential.dimension());
    const int d = op.dimension();
    // (d_i)* = -d_i + beta (d_i F); the factors commute across coordinates,
    // so (phi D^alpha)* = prod_i ((d_i)*)^{alpha_i} composed with (phi .).
    std::vector<DiffOperator> dstar;
    dstar.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        DiffOperator s(d);
        s.add_term(MultiIndex::unit(i), Polynomial::constant(d, Rational(-1)));
        s.add_term(MultiIndex::zero(), potential.derivative(i) * beta);
        dstar.push_back(std::move(s));
    }
    DiffOperator out(d);
    for (const auto& [alpha, phi] : op.terms()) {
        DiffOperator acc = DiffOperator::multiply_by(phi);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < alpha[i]; ++k) acc = compose(dstar[static_cast<std::size_t>(i)], acc);
        out += acc;
    }
    return out;
}

std::string DiffOperator::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [alpha, phi] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << phi.str() << ") D[";
        for (int i = 0; i < dim_; ++i) {
            if (i) os << ",";
            os << static_cast<int>(alpha[i]);
        }
        os << "]";
    }
    return os.str();
}

std::string operator_literal(const DiffOperator& op) { return op.str(); }

}  // namespace wbea
