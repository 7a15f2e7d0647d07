#pragma once

#include <map>
#include <string>

#include "wbea/polynomial.hpp"

namespace wbea {

// Finite sum of polynomial-coefficient partial derivatives,
//     sum_alpha  phi_alpha(x) * D^alpha.
// Terms are kept in normal form (merged by derivative multi-index, zero
// coefficients dropped), so equality is plain structural comparison.
class DiffOperator {
public:
    using TermMap = std::map<MultiIndex, Polynomial, GradedLess>;

    explicit DiffOperator(int dimension = 1);

    static DiffOperator identity(int dimension);
    static DiffOperator partial(int dimension, int coordinate);
    static DiffOperator partial(int dimension, const MultiIndex& order);
    // Multiplication by a polynomial as a zero-order operator.
    static DiffOperator multiply_by(const Polynomial& p);

    int dimension() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    // Highest derivative order present; -1 for the zero operator.
    int order() const;
    Polynomial coefficient(const MultiIndex& alpha) const;

    void add_term(const MultiIndex& alpha, const Polynomial& coeff);

    DiffOperator operator+(const DiffOperator& o) const;
    DiffOperator operator-(const DiffOperator& o) const;
    DiffOperator operator*(const Rational& c) const;
    DiffOperator& operator+=(const DiffOperator& o);
    DiffOperator& operator-=(const DiffOperator& o);

    bool operator==(const DiffOperator& o) const = default;

    std::string str() const;

private:
    int dim_;
    TermMap terms_;
};

// Exact symbolic application.
Polynomial apply(const DiffOperator& op, const Polynomial& p);

// Operator product via the Leibniz rule:
// apply(compose(a, b), p) == apply(a, apply(b, p)) for every p.
DiffOperator compose(const DiffOperator& a, const DiffOperator& b);

// Ito generator of the overdamped Langevin diffusion for potential F:
//     -<grad F, grad .> + (1/beta) Laplacian.
DiffOperator generator(const Polynomial& potential, const Rational& beta);

// Adjoint with respect to the Gibbs weight exp(-beta F): the unique op*
// with  int (op f) g drho = int f (op* g) drho  for all polynomials f, g.
// Built from (d_i)* = -d_i + beta (d_i F) and ((phi.)op)* = op* (phi.).
DiffOperator adjoint(const DiffOperator& op, const Polynomial& potential, const Rational& beta);

// Serialization used by golden-file tests: one term per line,
// "(<polynomial>) D[a1,...,ad]".
std::string operator_literal(const DiffOperator& op);

}  // namespace wbea
