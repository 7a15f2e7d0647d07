#include "wbea/polynomial.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace wbea {

namespace {

void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim)
        throw std::invalid_argument("polynomial dimension out of range [1," + std::to_string(kMaxDim) + "]");
}

void check_same_dim(int a, int b) {
    if (a != b) throw std::invalid_argument("polynomial dimension mismatch");
}

}  // namespace

Polynomial::Polynomial(int dimension) : dim_(dimension) { check_dim(dimension); }

Polynomial Polynomial::constant(int dimension, const Rational& c) {
    Polynomial p(dimension);
    p.add_term(MultiIndex::zero(), c);
    return p;
}

Polynomial Polynomial::variable(int dimension, int i) {
    check_dim(dimension);
    if (i < 0 || i >= dimension) throw std::invalid_argument("variable index out of range");
    Polynomial p(dimension);
    p.add_term(MultiIndex::unit(i), Rational(1));
    return p;
}

Polynomial Polynomial::monomial(int dimension, const MultiIndex& m, const Rational& c) {
    Polynomial p(dimension);
    p.add_term(m, c);
    return p;
}

int Polynomial::degree() const {
    if (terms_.empty()) return -1;
    return terms_.rbegin()->first.total();
}

Rational Polynomial::coeff(const MultiIndex& m) const {
    const auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
}

void Polynomial::add_term(const MultiIndex& m, const Rational& c) {
    if (c == 0) return;
    for (int i = dim_; i < kMaxDim; ++i)
        if (m[i] != 0) throw std::invalid_argument("exponent beyond polynomial dimension");
    const auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

Polynomial Polynomial::operator-() const {
    Polynomial r(dim_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r = *this;
    r += o;
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    Polynomial r = *this;
    r -= o;
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    check_same_dim(dim_, o.dim_);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    check_same_dim(dim_, o.dim_);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    check_same_dim(dim_, o.dim_);
    Polynomial r(dim_);
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : o.terms_) r.add_term(ma.plus(mb), ca * cb);
    return r;
}

Polynomial Polynomial::operator*(const Rational& c) const {
    Polynomial r(dim_);
    if (c == 0) return r;
    for (const auto& [m, v] : terms_) r.terms_.emplace(m, v * c);
    return r;
}

Polynomial Polynomial::derivative(int i) const {
    if (i < 0 || i >= dim_) throw std::invalid_argument("derivative index out of range");
    Polynomial r(dim_);
    for (const auto& [m, c] : terms_) {
        if (m[i] == 0) continue;
        MultiIndex d = m;
        d[i] = static_cast<std::uint8_t>(d[i] - 1);
        r.add_term(d, c * Rational(m[i]));
    }
    return r;
}

Polynomial Polynomial::derivative(const MultiIndex& order) const {
    Polynomial r = *this;
    for (int i = 0; i < dim_; ++i)
        for (int k = 0; k < order[i]; ++k) r = r.derivative(i);
    return r;
}

Polynomial Polynomial::translate(std::span<const Rational> shift) const {
    if (static_cast<int>(shift.size()) != dim_) throw std::invalid_argument("shift dimension mismatch");
    // Expand (x_i + s_i)^a_i by the binomial theorem, one term at a time.
    Polynomial result(dim_);
    for (const auto& [m, c] : terms_) {
        Polynomial term = Polynomial::constant(dim_, c);
        for (int i = 0; i < dim_; ++i) {
            if (m[i] == 0) continue;
            Polynomial binom(dim_);
            for (int j = 0; j <= m[i]; ++j) {
                MultiIndex mi;
                mi[i] = static_cast<std::uint8_t>(j);
                binom.add_term(mi, Rational(binomial(m[i], static_cast<unsigned>(j))) *
                                       pow_rational(shift[static_cast<std::size_t>(i)],
                                                    static_cast<long>(m[i] - j)));
            }
            term = term * binom;
        }
        result += term;
    }
    return result;
}

double Polynomial::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("evaluation point dimension mismatch");
    // Horner pass per coordinate power, accumulated term by term: powers are
    // cached so each term costs one multiply per coordinate.
    double powers[kMaxDim][256];
    int maxexp[kMaxDim] = {0, 0, 0, 0};
    for (const auto& [m, c] : terms_)
        for (int i = 0; i < dim_; ++i)
            if (m[i] > maxexp[i]) maxexp[i] = m[i];
    for (int i = 0; i < dim_; ++i) {
        powers[i][0] = 1.0;
        for (int e = 1; e <= maxexp[i]; ++e) powers[i][e] = powers[i][e - 1] * x[static_cast<std::size_t>(i)];
    }
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = to_double(c);
        for (int i = 0; i < dim_; ++i) t *= powers[i][m[i]];
        acc += t;
    }
    return acc;
}

Rational Polynomial::eval_exact(std::span<const Rational> x) const {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("evaluation point dimension mismatch");
    Rational acc(0);
    for (const auto& [m, c] : terms_) {
        Rational t = c;
        for (int i = 0; i < dim_; ++i)
            if (m[i] != 0) t *= pow_rational(x[static_cast<std::size_t>(i)], m[i]);
        acc += t;
    }
    return acc;
}

int Polynomial::parity() const {
    bool has_even = false, has_odd = false;
    for (const auto& [m, c] : terms_) ((m.total() % 2 == 0) ? has_even : has_odd) = true;
    if (has_even && has_odd) return 0;
    if (has_odd) return -1;
    return 1;  // zero polynomial counts as even
}

std::string to_string(const MultiIndex& m, int dim) {
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < dim; ++i) {
        if (m[i] == 0) continue;
        if (!first) os << "*";
        os << "x" << (i + 1);
        if (m[i] > 1) os << "^" << static_cast<int>(m[i]);
        first = false;
    }
    if (first) os << "1";
    return os.str();
}

std::string Polynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // Print highest degree first.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        if (!first) os << " + ";
        first = false;
        const auto& [m, c] = *it;
        if (m.is_zero()) {
            os << to_string(c);
        } else if (c == 1) {
            os << to_string(m, dim_);
        } else {
            os << to_string(c) << " * " << to_string(m, dim_);
        }
    }
    return os.str();
}

namespace {

// Minimal recursive-descent pieces for the term grammar.
struct Cursor {
    const std::string& s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
};

Rational parse_number(Cursor& c) {
    c.skip_ws();
    std::size_t start = c.pos;
    if (c.pos < c.s.size() && (c.s[c.pos] == '-' || c.s[c.pos] == '+')) ++c.pos;
    while (c.pos < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.pos]))) ++c.pos;
    if (c.pos == start) throw std::invalid_argument("expected number in polynomial literal");
    std::string num = c.s.substr(start, c.pos - start);
    if (c.eat('/')) {
        c.skip_ws();
        std::size_t dstart = c.pos;
        while (c.pos < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.pos]))) ++c.pos;
        if (c.pos == dstart) throw std::invalid_argument("expected denominator in polynomial literal");
        return parse_rational(num + "/" + c.s.substr(dstart, c.pos - dstart));
    }
    return parse_rational(num);
}

int parse_int(Cursor& c) {
    c.skip_ws();
    std::size_t start = c.pos;
    while (c.pos < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.pos]))) ++c.pos;
    if (c.pos == start) throw std::invalid_argument("expected integer in polynomial literal");
    return std::stoi(c.s.substr(start, c.pos - start));
}

}  // namespace

Polynomial parse_polynomial(const std::string& text, int dimension) {
    Polynomial p(dimension);
    Cursor c{text};
    if (c.done()) return p;
    bool expect_term = true;
    int sign = 1;
    while (!c.done()) {
        if (!expect_term) {
            if (c.eat('+')) {
                sign = 1;
            } else if (c.eat('-')) {
                sign = -1;
            } else {
                throw std::invalid_argument("expected '+' between polynomial terms");
            }
            expect_term = true;
            continue;
        }
        if (c.eat('-')) sign = -sign;
        c.skip_ws();
        Rational coef(1);
        bool saw_coef = false;
        if (c.pos < c.s.size() && (std::isdigit(static_cast<unsigned char>(c.s[c.pos])))) {
            coef = parse_number(c);
            saw_coef = true;
        }
        MultiIndex m;
        bool saw_var = false;
        while (true) {
            if (saw_coef || saw_var) {
                const std::size_t save = c.pos;
                if (!c.eat('*')) {
                    c.pos = save;
                    break;
                }
            }
            c.skip_ws();
            if (c.pos >= c.s.size() || c.s[c.pos] != 'x') {
                if (saw_coef || saw_var) throw std::invalid_argument("expected variable after '*'");
                break;
            }
            ++c.pos;
            const int var = parse_int(c);
            if (var < 1 || var > dimension) throw std::invalid_argument("variable index out of range in literal");
            int expn = 1;
            if (c.eat('^')) expn = parse_int(c);
            for (int k = 0; k < expn; ++k) m = m.plus(MultiIndex::unit(var - 1));
            saw_var = true;
        }
        if (!saw_coef && !saw_var) throw std::invalid_argument("empty term in polynomial literal");
        p.add_term(m, sign > 0 ? coef : -coef);
        sign = 1;
        expect_term = false;
    }
    if (expect_term) throw std::invalid_argument("dangling sign in polynomial literal");
    return p;
}

}  // namespace wbea
