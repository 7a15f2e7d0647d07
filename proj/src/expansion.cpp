#include "wbea/expansion.hpp"

#include <stdexcept>

#include "wbea/hermite.hpp"

namespace wbea {

int MinibatchSpec::dimension() const {
    if (gradients.empty()) throw std::invalid_argument("minibatch spec without data");
    return static_cast<int>(gradients.front().size());
}

Polynomial MinibatchSpec::mean_gradient(int c) const {
    const int n = data_count();
    Polynomial sum(dimension());
    for (const auto& g : gradients) sum += g.at(static_cast<std::size_t>(c));
    return sum * (Rational(1) / Rational(n));
}

bool MinibatchSpec::gradients_identical() const {
    for (std::size_t i = 1; i < gradients.size(); ++i)
        if (gradients[i] != gradients[0]) return false;
    return true;
}

MinibatchSpec MinibatchSpec::full_batch(std::vector<std::vector<Polynomial>> grads) {
    MinibatchSpec spec;
    spec.batch_size = static_cast<int>(grads.size());
    spec.gradients = std::move(grads);
    spec.validate();
    return spec;
}

void MinibatchSpec::validate() const {
    if (gradients.empty()) throw std::invalid_argument("minibatch spec without data");
    if (batch_size < 1 || batch_size > data_count())
        throw std::invalid_argument("batch size outside [1, n]");
    const int d = dimension();
    for (const auto& g : gradients) {
        if (static_cast<int>(g.size()) != d) throw std::invalid_argument("ragged gradient list");
        for (const auto& p : g)
            if (p.dimension() != d) throw std::invalid_argument("gradient dimension mismatch");
    }
}

Polynomial gradient_product_moment(const MinibatchSpec& batch, const std::vector<int>& coords) {
    batch.validate();
    const int d = batch.dimension();
    const int r = static_cast<int>(coords.size());
    if (r == 0) return Polynomial::constant(d, Rational(1));

    if (batch.gradients_identical()) {
        Polynomial prod = Polynomial::constant(d, Rational(1));
        for (int c : coords) prod = prod * batch.gradients[0].at(static_cast<std::size_t>(c));
        return prod;
    }

    const Rational nb(batch.batch_size);
    const int n = batch.data_count();
    auto data_avg = [&](const std::vector<int>& cs) {
        Polynomial sum(d);
        for (const auto& g : batch.gradients) {
            Polynomial prod = Polynomial::constant(d, Rational(1));
            for (int c : cs) prod = prod * g.at(static_cast<std::size_t>(c));
            sum += prod;
        }
        return sum * (Rational(1) / Rational(n));
    };

    switch (r) {
        case 1:
            return batch.mean_gradient(coords[0]);
        case 2: {
            // Split the two i.i.d. index draws by coincidence pattern.
            const Polynomial same = data_avg(coords);
            const Polynomial split = batch.mean_gradient(coords[0]) * batch.mean_gradient(coords[1]);
            return same * (Rational(1) / nb) + split * (Rational(1) - Rational(1) / nb);
        }
        case 3: {
            const Rational w_all = Rational(1) / (nb * nb);
            const Rational w_pair = (nb - 1) / (nb * nb);
            const Rational w_distinct = (nb - 1) * (nb - 2) / (nb * nb);
            Polynomial out = data_avg(coords) * w_all;
            const int pairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
            for (const auto& pr : pairs) {
                const std::vector<int> cs{coords[static_cast<std::size_t>(pr[0])],
                                          coords[static_cast<std::size_t>(pr[1])]};
                out += data_avg(cs) * batch.mean_gradient(coords[static_cast<std::size_t>(pr[2])]) * w_pair;
            }
            Polynomial distinct = Polynomial::constant(d, Rational(1));
            for (int c : coords) distinct = distinct * batch.mean_gradient(c);
            out += distinct * w_distinct;
            return out;
        }
        default:
            throw std::domain_error("minibatch gradient moments supported up to order 3");
    }
}

std::vector<MultiIndex> multi_indices_with_total(int dimension, int total) {
    std::vector<MultiIndex> out;
    MultiIndex cur;
    // Recursive distribution of `total` over `dimension` slots.
    auto rec = [&](auto&& self, int coord, int remaining) -> void {
        if (coord == dimension - 1) {
            cur[coord] = static_cast<std::uint8_t>(remaining);
            out.push_back(cur);
            cur[coord] = 0;
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            cur[coord] = static_cast<std::uint8_t>(v);
            self(self, coord + 1, remaining - v);
        }
        cur[coord] = 0;
    };
    rec(rec, 0, total);
    return out;
}

std::vector<DiffOperator> one_step_expansion(const MinibatchSpec& batch, const Rational& beta, int order) {
    if (order < 1) throw std::invalid_argument("expansion order must be at least 1");
    if (beta <= 0) throw std::invalid_argument("beta must be positive");
    batch.validate();
    const int d = batch.dimension();

    std::vector<DiffOperator> a_ops;
    a_ops.reserve(static_cast<std::size_t>(order) + 1);
    a_ops.push_back(DiffOperator::identity(d));

    for (int s = 1; s <= order; ++s) {
        DiffOperator a_s(d);
        // One-step displacement -eta g + sqrt(2 eta / beta) xi contributes
        //   (-1)^{|j|} / (j! r! beta^{|r|}) E[prod g^j] D^{j + 2r}
        // at order eta^{|j| + |r|}; collect every (j, r) with |j| + |r| = s.
        for (int t = 0; t <= s; ++t) {
            for (const MultiIndex& j : multi_indices_with_total(d, t)) {
                std::vector<int> coords;
                for (int i = 0; i < d; ++i)
                    for (int k = 0; k < j[i]; ++k) coords.push_back(i);
                const Polynomial moment = gradient_product_moment(batch, coords);
                for (const MultiIndex& rr : multi_indices_with_total(d, s - t)) {
                    Rational w = (t % 2 == 0) ? Rational(1) : Rational(-1);
                    for (int i = 0; i < d; ++i)
                        w /= factorial_rational(j[i]) * factorial_rational(rr[i]);
                    w *= pow_rational(beta, -(s - t));
                    MultiIndex deriv = j;
                    for (int i = 0; i < d; ++i)
                        deriv[i] = static_cast<std::uint8_t>(deriv[i] + 2 * rr[i]);
                    a_s.add_term(deriv, moment * w);
                }
            }
        }
        a_ops.push_back(std::move(a_s));
    }
    return a_ops;
}

namespace {

// Sums L_{n_1} ... L_{n_l} A_{n_{l+1}+1} over compositions n_1+...+n_{l+1} = m.
DiffOperator composition_sum(const std::vector<DiffOperator>& l_ops,
                             const std::vector<DiffOperator>& a_ops, int l, int m) {
    const int d = a_ops.front().dimension();
    DiffOperator total(d);
    std::vector<int> parts(static_cast<std::size_t>(l) + 1, 0);
    auto rec = [&](auto&& self, int slot, int remaining) -> void {
        if (slot == l) {
            parts[static_cast<std::size_t>(slot)] = remaining;
            DiffOperator prod = a_ops.at(static_cast<std::size_t>(remaining) + 1);
            for (int i = l - 1; i >= 0; --i)
                prod = compose(l_ops.at(static_cast<std::size_t>(parts[static_cast<std::size_t>(i)])), prod);
            total += prod;
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            parts[static_cast<std::size_t>(slot)] = v;
            self(self, slot + 1, remaining - v);
        }
    };
    rec(rec, 0, m);
    return total;
}

}  // namespace

std::vector<DiffOperator> correction_operators(const std::vector<DiffOperator>& a_ops, int order) {
    if (order < 0) throw std::invalid_argument("negative correction order");
    if (static_cast<int>(a_ops.size()) < order + 2)
        throw std::invalid_argument("need expansion operators up to index order+1");
    const int d = a_ops.front().dimension();
    if (!(a_ops[0] == DiffOperator::identity(d)))
        throw std::invalid_argument("inconsistent expansion: A_0 is not the identity");

    // l_ops[j] = L_j with L_0 = A_1 (the generator).
    std::vector<DiffOperator> l_ops;
    l_ops.reserve(static_cast<std::size_t>(order) + 1);
    l_ops.push_back(a_ops[1]);
    for (int j = 1; j <= order; ++j) {
        DiffOperator lj = a_ops.at(static_cast<std::size_t>(j) + 1);
        for (int l = 1; l <= j; ++l) {
            const Rational w = bernoulli(static_cast<unsigned>(l)) / factorial_rational(static_cast<unsigned>(l));
            if (w == 0) continue;
            lj += composition_sum(l_ops, a_ops, l, j - l) * w;
        }
        l_ops.push_back(std::move(lj));
    }
    return {l_ops.begin() + 1, l_ops.end()};
}

OperatorSeries::OperatorSeries(int dimension, int max_order)
    : dim_(dimension), coeff_(static_cast<std::size_t>(max_order) + 1, DiffOperator(dimension)) {
    if (max_order < 0) throw std::invalid_argument("negative series order");
}

void OperatorSeries::set(int k, DiffOperator op) {
    if (op.dimension() != dim_) throw std::invalid_argument("series dimension mismatch");
    coeff_.at(static_cast<std::size_t>(k)) = std::move(op);
}

OperatorSeries OperatorSeries::operator+(const OperatorSeries& o) const {
    if (o.dim_ != dim_ || o.max_order() != max_order()) throw std::invalid_argument("series shape mismatch");
    OperatorSeries r(dim_, max_order());
    for (int k = 0; k <= max_order(); ++k) r.set(k, at(k) + o.at(k));
    return r;
}

OperatorSeries OperatorSeries::operator*(const OperatorSeries& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("series dimension mismatch");
    OperatorSeries r(dim_, max_order());
    for (int i = 0; i <= max_order(); ++i) {
        if (at(i).is_zero()) continue;
        for (int j = 0; i + j <= max_order() && j <= o.max_order(); ++j) {
            if (o.at(j).is_zero()) continue;
            r.set(i + j, r.at(i + j) + compose(at(i), o.at(j)));
        }
    }
    return r;
}

OperatorSeries OperatorSeries::scale(const Rational& c) const {
    OperatorSeries r(dim_, max_order());
    for (int k = 0; k <= max_order(); ++k) r.set(k, at(k) * c);
    return r;
}

OperatorSeries OperatorSeries::exponential(const OperatorSeries& s) {
    if (!s.at(0).is_zero()) throw std::invalid_argument("exponential needs a series with no order-0 part");
    OperatorSeries result(s.dim_, s.max_order());
    result.set(0, DiffOperator::identity(s.dim_));
    OperatorSeries power = result;  // s^0 = I
    Rational inv_fact(1);
    for (int m = 1; m <= s.max_order(); ++m) {
        power = power * s;
        inv_fact /= Rational(m);
        result = result + power.scale(inv_fact);
    }
    return result;
}

}  // namespace wbea
