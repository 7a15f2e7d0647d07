#pragma once

#include <vector>

#include "wbea/operators.hpp"

namespace wbea {

// Per-datum gradient fields of the empirical loss together with the
// minibatch size; sampling is n_b i.i.d. uniform index draws (with
// replacement), so moments of subsample averages have exact closed forms.
struct MinibatchSpec {
    // gradients[i][c] = d/dx_c of f(., z_i); one entry per datum.
    std::vector<std::vector<Polynomial>> gradients;
    int batch_size = 1;

    int dimension() const;
    int data_count() const { return static_cast<int>(gradients.size()); }
    // Average gradient coordinate c over the dataset.
    Polynomial mean_gradient(int c) const;
    bool gradients_identical() const;

    static MinibatchSpec full_batch(std::vector<std::vector<Polynomial>> grads);
    void validate() const;
};

// E over the minibatch draw of prod_m d_{coords[m]} F_batch(x), exact.
// Supported up to third order for generic data; any order when all
// per-datum gradients coincide (no subsampling variance).
Polynomial gradient_product_moment(const MinibatchSpec& batch, const std::vector<int>& coords);

// Coefficients A_0..A_N of eta^j in the expansion of E[phi(X_1) | X_0 = x]
// over one update  X_1 = x - eta grad F_batch(x) + sqrt(2 eta / beta) xi,
// from Gaussian moments of the noise and exact minibatch gradient moments.
// A_0 = I and A_1 is the Langevin generator.
std::vector<DiffOperator> one_step_expansion(const MinibatchSpec& batch, const Rational& beta, int order);

// Correction operators L_1..L_N recovered from A_0..A_{N+1} by the
// Bernoulli-number recursion
//   L_j = A_{j+1} + sum_{l=1}^{j} (B_l / l!)
//           sum_{n_1+...+n_{l+1} = j-l} L_{n_1} ... L_{n_l} A_{n_{l+1}+1},
// with L_0 = A_1. The result satisfies exp(eta (L_0 + eta L_1 + ...)) =
// sum_j eta^j A_j through order N+1 as a formal series.
std::vector<DiffOperator> correction_operators(const std::vector<DiffOperator>& a_ops, int order);

// Operator-valued polynomial in the step size, truncated at a fixed order.
// Small utility for the formal-series identities above.
class OperatorSeries {
public:
    OperatorSeries(int dimension, int max_order);

    int max_order() const { return static_cast<int>(coeff_.size()) - 1; }
    const DiffOperator& at(int k) const { return coeff_.at(static_cast<std::size_t>(k)); }
    void set(int k, DiffOperator op);

    OperatorSeries operator+(const OperatorSeries& o) const;
    // Truncated product (composition on each operator pair).
    OperatorSeries operator*(const OperatorSeries& o) const;
    OperatorSeries scale(const Rational& c) const;

    // Truncated exponential sum_m (1/m!) s^m; requires s to have no
    // order-zero part so the sum is finite.
    static OperatorSeries exponential(const OperatorSeries& s);

private:
    int dim_;
    std::vector<DiffOperator> coeff_;
};

// All multi-indices over `dimension` coordinates with the given total.
std::vector<MultiIndex> multi_indices_with_total(int dimension, int total);

}  // namespace wbea
