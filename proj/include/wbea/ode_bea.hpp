#pragma once

#include <vector>

#include "wbea/fit.hpp"
#include "wbea/polynomial.hpp"

namespace wbea {

// Truncated modified equation for explicit Euler on a scalar ODE
// y' = rhs(y): the corrected field rhs + sum_l eta^l c_l whose time-eta
// flow reproduces the Euler map y + eta rhs(y) through order eta^{N+1}.
struct ModifiedSeries {
    Polynomial rhs;
    std::vector<Polynomial> coefficients;  // c_1..c_N

    int order() const { return static_cast<int>(coefficients.size()); }
    // Field with the step size substituted, for numeric integration.
    double eval_field(double eta, double y) const;
};

// Coefficients by symbolic Taylor matching, exact rationals. N <= 6.
ModifiedSeries modified_coefficients(const Polynomial& rhs, int order);

// Explicit Euler trajectory y_0..y_steps; throws on a non-finite iterate,
// reporting the step.
std::vector<double> euler_run(const Polynomial& rhs, double eta, long steps, double y0);

struct BeaOrderRow {
    double eta = 0.0;
    double max_error = 0.0;
};

struct BeaOrderStudy {
    int order = 0;
    std::vector<BeaOrderRow> rows;
    double fitted_order = 0.0;
};

// Max deviation over grid times k eta <= horizon between the Euler
// iterates and the modified flow (reference: classical RK4 at step
// eta/100), per eta, with the fitted log-log slope. Expected slope N + 1.
BeaOrderStudy bea_order_study(const Polynomial& rhs, int order, const std::vector<double>& eta_list,
                              double horizon, double y0);

}  // namespace wbea
