#include "wbea/ode_bea.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wbea {

namespace {

using Series = std::vector<Polynomial>;  // index = power of eta

void check_scalar(const Polynomial& rhs) {
    if (rhs.dimension() != 1) throw std::invalid_argument("modified equations handle scalar ODEs only");
}

// D_g h = g h' on eta-series, truncated to the series length.
Series apply_field_derivative(const Series& g, const Series& h) {
    const std::size_t n = g.size();
    Series out(n, Polynomial(1));
    for (std::size_t i = 0; i < n; ++i) {
        if (g[i].is_zero()) continue;
        for (std::size_t j = 0; i + j < n; ++j) out[i + j] += g[i] * h[j].derivative(0);
    }
    return out;
}

}  // namespace

double ModifiedSeries::eval_field(double eta, double y) const {
    const double pt[] = {y};
    double acc = rhs.eval(pt);
    double etal = 1.0;
    for (const auto& c : coefficients) {
        etal *= eta;
        acc += etal * c.eval(pt);
    }
    return acc;
}

ModifiedSeries modified_coefficients(const Polynomial& rhs, int order) {
    check_scalar(rhs);
    if (order < 0 || order > 6) throw std::invalid_argument("correction order must lie in [0, 6]");
    ModifiedSeries series;
    series.rhs = rhs;

    Series g(static_cast<std::size_t>(order) + 1, Polynomial(1));
    g[0] = rhs;

    // Flow map coefficient at eta^s is sum_m (1/m!) [D_g^{m-1} g]_{s-m};
    // forcing it to vanish for 2 <= s <= N+1 determines c_{s-1} in turn.
    for (int s = 2; s <= order + 1; ++s) {
        Polynomial target(1);
        Series chain = g;  // D_g^0 g
        Rational inv_fact(1);
        for (int m = 2; m <= s; ++m) {
            chain = apply_field_derivative(g, chain);
            inv_fact /= Rational(m);
            target += chain[static_cast<std::size_t>(s - m)] * inv_fact;
        }
        g[static_cast<std::size_t>(s - 1)] = -target;
        series.coefficients.push_back(g[static_cast<std::size_t>(s - 1)]);
    }
    return series;
}

std::vector<double> euler_run(const Polynomial& rhs, double eta, long steps, double y0) {
    check_scalar(rhs);
    if (steps < 0) throw std::invalid_argument("negative step count");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    double y = y0;
    out.push_back(y);
    for (long k = 0; k < steps; ++k) {
        const double pt[] = {y};
        y += eta * rhs.eval(pt);
        if (!std::isfinite(y))
            throw std::runtime_error("Euler iterate blew up at step " + std::to_string(k + 1));
        out.push_back(y);
    }
    return out;
}

BeaOrderStudy bea_order_study(const Polynomial& rhs, int order, const std::vector<double>& eta_list,
                              double horizon, double y0) {
    check_scalar(rhs);
    const ModifiedSeries series = modified_coefficients(rhs, order);
    BeaOrderStudy study;
    study.order = order;

    for (const double eta : eta_list) {
        if (eta <= 0) throw std::invalid_argument("step sizes must be positive");
        const long steps = static_cast<long>(std::floor(horizon / eta + 1e-9));
        if (steps < 1) throw std::invalid_argument("horizon shorter than one step");
        const auto euler = euler_run(rhs, eta, steps, y0);

        // Reference: RK4 on the modified field at step eta/100.
        const double h = eta / 100.0;
        auto field = [&](double y) { return series.eval_field(eta, y); };
        double y = y0;
        double max_err = 0.0;
        for (long k = 1; k <= steps; ++k) {
            for (int sub = 0; sub < 100; ++sub) {
                const double k1 = field(y);
                const double k2 = field(y + 0.5 * h * k1);
                const double k3 = field(y + 0.5 * h * k2);
                const double k4 = field(y + h * k3);
                y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            }
            if (!std::isfinite(y))
                throw std::runtime_error("modified flow blew up inside the horizon");
            max_err = std::max(max_err, std::abs(euler[static_cast<std::size_t>(k)] - y));
        }
        study.rows.push_back(BeaOrderRow{eta, max_err});
    }

    std::vector<double> etas, errs;
    for (const auto& row : study.rows) {
        etas.push_back(row.eta);
        errs.push_back(row.max_error);
    }
    study.fitted_order = loglog_fit(etas, errs).slope;
    return study;
}

}  // namespace wbea
