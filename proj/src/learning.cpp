#include "wbea/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wbea/fit.hpp"
#include "wbea/rng.hpp"

namespace wbea {

LossSpec LossSpec::isotropic_quadratic(int dim) {
    LossSpec spec;
    spec.family = LossFamily::kIsotropicQuadratic;
    spec.dimension = dim;
    spec.m = 1.0;
    spec.b = 0.0;
    spec.lipschitz = 1.0;
    spec.gradient_offset = 0.0;
    spec.value_offset = 0.0;
    return spec;
}

LossSpec LossSpec::squared_distance(int dim, double data_radius) {
    // <x, x - z> >= |x|^2 - |x||z| >= |x|^2/2 - |z|^2/2, so m = 1/2 with
    // b tied to the data range.
    LossSpec spec;
    spec.family = LossFamily::kSquaredDistance;
    spec.dimension = dim;
    spec.m = 0.5;
    spec.b = 0.5 * dim * data_radius * data_radius;
    spec.lipschitz = 1.0;
    spec.gradient_offset = std::sqrt(static_cast<double>(dim)) * data_radius;
    spec.value_offset = 0.5 * dim * data_radius * data_radius;
    return spec;
}

Polynomial LossSpec::per_datum_potential(std::span<const double> z) const {
    const int d = dimension;
    Polynomial f(d);
    switch (family) {
        case LossFamily::kIsotropicQuadratic:
            for (int i = 0; i < d; ++i) {
                MultiIndex m2;
                m2[i] = 2;
                f.add_term(m2, Rational(1, 2));
            }
            return f;
        case LossFamily::kSquaredDistance: {
            if (static_cast<int>(z.size()) != d) throw std::invalid_argument("datum dimension mismatch");
            for (int i = 0; i < d; ++i) {
                const Rational zi = rational_from_double(z[static_cast<std::size_t>(i)]);
                MultiIndex m2;
                m2[i] = 2;
                f.add_term(m2, Rational(1, 2));
                f.add_term(MultiIndex::unit(i), -zi);
                f.add_term(MultiIndex::zero(), zi * zi / 2);
            }
            return f;
        }
    }
    throw std::logic_error("unknown loss family");
}

std::vector<Polynomial> LossSpec::per_datum_gradient(std::span<const double> z) const {
    const Polynomial f = per_datum_potential(z);
    std::vector<Polynomial> g;
    g.reserve(static_cast<std::size_t>(dimension));
    for (int i = 0; i < dimension; ++i) g.push_back(f.derivative(i));
    return g;
}

bool LossSpec::validate_constants(std::uint64_t seed, double x_radius, double z_radius, int probes) const {
    const int d = dimension;
    // Probe words live on their own channel id (third counter word), away
    // from the simulation and dataset streams.
    auto draw_point = [&](std::uint32_t idx, std::uint32_t sub, double radius, double* out) {
        for (int i = 0; i < d; i += 2) {
            const auto b = Philox4x32::generate(seed, idx, sub, 0xC0FFEEu,
                                                static_cast<std::uint32_t>(i / 2));
            out[i] = radius * (2.0 * uniform_from_words(b.v[0], b.v[1]) - 1.0);
            if (i + 1 < d) out[i + 1] = radius * (2.0 * uniform_from_words(b.v[2], b.v[3]) - 1.0);
        }
    };
    auto grad = [&](const double* x, const double* z, double* out) {
        for (int i = 0; i < d; ++i)
            out[i] = family == LossFamily::kSquaredDistance ? x[i] - z[i] : x[i];
    };

    const double tol = 1e-9;
    for (int p = 0; p < probes; ++p) {
        double x[kMaxDim], y[kMaxDim], z[kMaxDim];
        draw_point(static_cast<std::uint32_t>(p), 0, x_radius, x);
        draw_point(static_cast<std::uint32_t>(p), 1, x_radius, y);
        draw_point(static_cast<std::uint32_t>(p), 2, z_radius, z);

        double gx[kMaxDim], gy[kMaxDim];
        grad(x, z, gx);
        grad(y, z, gy);

        double inner = 0, norm2 = 0, gdiff = 0, xydiff = 0;
        for (int i = 0; i < d; ++i) {
            inner += x[i] * gx[i];
            norm2 += x[i] * x[i];
            const double dg = gx[i] - gy[i];
            gdiff += dg * dg;
            const double dx = x[i] - y[i];
            xydiff += dx * dx;
        }
        if (inner < m * norm2 - b - tol) return false;
        if (std::sqrt(gdiff) > lipschitz * std::sqrt(xydiff) + tol) return false;
    }
    return true;
}

double DatasetSpec::draw_radius() const {
    if (family == Family::kUniform) return std::abs(mean) + width;
    return std::abs(mean) + 4.0 * std::sqrt(variance);
}

Dataset Dataset::draw(const DatasetSpec& spec, int n, int dimension, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("dataset needs at least one point");
    Dataset data;
    data.dimension = dimension;
    data.spec = spec;
    data.seed = seed;
    data.points.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(dimension));
    const auto channel = static_cast<std::uint32_t>(RngChannel::kDataset);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < dimension; c += 2) {
            const auto b = Philox4x32::generate(seed, static_cast<std::uint32_t>(i),
                                                static_cast<std::uint32_t>(c / 2), channel, 0u);
            double v0, v1;
            if (spec.family == DatasetSpec::Family::kGaussian) {
                const double u1 = uniform_from_words(b.v[0], b.v[1]);
                const double u2 = uniform_from_words(b.v[2], b.v[3]);
                const double r = std::sqrt(-2.0 * std::log(u1)) * std::sqrt(spec.variance);
                v0 = spec.mean + r * std::cos(2.0 * std::numbers::pi * u2);
                v1 = spec.mean + r * std::sin(2.0 * std::numbers::pi * u2);
            } else {
                v0 = spec.mean + spec.width * (2.0 * uniform_from_words(b.v[0], b.v[1]) - 1.0);
                v1 = spec.mean + spec.width * (2.0 * uniform_from_words(b.v[2], b.v[3]) - 1.0);
            }
            data.points[static_cast<std::size_t>(i) * dimension + c] = v0;
            if (c + 1 < dimension) data.points[static_cast<std::size_t>(i) * dimension + c + 1] = v1;
        }
    }
    return data;
}

Dataset Dataset::replace(int i, std::span<const double> z) const {
    if (i < 0 || i >= size()) throw std::out_of_range("replace index out of range");
    if (static_cast<int>(z.size()) != dimension) throw std::invalid_argument("datum dimension mismatch");
    Dataset out = *this;
    std::copy(z.begin(), z.end(), out.points.begin() + static_cast<std::ptrdiff_t>(i) * dimension);
    return out;
}

Polynomial empirical_potential(const LossSpec& loss, const Dataset& data) {
    if (data.size() < 1) throw std::invalid_argument("empty dataset");
    Polynomial sum(loss.dimension);
    for (int i = 0; i < data.size(); ++i) sum += loss.per_datum_potential(data.point(i));
    return sum * Rational(1, data.size());
}

Polynomial population_risk(const LossSpec& loss, const DatasetSpec& spec, int dimension) {
    Polynomial f(dimension);
    switch (loss.family) {
        case LossFamily::kIsotropicQuadratic:
            for (int i = 0; i < dimension; ++i) {
                MultiIndex m2;
                m2[i] = 2;
                f.add_term(m2, Rational(1, 2));
            }
            return f;
        case LossFamily::kSquaredDistance: {
            // E (x_i - z)^2/2 = (x_i - mean)^2/2 + var/2 per coordinate.
            const Rational mean = rational_from_double(spec.mean);
            const Rational var = rational_from_double(
                spec.family == DatasetSpec::Family::kGaussian ? spec.variance
                                                              : spec.width * spec.width / 3.0);
            for (int i = 0; i < dimension; ++i) {
                MultiIndex m2;
                m2[i] = 2;
                f.add_term(m2, Rational(1, 2));
                f.add_term(MultiIndex::unit(i), -mean);
                f.add_term(MultiIndex::zero(), mean * mean / 2 + var / 2);
            }
            return f;
        }
    }
    throw std::logic_error("unknown loss family");
}

MinibatchSpec minibatch_for(const LossSpec& loss, const Dataset& data, int batch_size) {
    MinibatchSpec spec;
    spec.batch_size = batch_size;
    for (int i = 0; i < data.size(); ++i) spec.gradients.push_back(loss.per_datum_gradient(data.point(i)));
    spec.validate();
    return spec;
}

SimLoss sim_loss(const LossSpec& loss, const Dataset& data) {
    SimLoss sim;
    sim.dimension = loss.dimension;
    sim.family = loss.family == LossFamily::kSquaredDistance ? SimLossFamily::kSquaredDistance
                                                             : SimLossFamily::kIsotropicQuadratic;
    if (sim.data_dependent()) sim.data = data.points;
    return sim;
}

double gibbs_generalization_exact(double sigma2, int n, double beta) {
    if (n <= 0) throw std::invalid_argument("sample count must be positive");
    if (beta <= 0) throw std::invalid_argument("beta must be positive");
    return sigma2 / static_cast<double>(n);
}

std::vector<GapRow> generalization_gap_mc(const LossSpec& loss, const DatasetSpec& dspec,
                                          const std::vector<int>& n_list, const GapMcConfig& cfg) {
    if (loss.family != LossFamily::kSquaredDistance)
        throw std::invalid_argument("gap experiment needs the squared-distance family");
    std::vector<GapRow> rows;
    const Polynomial risk = population_risk(loss, dspec, loss.dimension);
    const double sigma2 = dspec.family == DatasetSpec::Family::kGaussian
                              ? dspec.variance
                              : dspec.width * dspec.width / 3.0;

    for (const int n : n_list) {
        const long outer = cfg.outer_datasets > 0 ? cfg.outer_datasets
                                                  : std::max<long>(2000, 40L * n);
        double sum = 0.0, sumsq = 0.0;
        for (long rep = 0; rep < outer; ++rep) {
            const std::uint64_t dseed =
                cfg.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(rep + 1)) ^
                (static_cast<std::uint64_t>(n) << 40);
            const Dataset data = Dataset::draw(dspec, n, loss.dimension, dseed);
            const Polynomial gap_poly = risk - empirical_potential(loss, data);

            SgldConfig scfg;
            scfg.eta = cfg.eta;
            scfg.beta = cfg.beta;
            scfg.batch_size = std::min(cfg.batch_size, n);
            scfg.steps = cfg.steps;
            scfg.replicas = cfg.inner_replicas;
            scfg.x0.assign(static_cast<std::size_t>(loss.dimension), 0.0);
            scfg.seed = dseed + 0x5bd1e995u;
            scfg.record_stride = cfg.steps;
            scfg.stability_limit = loss.stability_limit();
            const auto stats = sgld_run(sim_loss(loss, data), scfg, {gap_poly});
            const auto est = estimate_expectation(stats, gap_poly, cfg.steps);
            sum += est.value;
            sumsq += est.value * est.value;
        }
        GapRow row;
        row.n = n;
        row.datasets = outer;
        row.gap = sum / static_cast<double>(outer);
        const double var = std::max(0.0, (sumsq - sum * sum / outer) / (outer - 1));
        row.std_error = std::sqrt(var / static_cast<double>(outer));
        row.underpowered = row.std_error >= sigma2 / static_cast<double>(n);
        rows.push_back(row);
    }
    return rows;
}

double uniform_stability_eval(const LossSpec& loss, const MeasureBuilder& builder, const Dataset& data,
                              int i, std::span<const double> z_bar,
                              const std::vector<std::vector<double>>& probes) {
    const Dataset neighbor = data.replace(i, z_bar);
    const ModifiedMeasure pi = builder(data);
    const ModifiedMeasure pi_bar = builder(neighbor);
    Rational sup(0);
    for (const auto& probe : probes) {
        const Polynomial f = loss.per_datum_potential(probe);
        const Rational diff = pi.integrate(f) - pi_bar.integrate(f);
        const Rational mag = diff < 0 ? -diff : diff;
        if (mag > sup) sup = mag;
    }
    return to_double(sup);
}

std::vector<std::vector<double>> stability_probes(const DatasetSpec& spec, int dimension,
                                                  std::span<const double> z_old,
                                                  std::span<const double> z_new, int count) {
    std::vector<std::vector<double>> probes;
    const double radius = spec.draw_radius();
    for (int p = 0; p < count; ++p) {
        const double t = count == 1 ? 0.0 : -1.0 + 2.0 * p / (count - 1);
        probes.emplace_back(static_cast<std::size_t>(dimension), spec.mean + radius * t);
    }
    probes.emplace_back(z_old.begin(), z_old.end());
    probes.emplace_back(z_new.begin(), z_new.end());
    return probes;
}

StabilityResult uniform_stability_sweep(const LossSpec& loss, const DatasetSpec& dspec,
                                        const std::vector<int>& n_list, const Rational& beta,
                                        const Rational& eta, int order, int batch_size,
                                        std::uint64_t seed) {
    StabilityResult result;
    const MeasureBuilder builder = [&](const Dataset& d) {
        const Polynomial fz = empirical_potential(loss, d);
        const MinibatchSpec batch = minibatch_for(loss, d, std::min(batch_size, d.size()));
        return build_modified_measure(fz, batch, beta, eta, order);
    };
    std::vector<double> ns, sups;
    const double offset = std::sqrt(dspec.variance);
    for (const int n : n_list) {
        const Dataset data = Dataset::draw(dspec, n, loss.dimension, seed ^ static_cast<std::uint64_t>(n));
        std::vector<double> z_new(data.point(0).begin(), data.point(0).end());
        for (double& v : z_new) v += offset;  // deterministic single-coordinate swap
        const auto probes = stability_probes(dspec, loss.dimension, data.point(0), z_new);
        const double sup = uniform_stability_eval(loss, builder, data, 0, z_new, probes);
        result.rows.push_back(StabilityRow{n, sup});
        ns.push_back(static_cast<double>(n));
        sups.push_back(sup);
    }
    if (ns.size() >= 2) result.slope = loglog_fit(ns, sups).slope;
    return result;
}

Budget runtime_budget(double epsilon, int order, double c, double m, double lipschitz) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
    if (order < 1) throw std::invalid_argument("order must be at least 1");
    if (c <= 0 || m <= 0 || lipschitz <= 0) throw std::invalid_argument("constants must be positive");
    Budget out;
    const double cap = 2.0 * m / (lipschitz * lipschitz);
    const double eps_root = std::pow(epsilon, 1.0 / order);
    out.eta = std::min(cap, c * eps_root);
    if (out.eta >= 1.0)
        throw std::domain_error("step-size cap reaches 1; sample bound degenerates");
    out.n = static_cast<long long>(std::ceil(c / (epsilon * (1.0 - out.eta))));
    out.k = static_cast<long long>(std::ceil(c / eps_root * std::log(1.0 / epsilon)));
    return out;
}

}  // namespace wbea
