#include "wbea/sgld.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <thread>

#include "wbea/rng.hpp"

namespace wbea {

namespace {

constexpr long kChunkReplicas = 4096;  // fixed so reductions are thread-count independent

struct Accum {
    // Per recorded step: live replica count, then per-series sum and sum of
    // squares. Series order: registered test functions, then |x|^2, |x|^4,
    // |x|^6.
    std::vector<long> live;
    std::vector<double> sum;
    std::vector<double> sumsq;
    long aborted = 0;
    long first_divergence = -1;

    Accum(std::size_t n_rec, std::size_t n_series)
        : live(n_rec, 0), sum(n_rec * n_series, 0.0), sumsq(n_rec * n_series, 0.0) {}

    void merge(const Accum& o) {
        for (std::size_t i = 0; i < live.size(); ++i) live[i] += o.live[i];
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += o.sum[i];
        for (std::size_t i = 0; i < sumsq.size(); ++i) sumsq[i] += o.sumsq[i];
        aborted += o.aborted;
        if (o.first_divergence >= 0 &&
            (first_divergence < 0 || o.first_divergence < first_divergence))
            first_divergence = o.first_divergence;
    }
};

struct RunPlan {
    std::vector<long> recorded;
    long stride = 1;
    long steps = 0;

    bool is_recorded(long step, std::size_t& idx) const {
        if (step % stride == 0) {
            idx = static_cast<std::size_t>(step / stride);
            return true;
        }
        if (step == steps) {
            idx = recorded.size() - 1;
            return true;
        }
        return false;
    }
};

RunPlan make_plan(const SgldConfig& cfg) {
    RunPlan plan;
    plan.steps = cfg.steps;
    plan.stride = cfg.record_stride > 0 ? cfg.record_stride : std::max<long>(1, cfg.steps / 512);
    for (long s = 0; s <= cfg.steps; s += plan.stride) plan.recorded.push_back(s);
    if (plan.recorded.back() != cfg.steps) plan.recorded.push_back(cfg.steps);
    return plan;
}

}  // namespace

TrajectoryStats sgld_run(const SimLoss& loss, const SgldConfig& cfg, const std::vector<Polynomial>& tests) {
    const int d = loss.dimension;
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("simulation dimension out of range");
    if (cfg.eta < 0) throw std::invalid_argument("negative step size");
    if (cfg.beta <= 0) throw std::invalid_argument("beta must be positive");
    if (cfg.replicas < 1 || cfg.steps < 0) throw std::invalid_argument("bad replica or step count");
    if (static_cast<int>(cfg.x0.size()) != d) throw std::invalid_argument("x0 dimension mismatch");
    const int n_data = loss.data_count();
    if (loss.data_dependent()) {
        if (n_data < 1) throw std::invalid_argument("data-dependent loss without data");
        if (cfg.batch_size < 1 || cfg.batch_size > n_data)
            throw std::invalid_argument("batch size outside [1, n]");
    }
    for (const auto& t : tests)
        if (t.dimension() != d) throw std::invalid_argument("test function dimension mismatch");
    if (tests.size() > 61) throw std::invalid_argument("too many registered test functions");

    const RunPlan plan = make_plan(cfg);
    const std::size_t n_rec = plan.recorded.size();
    const std::size_t n_fn = tests.size();
    const std::size_t n_series = n_fn + 3;

    TrajectoryStats stats;
    stats.dimension = d;
    stats.replicas = cfg.replicas;
    stats.recorded_steps = plan.recorded;
    stats.test_functions = tests;
    stats.stability_warning = cfg.stability_limit > 0 && cfg.eta >= cfg.stability_limit;
    stats.final_states.assign(static_cast<std::size_t>(cfg.replicas) * static_cast<std::size_t>(d),
                              std::numeric_limits<double>::quiet_NaN());

    const double noise_scale = std::sqrt(2.0 * cfg.eta / cfg.beta);
    const long n_chunks = (cfg.replicas + kChunkReplicas - 1) / kChunkReplicas;

    Accum global(n_rec, n_series);
    std::mutex merge_mutex;
    std::map<long, Accum> pending;
    long next_merge = 0;
    std::atomic<long> next_chunk{0};

    auto run_replica = [&](std::uint32_t replica, Accum& acc) {
        double x[kMaxDim];
        for (int i = 0; i < d; ++i) x[i] = cfg.x0[static_cast<std::size_t>(i)];
        double phi_val[64];
        bool alive = true;

        for (long step = 0; step <= cfg.steps; ++step) {
            std::size_t rec_idx = 0;
            if (plan.is_recorded(step, rec_idx)) {
                acc.live[rec_idx] += 1;
                const std::span<const double> xs(x, static_cast<std::size_t>(d));
                for (std::size_t f = 0; f < n_fn; ++f) phi_val[f] = tests[f].eval(xs);
                double s2 = 0.0;
                for (int i = 0; i < d; ++i) s2 += x[i] * x[i];
                phi_val[n_fn] = s2;
                phi_val[n_fn + 1] = s2 * s2;
                phi_val[n_fn + 2] = s2 * s2 * s2;
                for (std::size_t f = 0; f < n_series; ++f) {
                    acc.sum[rec_idx * n_series + f] += phi_val[f];
                    acc.sumsq[rec_idx * n_series + f] += phi_val[f] * phi_val[f];
                }
            }
            if (step == cfg.steps) break;

            // Gradient of the minibatch empirical loss at x.
            double g[kMaxDim] = {0, 0, 0, 0};
            switch (loss.family) {
                case SimLossFamily::kIsotropicQuadratic:
                    for (int i = 0; i < d; ++i) g[i] = x[i];
                    break;
                case SimLossFamily::kSquaredDistance: {
                    double zbar[kMaxDim] = {0, 0, 0, 0};
                    const int nb = cfg.batch_size;
                    for (int m = 0; m < nb; m += 2) {
                        std::uint32_t i0 = 0, i1 = 0;
                        index_pair(cfg.seed, replica, static_cast<std::uint32_t>(step),
                                   static_cast<std::uint32_t>(m / 2), static_cast<std::uint32_t>(n_data),
                                   i0, i1);
                        const double* z0 = loss.data.data() + static_cast<std::size_t>(i0) * d;
                        for (int i = 0; i < d; ++i) zbar[i] += z0[i];
                        if (m + 1 < nb) {
                            const double* z1 = loss.data.data() + static_cast<std::size_t>(i1) * d;
                            for (int i = 0; i < d; ++i) zbar[i] += z1[i];
                        }
                    }
                    for (int i = 0; i < d; ++i) g[i] = x[i] - zbar[i] / nb;
                    break;
                }
            }

            for (int i = 0; i < d; i += 2) {
                const GaussianPair zz = gaussian_pair(cfg.seed, replica, static_cast<std::uint32_t>(step),
                                                      static_cast<std::uint32_t>(i / 2));
                x[i] = x[i] - cfg.eta * g[i] + noise_scale * zz.z0;
                if (i + 1 < d) x[i + 1] = x[i + 1] - cfg.eta * g[i + 1] + noise_scale * zz.z1;
            }

            bool finite = true;
            for (int i = 0; i < d; ++i) finite = finite && std::isfinite(x[i]);
            if (!finite) {
                acc.aborted += 1;
                const long at = step + 1;
                if (acc.first_divergence < 0 || at < acc.first_divergence) acc.first_divergence = at;
                alive = false;
                break;
            }
        }

        if (alive) {
            double* slot = stats.final_states.data() + static_cast<std::size_t>(replica) * d;
            for (int i = 0; i < d; ++i) slot[i] = x[i];
        }
    };

    auto worker = [&]() {
        for (;;) {
            const long chunk = next_chunk.fetch_add(1);
            if (chunk >= n_chunks) return;
            Accum acc(n_rec, n_series);
            const long lo = chunk * kChunkReplicas;
            const long hi = std::min<long>(lo + kChunkReplicas, cfg.replicas);
            for (long r = lo; r < hi; ++r) run_replica(static_cast<std::uint32_t>(r), acc);
            // Merge chunks in index order so reductions are reproducible.
            std::lock_guard<std::mutex> lock(merge_mutex);
            pending.emplace(chunk, std::move(acc));
            while (!pending.empty() && pending.begin()->first == next_merge) {
                global.merge(pending.begin()->second);
                pending.erase(pending.begin());
                ++next_merge;
            }
        }
    };

    const int n_threads = std::max(1, cfg.threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    stats.aborted_replicas = global.aborted;
    stats.first_divergence_step = global.first_divergence;

    // Compact final states down to survivors, preserving replica order.
    {
        std::vector<double> compact;
        compact.reserve(stats.final_states.size());
        for (long r = 0; r < cfg.replicas; ++r) {
            const double* slot = stats.final_states.data() + static_cast<std::size_t>(r) * d;
            if (std::isfinite(slot[0])) compact.insert(compact.end(), slot, slot + d);
        }
        stats.final_states = std::move(compact);
    }

    auto build_series = [&](std::size_t f) {
        std::vector<SeriesPoint> out(n_rec);
        for (std::size_t t = 0; t < n_rec; ++t) {
            const long n = global.live[t];
            SeriesPoint pt;
            pt.step = plan.recorded[t];
            pt.samples = n;
            if (n > 0) {
                const double s = global.sum[t * n_series + f];
                const double q = global.sumsq[t * n_series + f];
                pt.mean = s / n;
                if (n > 1) {
                    const double var = std::max(0.0, (q - s * s / n) / (n - 1));
                    pt.std_error = std::sqrt(var / n);
                }
            } else {
                pt.mean = std::numeric_limits<double>::quiet_NaN();
                pt.std_error = std::numeric_limits<double>::quiet_NaN();
            }
            out[t] = pt;
        }
        return out;
    };

    stats.series.reserve(n_fn);
    for (std::size_t f = 0; f < n_fn; ++f) stats.series.push_back(build_series(f));
    for (std::size_t p = 0; p < 3; ++p) stats.even_moments.push_back(build_series(n_fn + p));
    return stats;
}

Estimate estimate_expectation(const TrajectoryStats& stats, const Polynomial& phi, long step) {
    if (!stats.reliable())
        throw std::runtime_error("estimates unavailable: " + std::to_string(stats.aborted_replicas) +
                                 " replicas diverged (first at step " +
                                 std::to_string(stats.first_divergence_step) + ")");
    std::size_t f = stats.test_functions.size();
    for (std::size_t i = 0; i < stats.test_functions.size(); ++i)
        if (stats.test_functions[i] == phi) f = i;
    if (f == stats.test_functions.size())
        throw std::invalid_argument("test function was not registered before the run");
    for (std::size_t t = 0; t < stats.recorded_steps.size(); ++t)
        if (stats.recorded_steps[t] == step)
            return Estimate{stats.series[f][t].mean, stats.series[f][t].std_error};
    throw std::invalid_argument("step " + std::to_string(step) + " was not recorded");
}

OuLaw ou_discrete_law(double eta, double beta, std::optional<long> k, double x0) {
    if (beta <= 0) throw std::invalid_argument("beta must be positive");
    if (eta <= 0 || eta >= 2) throw std::invalid_argument("recursion is unstable outside 0 < eta < 2");
    const double v_inf = 2.0 / (beta * (2.0 - eta));
    if (!k) return OuLaw{0.0, v_inf};
    const double decay = std::pow(1.0 - eta, static_cast<double>(*k + 1));
    return OuLaw{decay * x0, v_inf * (1.0 - decay * decay)};
}

MomentTrendReport moment_boundedness_check(const TrajectoryStats& stats, int p) {
    if (p < 1 || p > 3) throw std::invalid_argument("moment power must be 1, 2 or 3");
    MomentTrendReport report;
    report.moment_power = p;
    report.diverged = stats.diverged();
    report.divergence_step = stats.first_divergence_step;

    const auto& series = stats.even_moments[static_cast<std::size_t>(p - 1)];
    const std::size_t n = series.size();
    const std::size_t start = n / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long m = 0;
    for (std::size_t t = start; t < n; ++t) {
        if (!std::isfinite(series[t].mean)) continue;
        const double x = static_cast<double>(series[t].step);
        sx += x;
        sy += series[t].mean;
        sxx += x * x;
        sxy += x * series[t].mean;
        ++m;
    }
    if (m >= 3) {
        const double det = m * sxx - sx * sx;
        report.slope = (m * sxy - sx * sy) / det;
        const double intercept = (sy - report.slope * sx) / m;
        double ss_res = 0;
        for (std::size_t t = start; t < n; ++t) {
            if (!std::isfinite(series[t].mean)) continue;
            const double x = static_cast<double>(series[t].step);
            const double r = series[t].mean - (intercept + report.slope * x);
            ss_res += r * r;
        }
        const double sigma2 = ss_res / (m - 2);
        report.slope_std_error = std::sqrt(sigma2 * m / det);
        report.upward_trend = report.slope > 3.0 * report.slope_std_error && report.slope > 0;
    }
    report.pass = !report.diverged && !report.upward_trend;
    if (report.diverged) {
        report.message = "divergence at step " + std::to_string(report.divergence_step) + " (" +
                         std::to_string(stats.aborted_replicas) + " replicas)";
    } else if (report.upward_trend) {
        report.message = "moment trend positive at 3 sigma";
    } else {
        report.message = "flat or decreasing";
    }
    return report;
}

std::vector<double> kde_smooth(const std::vector<double>& samples, double bandwidth,
                               const std::vector<double>& grid) {
    if (samples.empty()) throw std::invalid_argument("kernel density estimate needs samples");
    if (bandwidth <= 0) throw std::invalid_argument("bandwidth must be positive");
    std::vector<double> out(grid.size(), 0.0);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth *
                               std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double acc = 0.0;
        for (const double s : samples) {
            const double u = (grid[i] - s) / bandwidth;
            acc += std::exp(-0.5 * u * u);
        }
        out[i] = acc * norm;
    }
    return out;
}

}  // namespace wbea
