#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wbea/polynomial.hpp"

namespace wbea {

// Loss families the simulator integrates. Gradients are evaluated in
// closed form; the symbolic layer owns everything else about a loss.
enum class SimLossFamily {
    kSquaredDistance,    // f(x, z) = |x - z|^2 / 2, gradient x - z
    kIsotropicQuadratic  // f(x, z) = |x|^2 / 2, gradient x (data-free)
};

struct SimLoss {
    SimLossFamily family = SimLossFamily::kIsotropicQuadratic;
    int dimension = 1;
    // Flattened data points (n x dimension); unused for data-free losses.
    std::vector<double> data;

    int data_count() const { return dimension == 0 ? 0 : static_cast<int>(data.size()) / dimension; }
    bool data_dependent() const { return family == SimLossFamily::kSquaredDistance; }
};

struct SgldConfig {
    double eta = 0.1;
    double beta = 1.0;
    int batch_size = 1;
    long steps = 1000;
    int replicas = 1;
    std::vector<double> x0;
    std::uint64_t seed = 0;
    // Statistics are recorded every `record_stride` steps (0 = auto:
    // max(1, steps/512)); the final step is always recorded.
    long record_stride = 0;
    int threads = 1;
    // Warn-only stability envelope 2m/M^2 declared by the loss; <= 0 when
    // unknown.
    double stability_limit = 0.0;
};

struct SeriesPoint {
    long step = 0;
    double mean = 0.0;
    double std_error = 0.0;
    long samples = 0;
};

struct TrajectoryStats {
    std::vector<long> recorded_steps;
    std::vector<Polynomial> test_functions;
    // series[f][t] = estimate of E phi_f(X_{recorded_steps[t]}).
    std::vector<std::vector<SeriesPoint>> series;
    // even_moments[p-1][t] = estimate of E |X|^{2p}, p = 1..3.
    std::vector<std::vector<SeriesPoint>> even_moments;
    // Final state per surviving replica (flattened replica x dimension).
    std::vector<double> final_states;
    int dimension = 1;
    int replicas = 0;
    long aborted_replicas = 0;
    long first_divergence_step = -1;
    bool stability_warning = false;

    double aborted_fraction() const {
        return replicas == 0 ? 0.0 : static_cast<double>(aborted_replicas) / replicas;
    }
    bool diverged() const { return aborted_replicas > 0; }
    // Estimates are unusable once more than 0.1% of replicas aborted.
    bool reliable() const { return aborted_fraction() <= 1e-3; }
};

// Runs R independent SGLD trajectories
//     X_{k+1} = X_k - eta grad F_batch(X_k) + sqrt(2 eta / beta) xi_k
// with minibatch indices and Gaussian noise on independent counter-based
// streams. Bit-deterministic for a fixed config, including across thread
// counts. Non-finite states abort the affected replica and are recorded.
TrajectoryStats sgld_run(const SimLoss& loss, const SgldConfig& cfg, const std::vector<Polynomial>& tests);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Replica-mean estimate of a registered test function at a recorded step.
// Throws if phi was not registered before the run, the step was not
// recorded, or too many replicas aborted.
Estimate estimate_expectation(const TrajectoryStats& stats, const Polynomial& phi, long step);

// Closed-form law of the one-dimensional OU chain
//     X_{k+1} = (1 - eta) X_k + sqrt(2 eta / beta) xi_k,  X_0 = x0,
// in the convention where index k labels X_k after k+1 updates:
// mean (1-eta)^{k+1} x0, variance (2/(beta(2-eta))) (1 - (1-eta)^{2(k+1)}).
// Pass std::nullopt for the stationary pair. Requires 0 < eta < 2.
struct OuLaw {
    double mean = 0.0;
    double variance = 0.0;
};
OuLaw ou_discrete_law(double eta, double beta, std::optional<long> k, double x0);

struct MomentTrendReport {
    int moment_power = 1;  // p in E|X|^{2p}
    bool diverged = false;
    long divergence_step = -1;
    double slope = 0.0;
    double slope_std_error = 0.0;
    bool upward_trend = false;
    bool pass = false;
    std::string message;
};

// Flags growth of E|X|^{2p} over the final half of the recorded horizon
// (least-squares slope positive at 3 sigma) or outright divergence.
MomentTrendReport moment_boundedness_check(const TrajectoryStats& stats, int p);

// Gaussian kernel density estimate on a fixed grid.
std::vector<double> kde_smooth(const std::vector<double>& samples, double bandwidth,
                               const std::vector<double>& grid);

}  // namespace wbea
