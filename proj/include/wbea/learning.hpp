#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wbea/measures.hpp"
#include "wbea/sgld.hpp"

namespace wbea {

enum class LossFamily {
    kSquaredDistance,    // f(x, z) = |x - z|^2 / 2
    kIsotropicQuadratic  // f(x, z) = |x|^2 / 2
};

// A polynomial loss family together with its declared dissipativity and
// smoothness envelope: <x, grad f> >= m |x|^2 - b and grad f Lipschitz M,
// |grad f| <= M |x| + M_1, f(0, z) <= M_0. For the squared-distance family
// the constants depend on the data range, so they are declared for a
// radius and validated by probing rather than proven.
struct LossSpec {
    LossFamily family = LossFamily::kIsotropicQuadratic;
    int dimension = 1;
    double m = 1.0;
    double b = 0.0;
    double lipschitz = 1.0;  // M
    double gradient_offset = 0.0;  // M_1
    double value_offset = 0.0;     // M_0

    double stability_limit() const { return 2.0 * m / (lipschitz * lipschitz); }

    static LossSpec isotropic_quadratic(int dim);
    static LossSpec squared_distance(int dim, double data_radius);

    Polynomial per_datum_potential(std::span<const double> z) const;
    std::vector<Polynomial> per_datum_gradient(std::span<const double> z) const;

    // Samples (x, z) probe pairs and checks the declared constants; returns
    // false when any probe violates them.
    bool validate_constants(std::uint64_t seed, double x_radius, double z_radius, int probes = 1000) const;
};

struct DatasetSpec {
    enum class Family { kGaussian, kUniform };
    Family family = Family::kGaussian;
    double mean = 0.0;
    double variance = 1.0;
    // Half width of the support for the uniform family (mean +/- width).
    double width = 1.0;

    double draw_radius() const;
};

// A concrete sample z_1..z_n from the generator, flattened n x dimension.
struct Dataset {
    std::vector<double> points;
    int dimension = 1;
    DatasetSpec spec;
    std::uint64_t seed = 0;

    int size() const { return dimension == 0 ? 0 : static_cast<int>(points.size()) / dimension; }
    std::span<const double> point(int i) const {
        return {points.data() + static_cast<std::size_t>(i) * dimension, static_cast<std::size_t>(dimension)};
    }

    static Dataset draw(const DatasetSpec& spec, int n, int dimension, std::uint64_t seed);
    // Neighboring dataset differing in exactly coordinate i.
    Dataset replace(int i, std::span<const double> z) const;
};

// F_z = (1/n) sum_i f(., z_i), exact (doubles are dyadic rationals).
Polynomial empirical_potential(const LossSpec& loss, const Dataset& data);

// Population risk F = E_z f(., z) in closed form for the supported
// generator families.
Polynomial population_risk(const LossSpec& loss, const DatasetSpec& spec, int dimension);

MinibatchSpec minibatch_for(const LossSpec& loss, const Dataset& data, int batch_size);
SimLoss sim_loss(const LossSpec& loss, const Dataset& data);

// Closed-form expected generalization gap of the Gibbs measure for the
// squared-distance family with i.i.d. data of variance sigma2 per
// coordinate: sigma2 / n, independent of beta.
double gibbs_generalization_exact(double sigma2, int n, double beta);

struct GapRow {
    int n = 0;
    double gap = 0.0;
    double std_error = 0.0;
    long datasets = 0;
    bool underpowered = false;
};

struct GapMcConfig {
    double eta = 0.3;
    double beta = 4.0;
    int batch_size = 8;
    long steps = 256;
    int inner_replicas = 2;
    // Outer dataset replicates per n; 0 = auto (max(2000, 40 n)).
    long outer_datasets = 0;
    std::uint64_t seed = 1;
};

// Monte Carlo estimate of E[F(X_k) - F_z(X_k)] over fresh datasets and
// independent SGLD runs, one row per n. The population term uses the
// closed-form risk; the empirical term uses the sampled dataset.
std::vector<GapRow> generalization_gap_mc(const LossSpec& loss, const DatasetSpec& dspec,
                                          const std::vector<int>& n_list, const GapMcConfig& cfg);

using MeasureBuilder = std::function<ModifiedMeasure(const Dataset&)>;

// sup over probe data of |pi_z(f(., z)) - pi_zbar(f(., z))| for the
// neighboring pair (data, data with coordinate i replaced); integration is
// exact. The probe set approximates the sup from below.
double uniform_stability_eval(const LossSpec& loss, const MeasureBuilder& builder, const Dataset& data,
                              int i, std::span<const double> z_bar,
                              const std::vector<std::vector<double>>& probes);

// Default probe set: values spanning mean +/- 4 sigma plus the swapped
// pair itself.
std::vector<std::vector<double>> stability_probes(const DatasetSpec& spec, int dimension,
                                                  std::span<const double> z_old,
                                                  std::span<const double> z_new, int count = 32);

struct StabilityRow {
    int n = 0;
    double sup_difference = 0.0;
};

struct StabilityResult {
    std::vector<StabilityRow> rows;
    double slope = 0.0;  // fitted d log sup / d log n
};

// n-sweep of the exact stability evaluation with a fixed replacement
// offset; the builder is rebuilt per dataset.
StabilityResult uniform_stability_sweep(const LossSpec& loss, const DatasetSpec& dspec,
                                        const std::vector<int>& n_list, const Rational& beta,
                                        const Rational& eta, int order, int batch_size,
                                        std::uint64_t seed);

struct Budget {
    double eta = 0.0;
    long long n = 0;
    long long k = 0;
};

// Smallest iteration and sample counts (and largest step size) meeting
//   eta <= min(2m/M^2, C eps^{1/N}),  n >= C/(eps (1-eta)),
//   k >= C eps^{-1/N} log(1/eps).
// Throws when the step-size cap reaches 1 and the sample bound degenerates.
Budget runtime_budget(double epsilon, int order, double c, double m, double lipschitz);

}  // namespace wbea
