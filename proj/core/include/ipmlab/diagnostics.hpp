#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ipmlab/init_law.hpp"
#include "ipmlab/ipm.hpp"
#include "ipmlab/kernel.hpp"
#include "ipmlab/objective.hpp"
#include "ipmlab/operators.hpp"
#include "ipmlab/random.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab::diagnostics {

// ---------------------------------------------------------------------------
// Distances between laws on R. Exact Prokhorov distances are not computed;
// these are the surrogates reported instead.

enum class Metric { ks, tv_hist, energy, fitness_cov };

std::string_view metric_name(Metric m) noexcept;
/// Throws std::invalid_argument for unknown names.
Metric metric_from_name(std::string_view name);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| over pooled points.
double ks_statistic(std::span<const double> a, std::span<const double> b);
/// One-sample statistic against the (piecewise-linear) CDF of a grid.
double ks_statistic(std::span<const double> samples, const ipm::MarginalDensityGrid& grid);

/// Asymptotic two-sided Kolmogorov quantiles: P(sqrt(n_eff) D > c) = alpha.
inline constexpr double kKolmogorov95 = 1.358;
inline constexpr double kKolmogorov99 = 1.628;
/// c * sqrt(1/na + 1/nb); pass nb = 0 for the one-sample case (exact reference law).
double ks_null_quantile(std::size_t na, std::size_t nb, double c = kKolmogorov95);

/// 1/2 sum_b |p_a(b) - p_b(b)| over `bins` equal bins on [lo, hi] plus one
/// sentinel bin on each side for out-of-range mass.
double tv_histogram_distance(std::span<const double> a, std::span<const double> b, double lo,
                             double hi, std::size_t bins);
/// Same, with the reference masses taken from a grid's CDF on [grid.lo, grid.hi].
double tv_histogram_distance(std::span<const double> samples, const ipm::MarginalDensityGrid& grid,
                             std::size_t bins);
/// Rough sampling-noise scale of tv_histogram_distance for a reference with
/// bin masses p: z/2 sum_b sqrt(p_b (1 - p_b)) sqrt(1/na + 1/nb).
double tv_noise_half_width(std::span<const double> bin_masses, std::size_t na, std::size_t nb,
                           double z = 1.96);

/// Two-sample energy distance 2 E|X-Y| - E|X-X'| - E|Y-Y'| (V-statistic form).
double energy_distance(std::span<const double> a, std::span<const double> b);

struct DistanceReport {
  Metric metric = Metric::ks;
  double value = 0.0;
  std::size_t sample_size_a = 0;
  std::size_t sample_size_b = 0;  // 0 when the reference is an exact law (grid)
  std::size_t generation = 0;
  std::size_t population_size = 0;
};

// ---------------------------------------------------------------------------
// Basic estimators with normal-approximation confidence intervals.

/// Two-sided standard normal quantile z with P(|Z| <= z) = level.
double normal_two_sided_z(double level);
/// Bonferroni z for `count` simultaneous two-sided intervals at family level `level`.
double simultaneous_z(std::size_t count, double level);

struct Estimate {
  double value = 0.0;
  double ci_half_width = 0.0;
  std::size_t replicates = 0;
};

Estimate mean_estimate(std::span<const double> xs, double z = 1.96);
/// Unbiased sample variance (no CI).
double sample_variance(std::span<const double> xs);
/// Sample covariance with CI from the spread of centred cross products.
Estimate covariance_estimate(std::span<const double> a, std::span<const double> b,
                             double z = 1.96);
/// Pearson correlation; nullopt when either input has zero variance.
std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Population-level statistics.

/// (1/N) sum_l g(x_l).
double mean_fitness(const Population& pop, const Objective& obj);

/// Covariance across replicates between g(slot a) and g(slot b) (default the
/// first two slots). Needs n >= 2 and R >= 30.
Estimate pairwise_fitness_covariance(std::span<const Population> replicated_pops,
                                     const Objective& obj, std::size_t slot_a = 0,
                                     std::size_t slot_b = 1, double z = 1.96);

/// First coordinate of pops[r][slot] for every replicate r (0-based slot).
std::vector<double> marginal_samples_of_slot(std::span<const Population> replicated_pops,
                                             std::size_t slot);
/// The individuals pops[r][slot] as a population of R individuals.
Population slot_individuals(std::span<const Population> replicated_pops, std::size_t slot);

using PopulationSampler = std::function<Population(std::size_t n, const RandomStream& rng)>;
/// Sampler drawing one-dimensional populations from an initial law.
PopulationSampler law_sampler(const InitLaw& law, std::size_t dim = 1);

struct MarginalEstimate {
  std::vector<double> xs;
  std::vector<double> estimate;
  std::vector<double> standard_error;
  std::vector<double> ci_half_width;
  /// eta^N = mean fitness of every replicate population.
  std::vector<double> eta;
  /// Covariance of g(slot 0), g(slot 1) across replicates (N >= 2 only).
  std::optional<Estimate> slot_covariance;
  std::size_t population_size = 0;
  std::size_t replicates = 0;
};

/// Monte Carlo estimate of the exact next-generation marginal density of
/// slot 0 under selection + mutation:
///   f(x) = E[ g(X^1) f_w(x | X^1) / eta^N ],  eta^N = (1/N) sum_l g(X^l),
/// averaging over R replicate populations drawn from `sampler`.
/// Replicate r uses rng.derive(r). Needs R >= 1000 and a kernel with a density.
MarginalEstimate exact_next_marginal_mc(const PopulationSampler& sampler, const Objective& obj,
                                        const MutationKernel& kernel, std::span<const double> xs,
                                        std::size_t population_size, std::size_t replicates,
                                        const RandomStream& rng, double z = 1.96,
                                        unsigned jobs = 1);

/// Pairwise checks on the first m slots of replicated populations (first coordinate).
struct ProjectionReport {
  std::size_t m = 0;
  std::size_t replicates = 0;
  /// ks[i][j]: two-sample KS between slot i and slot j marginals.
  std::vector<std::vector<double>> ks;
  /// Per slot: KS between slot i and all m slots pooled.
  std::vector<double> ks_vs_pooled;
  std::vector<std::vector<double>> correlation;
  double max_ks = 0.0;
  double max_ks_vs_pooled = 0.0;
  double max_abs_correlation = 0.0;
  /// Average of the m(m-1)/2 pairwise correlations (undefined pairs skipped).
  double mean_pairwise_correlation = 0.0;
  std::size_t pairs = 0;
};

/// Needs R >= 1000 and 1 <= m <= the smallest population size.
ProjectionReport projection_joint_check(std::span<const Population> replicated_pops, std::size_t m);

// ---------------------------------------------------------------------------
// Convergence sweep.

struct ConvergenceRow {
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::string metric;
  double value = 0.0;
  double ci_half_width = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ConvergenceRow&, const ConvergenceRow&) = default;
};

/// Rows keyed uniquely by (k, n, metric), kept sorted by that key.
class ConvergenceCurve {
 public:
  /// Throws std::invalid_argument on a duplicate key.
  void add(ConvergenceRow row);
  const std::vector<ConvergenceRow>& rows() const noexcept { return rows_; }
  const ConvergenceRow* find(std::size_t k, std::size_t n, std::string_view metric) const;
  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::vector<ConvergenceRow> rows_;
};

using IpmReference =
    std::variant<std::vector<ipm::MarginalDensityGrid>, std::vector<ipm::ParticleEnsemble>>;

struct SweepSpec {
  operators::OperatorStack stack;
  Objective objective;
  InitLaw init;
  std::size_t dimension = 1;
  std::size_t generations = 0;
  std::vector<std::size_t> sizes;
  std::size_t replicates = 0;
  /// IPM states for generations 0..K computed from the same stack and init.
  IpmReference reference;
  std::size_t tv_bins = 64;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// For each n and replicate r, runs one EA trajectory from root.derive(n)
/// (init from seed_plan(.., r, 0, init), generation k stepped with stream
/// root.derive(n).derive(r).derive(k)) and compares slot-0 marginals with
/// the reference at every k <= K. Emits metrics "ks", "tv_hist" and, for
/// n >= 2, "fitness_cov".
ConvergenceCurve convergence_sweep(const SweepSpec& spec, const RandomStream& root);

/// Replicated EA trajectories: result[r][k] is generation k of replicate r.
std::vector<std::vector<Population>> run_replicates(const operators::OperatorStack& stack,
                                                    const Objective& obj, const InitLaw& init,
                                                    std::size_t dim, std::size_t n,
                                                    std::size_t generations,
                                                    std::size_t replicates,
                                                    const RandomStream& root, unsigned jobs = 1);

}  // namespace ipmlab::diagnostics
