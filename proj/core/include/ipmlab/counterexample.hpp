#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ipmlab/diagnostics.hpp"
#include "ipmlab/init_law.hpp"
#include "ipmlab/kernel.hpp"
#include "ipmlab/objective.hpp"
#include "ipmlab/random.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab::counterexample {

/// y_l = z_l + y with z_l ~ U[-z_half_width, z_half_width] i.i.d. and
/// y ~ U[c - y_half_width, c + y_half_width], c = (g_min + g_max) / 2.
struct LlnCounterexampleSpec {
  double g_min = 1.0;
  double g_max = 2.0;
  double z_half_width = 0.125;
  double y_half_width = 0.25;
  std::size_t N = 1000;

  /// z half-width (g_max - g_min)/8, y half-width (g_max - g_min)/4.
  static LlnCounterexampleSpec with_defaults(double g_min, double g_max, std::size_t N);

  double center() const noexcept { return 0.5 * (g_min + g_max); }
  /// Throws std::invalid_argument when the bounds or support constraints fail.
  void validate() const;
};

struct LlnRecord {
  double y = 0.0;
  double mean_n = 0.0;
  double min_yl = 0.0;
  double max_yl = 0.0;
};

/// Replicate r uses rng.derive(r): y first, then z_1..z_N.
std::vector<LlnRecord> sample_lln_counterexample(const LlnCounterexampleSpec& spec,
                                                 std::size_t replicates, const RandomStream& rng,
                                                 unsigned jobs = 1);

struct DependenceStatistic {
  /// Pearson corr(y, mean_N); nullopt when either variance is zero.
  std::optional<double> correlation;
  /// Fisher-z interval, meaningful only when correlation is set.
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t replicates = 0;

  bool refutes_independence() const noexcept {
    return correlation.has_value() && (ci_lo > 0.0 || ci_hi < 0.0);
  }
};

/// Needs R >= 1000.
DependenceStatistic dependence_statistic(std::span<const LlnRecord> records, double z = 1.96);

/// Mean of mean_N across replicates with a normal CI.
diagnostics::Estimate mean_of_means(std::span<const LlnRecord> records, double z = 1.96);

struct ExchangeableMixtureSpec {
  std::vector<double> component_centers;
  std::vector<double> component_weights;
  double within_sd = 1.0;
  std::size_t N = 16;

  GaussianMixtureLaw law() const;
  /// Throws std::invalid_argument on malformed weights or sd.
  void validate() const;
};

Population sample_exchangeable_mixture(const ExchangeableMixtureSpec& spec,
                                       const RandomStream& rng);

struct GapPoint {
  double x = 0.0;
  double exact_estimate = 0.0;
  double ipm_prediction = 0.0;
  double gap = 0.0;
  double ci_half_width = 0.0;
};

struct TransitionGapReport {
  std::vector<GapPoint> points;
  /// Simultaneous z used for every ci_half_width.
  double z = 0.0;
  std::size_t population_size = 0;
  std::size_t replicates = 0;
  double var_eta = 0.0;
  diagnostics::Estimate slot_covariance;
  /// Largest |gap| / ci_half_width over the points.
  double max_gap_ratio = 0.0;
  double grid_leaked_mass = 0.0;

  bool gap_exceeds(double multiple) const noexcept;
  bool within_ci() const noexcept;
};

struct GapOptions {
  std::size_t grid_bins = 2048;
  /// Grid support; defaults to the objective's one-dimensional domain.
  std::optional<Interval> grid_range;
  /// Family confidence level across all points.
  double level = 0.95;
  unsigned jobs = 1;
};

/// Exact next marginal from mixture populations against the one-step grid
/// prediction started from the mixture's marginal density. Uses
/// rng.derive(0) for the Monte Carlo replicates.
TransitionGapReport transition_gap_demo(const ExchangeableMixtureSpec& spec, const Objective& obj,
                                        const MutationKernel& kernel, std::span<const double> xs,
                                        std::size_t replicates, const RandomStream& rng,
                                        const GapOptions& options = {});

struct EtaVarianceRow {
  std::size_t N = 0;
  std::size_t replicates = 0;
  double var_eta = 0.0;
  double cov_estimate = 0.0;
  double cov_ci_half_width = 0.0;
};

/// Var(eta^N) of initial mixture populations against the cross-slot
/// fitness covariance, one row per N. Size N uses rng.derive(N).
std::vector<EtaVarianceRow> eta_variance_scan(const ExchangeableMixtureSpec& spec,
                                              const Objective& obj,
                                              std::span<const std::size_t> sizes,
                                              std::size_t replicates, const RandomStream& rng,
                                              unsigned jobs = 1);

}  // namespace ipmlab::counterexample
