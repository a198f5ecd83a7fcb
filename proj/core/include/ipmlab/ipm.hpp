#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "ipmlab/init_law.hpp"
#include "ipmlab/kernel.hpp"
#include "ipmlab/objective.hpp"
#include "ipmlab/operators.hpp"
#include "ipmlab/random.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab::ipm {

/// Tolerance on the midpoint-rule mass of a grid.
inline constexpr double kMassTolerance = 1e-8;
/// Default minimum particle count for diagnostic use.
inline constexpr std::size_t kDefaultParticleFloor = 1000;

/// One-dimensional marginal density on [lo, hi] with B equal bins; values are
/// densities at bin midpoints and sum(values) * delta == 1.
class MarginalDensityGrid {
 public:
  /// Throws NumericalError unless values >= 0 and mass is 1 within kMassTolerance.
  MarginalDensityGrid(double lo, double hi, std::vector<double> values,
                      std::size_t generation = 0);
  /// Rescales values to unit mass first. Throws NumericalError on zero mass.
  static MarginalDensityGrid normalized(double lo, double hi, std::vector<double> values,
                                        std::size_t generation = 0);
  /// Bin averages of a law, from CDF differences.
  static MarginalDensityGrid from_law(const InitLaw& law, double lo, double hi, std::size_t bins);
  /// Density sampled at bin midpoints, then normalized.
  static MarginalDensityGrid from_density(const std::function<double(double)>& density, double lo,
                                          double hi, std::size_t bins);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t bins() const noexcept { return values_.size(); }
  double delta() const noexcept { return (hi_ - lo_) / static_cast<double>(values_.size()); }
  double midpoint(std::size_t i) const noexcept {
    return lo_ + (static_cast<double>(i) + 0.5) * delta();
  }
  std::size_t generation() const noexcept { return generation_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double mass() const noexcept;
  /// Bin index containing x, clamped to [0, B).
  std::size_t bin_of(double x) const noexcept;
  /// CDF at the B + 1 bin edges.
  std::vector<double> edge_cdf() const;
  /// Piecewise-linear CDF (0 below lo, 1 above hi).
  double cdf(double x) const noexcept;
  /// Linear interpolation between midpoints; 0 outside [lo, hi].
  double density_at(double x) const noexcept;
  double mean() const noexcept;
  double variance() const noexcept;

  MarginalDensityGrid with_generation(std::size_t generation) const;

 private:
  double lo_;
  double hi_;
  std::vector<double> values_;
  std::size_t generation_;
};

struct GridStep {
  MarginalDensityGrid grid;
  /// Mass that fell outside [lo, hi] (plus quadrature drift) before renormalization.
  double leaked_mass = 0.0;
};

/// f'(x) = int f(y) g(y) f_w(x|y) dy / int f(y) g(y) dy by midpoint quadrature,
/// renormalized; generation + 1. Throws NumericalError when the denominator
/// underflows, std::invalid_argument when obj is not one-dimensional or does
/// not cover the grid.
GridStep grid_selection_mutation_step(const MarginalDensityGrid& grid, const Objective& obj,
                                      const MutationKernel& kernel);

/// f' = f * f_w (the g == 1 case of the step above).
GridStep grid_mutation_step(const MarginalDensityGrid& grid, const MutationKernel& kernel);

/// i.i.d. sample pool representing the IPM marginal law in any dimension.
struct ParticleEnsemble {
  Population particles;

  std::size_t size() const noexcept { return particles.size(); }
  std::size_t generation() const noexcept { return particles.generation(); }
};

/// Every output particle is generated independently from the pool:
///  - mutation: perturb a uniformly resampled particle;
///  - recombination: combine k uniformly drawn particles (with replacement);
///  - selection: resample one particle with probability proportional to g.
/// Particle p uses stream rng.derive(p). Generation + 1.
/// Throws std::invalid_argument when the pool is smaller than floor.
ParticleEnsemble particle_ipm_step(const ParticleEnsemble& ens,
                                   const operators::OperatorDescriptor& op, const Objective& obj,
                                   const RandomStream& rng,
                                   std::size_t floor = kDefaultParticleFloor, unsigned jobs = 1);

/// Grid trajectory: states[0] = initial, states[k+1] = one stack application.
struct GridTrajectory {
  std::vector<MarginalDensityGrid> states;
  /// leaked_mass[k] is the total leak of the step producing states[k + 1].
  std::vector<double> leaked_mass;
};

/// Throws std::invalid_argument if the stack contains recombination (no grid form).
void check_grid_compatible(const operators::OperatorStack& stack);

GridTrajectory iterate_ipm(const MarginalDensityGrid& initial, const operators::OperatorStack& stack,
                           const Objective& obj, std::size_t steps);

/// Particle trajectory; step k uses rng.derive(k), operator p within it
/// rng.derive(k).derive(role).derive(p).
std::vector<ParticleEnsemble> iterate_ipm(const ParticleEnsemble& initial,
                                          const operators::OperatorStack& stack,
                                          const Objective& obj, std::size_t steps,
                                          const RandomStream& rng,
                                          std::size_t floor = kDefaultParticleFloor,
                                          unsigned jobs = 1);

/// count i.i.d. draws: inverse CDF over bins, uniform jitter within the bin.
ParticleEnsemble sample_from_grid(const MarginalDensityGrid& grid, std::size_t count,
                                  const RandomStream& rng);

struct HistogramGrid {
  MarginalDensityGrid grid;
  /// Fraction of samples outside [lo, hi], clipped into the edge bins.
  double clip_fraction = 0.0;
};

/// Normalized histogram density. Needs at least 100 samples; throws
/// NumericalError when every sample lies outside [lo, hi].
HistogramGrid grid_from_samples(std::span<const double> samples, double lo, double hi,
                                std::size_t bins);

}  // namespace ipmlab::ipm
