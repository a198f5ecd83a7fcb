#include "ipmlab/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ipmlab/errors.hpp"
#include "ipmlab/parallel.hpp"

namespace ipmlab::ipm {

namespace {

void check_box(double lo, double hi, std::size_t bins) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw std::invalid_argument("grid needs finite lo < hi");
  }
  if (bins == 0) throw std::invalid_argument("grid needs at least one bin");
}

double midpoint_mass(const std::vector<double>& values, double delta) {
  return std::accumulate(values.begin(), values.end(), 0.0) * delta;
}

}  // namespace

MarginalDensityGrid::MarginalDensityGrid(double lo, double hi, std::vector<double> values,
                                         std::size_t generation)
    : lo_(lo), hi_(hi), values_(std::move(values)), generation_(generation) {
  check_box(lo_, hi_, values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
      throw NumericalError("grid value at bin " + std::to_string(i) + " is negative or not finite");
    }
  }
  const double m = mass();
  if (std::abs(m - 1.0) > kMassTolerance) {
    throw NumericalError("grid mass " + std::to_string(m) + " differs from 1");
  }
}

MarginalDensityGrid MarginalDensityGrid::normalized(double lo, double hi, std::vector<double> values,
                                                    std::size_t generation) {
  check_box(lo, hi, values.size());
  const double delta = (hi - lo) / static_cast<double>(values.size());
  const double m = midpoint_mass(values, delta);
  if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("grid has no mass to normalize");
  for (auto& v : values) v /= m;
  return MarginalDensityGrid(lo, hi, std::move(values), generation);
}

MarginalDensityGrid MarginalDensityGrid::from_law(const InitLaw& law, double lo, double hi,
                                                  std::size_t bins) {
  check_box(lo, hi, bins);
  const double delta = (hi - lo) / static_cast<double>(bins);
  std::vector<double> values(bins);
  double left = marginal_cdf(law, lo);
  for (std::size_t i = 0; i < bins; ++i) {
    const double right = marginal_cdf(law, lo + static_cast<double>(i + 1) * delta);
    values[i] = std::max(0.0, right - left) / delta;
    left = right;
  }
  return normalized(lo, hi, std::move(values));
}

MarginalDensityGrid MarginalDensityGrid::from_density(const std::function<double(double)>& density,
                                                      double lo, double hi, std::size_t bins) {
  check_box(lo, hi, bins);
  const double delta = (hi - lo) / static_cast<double>(bins);
  std::vector<double> values(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    values[i] = density(lo + (static_cast<double>(i) + 0.5) * delta);
  }
  return normalized(lo, hi, std::move(values));
}

double MarginalDensityGrid::mass() const noexcept { return midpoint_mass(values_, delta()); }

std::size_t MarginalDensityGrid::bin_of(double x) const noexcept {
  if (!(x > lo_)) return 0;
  const auto i = static_cast<std::size_t>((x - lo_) / delta());
  return std::min(i, values_.size() - 1);
}

std::vector<double> MarginalDensityGrid::edge_cdf() const {
  std::vector<double> cdf(values_.size() + 1, 0.0);
  const double d = delta();
  for (std::size_t i = 0; i < values_.size(); ++i) cdf[i + 1] = cdf[i] + values_[i] * d;
  return cdf;
}

double MarginalDensityGrid::cdf(double x) const noexcept {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  const double d = delta();
  const std::size_t b = bin_of(x);
  double below = 0.0;
  for (std::size_t i = 0; i < b; ++i) below += values_[i];
  const double left_edge = lo_ + static_cast<double>(b) * d;
  return std::min(1.0, (below * d) + values_[b] * (x - left_edge));
}

double MarginalDensityGrid::density_at(double x) const noexcept {
  if (x < lo_ || x > hi_) return 0.0;
  const double t = (x - lo_) / delta() - 0.5;
  if (t <= 0.0) return values_.front();
  const auto i = static_cast<std::size_t>(t);
  if (i + 1 >= values_.size()) return values_.back();
  const double w = t - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double MarginalDensityGrid::mean() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) m += midpoint(i) * values_[i];
  return m * delta();
}

double MarginalDensityGrid::variance() const noexcept {
  const double mu = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double t = midpoint(i) - mu;
    v += t * t * values_[i];
  }
  return v * delta();
}

MarginalDensityGrid MarginalDensityGrid::with_generation(std::size_t generation) const {
  MarginalDensityGrid copy = *this;
  copy.generation_ = generation;
  return copy;
}

namespace {

GridStep reweight_and_convolve(const MarginalDensityGrid& grid, std::span<const double> weights,
                               const MutationKernel& kernel) {
  const std::size_t bins = grid.bins();
  const double delta = grid.delta();
  const auto& f = grid.values();

  std::vector<double> w(bins);
  double denom = 0.0;
  for (std::size_t j = 0; j < bins; ++j) {
    w[j] = f[j] * weights[j];
    denom += w[j] * delta;
  }
  if (!(denom >= 1e-300) || !std::isfinite(denom)) {
    throw NumericalError("grid step: normalizing integral " + std::to_string(denom) +
                         " underflows (corrupted grid?)");
  }

  std::vector<double> out(bins, 0.0);
  if (kernel.is_zero_noise()) {
    for (std::size_t i = 0; i < bins; ++i) out[i] = w[i] / denom;
  } else {
    // h((i - j) delta) for offsets -(B-1) .. (B-1)
    std::vector<double> table(2 * bins - 1);
    for (std::size_t o = 0; o < table.size(); ++o) {
      const double offset = static_cast<double>(static_cast<std::ptrdiff_t>(o) -
                                                static_cast<std::ptrdiff_t>(bins - 1));
      table[o] = kernel.increment_density(offset * delta);
    }
    for (std::size_t j = 0; j < bins; ++j) {
      if (w[j] == 0.0) continue;
      const double wj = w[j] * delta / denom;
      const double* row = table.data() + (bins - 1) - j;  // row[i] = h((i - j) delta)
      for (std::size_t i = 0; i < bins; ++i) out[i] += wj * row[i];
    }
  }

  const double raw_mass = midpoint_mass(out, delta);
  if (!(raw_mass > 0.0)) throw NumericalError("grid step: all mass left the domain box");
  return GridStep{MarginalDensityGrid::normalized(grid.lo(), grid.hi(), std::move(out),
                                                  grid.generation() + 1),
                  1.0 - raw_mass};
}

}  // namespace

GridStep grid_selection_mutation_step(const MarginalDensityGrid& grid, const Objective& obj,
                                      const MutationKernel& kernel) {
  if (obj.dim() != 1) throw std::invalid_argument("grid engine needs a one-dimensional objective");
  const Interval side = obj.domain()[0];
  if (grid.lo() < side.lo || grid.hi() > side.hi) {
    throw std::invalid_argument("grid box must lie inside the objective domain");
  }
  std::vector<double> g(grid.bins());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double y = grid.midpoint(j);
    g[j] = obj(std::span<const double>(&y, 1));
    if (!std::isfinite(g[j])) throw NumericalError("objective not finite at grid midpoint");
  }
  return reweight_and_convolve(grid, g, kernel);
}

GridStep grid_mutation_step(const MarginalDensityGrid& grid, const MutationKernel& kernel) {
  const std::vector<double> ones(grid.bins(), 1.0);
  return reweight_and_convolve(grid, ones, kernel);
}

ParticleEnsemble particle_ipm_step(const ParticleEnsemble& ens,
                                   const operators::OperatorDescriptor& op, const Objective& obj,
                                   const RandomStream& rng, std::size_t floor, unsigned jobs) {
  const Population& pool = ens.particles;
  const std::size_t count = pool.size();
  if (count < std::max<std::size_t>(floor, 1)) {
    throw std::invalid_argument("particle pool of " + std::to_string(count) +
                                " is below the floor of " + std::to_string(floor));
  }
  const std::size_t d = pool.dim();
  std::vector<double> out(count * d);

  if (std::holds_alternative<operators::Selection>(op)) {
    const auto fitness = evaluate_fitness(pool, obj);
    std::vector<double> cumulative(count);
    std::partial_sum(fitness.begin(), fitness.end(), cumulative.begin());
    const double total = cumulative.back();
    parallel_for(count, jobs, [&](std::size_t p) {
      RandomStream s = rng.derive(p);
      const double u = s.uniform() * total;
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const auto j = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                           count - 1);
      std::copy_n(pool[j].begin(), d, out.begin() + p * d);
    });
  } else if (const auto* m = std::get_if<operators::Mutation>(&op)) {
    parallel_for(count, jobs, [&](std::size_t p) {
      RandomStream s = rng.derive(p);
      const std::size_t j = s.index(count);
      m->kernel.sample(pool[j], s, std::span<double>(out.data() + p * d, d));
    });
  } else {
    const auto& law = std::get<operators::Recombination>(op).law;
    const std::size_t k = law.arity();
    parallel_for(count, jobs, [&](std::size_t p) {
      RandomStream s = rng.derive(p);
      std::vector<double> parents(k * d);
      for (std::size_t l = 0; l < k; ++l) {
        std::copy_n(pool[s.index(count)].begin(), d, parents.begin() + l * d);
      }
      const auto u = law.sample_coefficients(d, s);
      for (std::size_t r = 0; r < d; ++r) {
        double acc = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
          for (std::size_t c = 0; c < d; ++c) acc += u[l * d * d + r * d + c] * parents[l * d + c];
        }
        out[p * d + r] = acc;
      }
    });
  }
  return ParticleEnsemble{Population(d, std::move(out), pool.generation() + 1)};
}

void check_grid_compatible(const operators::OperatorStack& stack) {
  if (stack.has_recombination()) {
    throw std::invalid_argument(
        "grid IPM has no recombination step; use the particle representation");
  }
}

GridTrajectory iterate_ipm(const MarginalDensityGrid& initial, const operators::OperatorStack& stack,
                           const Objective& obj, std::size_t steps) {
  check_grid_compatible(stack);
  GridTrajectory traj;
  traj.states.reserve(steps + 1);
  traj.states.push_back(initial);
  const auto& ops = stack.ops();
  for (std::size_t k = 0; k < steps; ++k) {
    MarginalDensityGrid current = traj.states.back();
    double leak = 0.0;
    for (std::size_t p = 0; p < ops.size(); ++p) {
      GridStep step{current, 0.0};
      if (std::holds_alternative<operators::Selection>(ops[p])) {
        // Fuse selection with an immediately following mutation.
        const bool fused = p + 1 < ops.size() && std::holds_alternative<operators::Mutation>(ops[p + 1]);
        const MutationKernel kernel = fused ? std::get<operators::Mutation>(ops[p + 1]).kernel
                                            : MutationKernel::zero_noise();
        step = grid_selection_mutation_step(current, obj, kernel);
        if (fused) ++p;
      } else {
        step = grid_mutation_step(current, std::get<operators::Mutation>(ops[p]).kernel);
      }
      leak += step.leaked_mass;
      current = std::move(step.grid);
    }
    traj.states.push_back(current.with_generation(initial.generation() + k + 1));
    traj.leaked_mass.push_back(leak);
  }
  return traj;
}

std::vector<ParticleEnsemble> iterate_ipm(const ParticleEnsemble& initial,
                                          const operators::OperatorStack& stack,
                                          const Objective& obj, std::size_t steps,
                                          const RandomStream& rng, std::size_t floor,
                                          unsigned jobs) {
  std::vector<ParticleEnsemble> traj;
  traj.reserve(steps + 1);
  traj.push_back(initial);
  const auto& ops = stack.ops();
  for (std::size_t k = 0; k < steps; ++k) {
    const RandomStream step_stream = rng.derive(k);
    ParticleEnsemble current = traj.back();
    for (std::size_t p = 0; p < ops.size(); ++p) {
      const RandomStream s = derive_stream(step_stream, operators::role_of(ops[p])).derive(p);
      current = particle_ipm_step(current, ops[p], obj, s, floor, jobs);
    }
    current.particles = current.particles.with_generation(initial.generation() + k + 1);
    traj.push_back(std::move(current));
  }
  return traj;
}

ParticleEnsemble sample_from_grid(const MarginalDensityGrid& grid, std::size_t count,
                                  const RandomStream& rng) {
  if (count == 0) throw std::invalid_argument("sample_from_grid needs count >= 1");
  const auto cdf = grid.edge_cdf();
  const double total = cdf.back();
  const double delta = grid.delta();
  std::vector<double> out(count);
  for (std::size_t p = 0; p < count; ++p) {
    RandomStream s = rng.derive(p);
    const double u = s.uniform() * total;
    // bin b with cdf[b] <= u < cdf[b + 1]
    const auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), u);
    auto b = static_cast<std::size_t>(it - (cdf.begin() + 1));
    b = std::min(b, grid.bins() - 1);
    while (grid.values()[b] == 0.0 && b > 0) --b;  // never land in an empty bin
    out[p] = grid.lo() + (static_cast<double>(b) + s.uniform()) * delta;
  }
  return ParticleEnsemble{Population(1, std::move(out), grid.generation())};
}

HistogramGrid grid_from_samples(std::span<const double> samples, double lo, double hi,
                                std::size_t bins) {
  if (samples.size() < 100) {
    throw std::invalid_argument("grid_from_samples needs at least 100 samples");
  }
  check_box(lo, hi, bins);
  const double delta = (hi - lo) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  std::size_t clipped = 0;
  for (double x : samples) {
    if (!std::isfinite(x)) throw NumericalError("grid_from_samples: non-finite sample");
    std::size_t b;
    if (x < lo) {
      ++clipped;
      b = 0;
    } else if (x > hi) {
      ++clipped;
      b = bins - 1;
    } else {
      b = std::min(static_cast<std::size_t>((x - lo) / delta), bins - 1);
    }
    counts[b] += 1.0;
  }
  if (clipped == samples.size()) {
    throw NumericalError("grid_from_samples: every sample lies outside [lo, hi]");
  }
  return HistogramGrid{MarginalDensityGrid::normalized(lo, hi, std::move(counts)),
                       static_cast<double>(clipped) / static_cast<double>(samples.size())};
}

}  // namespace ipmlab::ipm
