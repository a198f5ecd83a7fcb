#include "ipmlab/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ipmlab/ipm.hpp"
#include "ipmlab/parallel.hpp"

namespace ipmlab::counterexample {

LlnCounterexampleSpec LlnCounterexampleSpec::with_defaults(double g_min, double g_max,
                                                           std::size_t N) {
  LlnCounterexampleSpec s;
  s.g_min = g_min;
  s.g_max = g_max;
  s.z_half_width = (g_max - g_min) / 8.0;
  s.y_half_width = (g_max - g_min) / 4.0;
  s.N = N;
  s.validate();
  return s;
}

void LlnCounterexampleSpec::validate() const {
  if (!(std::isfinite(g_min) && std::isfinite(g_max) && g_min > 0.0 && g_min < g_max)) {
    throw std::invalid_argument("lln counterexample needs 0 < g_min < g_max");
  }
  const double quarter = (g_max - g_min) / 4.0;
  if (!(z_half_width >= 0.0 && z_half_width <= quarter)) {
    throw std::invalid_argument("z bound must satisfy 0 <= |z| <= (g_max - g_min)/4");
  }
  if (!(y_half_width >= 0.0 && y_half_width <= quarter)) {
    throw std::invalid_argument("y must stay in [(g_max + 3 g_min)/4, (3 g_max + g_min)/4]");
  }
  if (N == 0) throw std::invalid_argument("lln counterexample needs N >= 1");
}

std::vector<LlnRecord> sample_lln_counterexample(const LlnCounterexampleSpec& spec,
                                                 std::size_t replicates, const RandomStream& rng,
                                                 unsigned jobs) {
  spec.validate();
  std::vector<LlnRecord> out(replicates);
  const double c = spec.center();
  parallel_for(replicates, jobs, [&](std::size_t r) {
    RandomStream s = rng.derive(r);
    const double y = s.uniform(c - spec.y_half_width, c + spec.y_half_width);
    double sum = 0.0;
    double lo = y + spec.z_half_width, hi = y - spec.z_half_width;
    for (std::size_t l = 0; l < spec.N; ++l) {
      const double yl = y + s.uniform(-spec.z_half_width, spec.z_half_width);
      sum += yl;
      lo = std::min(lo, yl);
      hi = std::max(hi, yl);
    }
    out[r] = {y, sum / static_cast<double>(spec.N), lo, hi};
  });
  return out;
}

DependenceStatistic dependence_statistic(std::span<const LlnRecord> records, double z) {
  if (records.size() < 1000) throw std::invalid_argument("dependence_statistic needs R >= 1000");
  std::vector<double> ys, means;
  ys.reserve(records.size());
  means.reserve(records.size());
  for (const auto& rec : records) {
    ys.push_back(rec.y);
    means.push_back(rec.mean_n);
  }
  DependenceStatistic out;
  out.replicates = records.size();
  out.correlation = diagnostics::pearson_correlation(ys, means);
  if (out.correlation) {
    const double r = *out.correlation;
    if (std::abs(r) >= 1.0) {
      out.ci_lo = out.ci_hi = r;
    } else {
      const double fz = std::atanh(r);
      const double hw = z / std::sqrt(static_cast<double>(records.size()) - 3.0);
      out.ci_lo = std::tanh(fz - hw);
      out.ci_hi = std::tanh(fz + hw);
    }
  }
  return out;
}

diagnostics::Estimate mean_of_means(std::span<const LlnRecord> records, double z) {
  std::vector<double> means;
  means.reserve(records.size());
  for (const auto& rec : records) means.push_back(rec.mean_n);
  return diagnostics::mean_estimate(means, z);
}

GaussianMixtureLaw ExchangeableMixtureSpec::law() const {
  return GaussianMixtureLaw{component_centers, component_weights, within_sd};
}

void ExchangeableMixtureSpec::validate() const {
  validate_law(law());
  if (N == 0) throw std::invalid_argument("mixture spec needs N >= 1");
}

Population sample_exchangeable_mixture(const ExchangeableMixtureSpec& spec,
                                       const RandomStream& rng) {
  spec.validate();
  return sample_initial_population(spec.law(), spec.N, 1, rng);
}

bool TransitionGapReport::gap_exceeds(double multiple) const noexcept {
  return std::any_of(points.begin(), points.end(), [&](const GapPoint& p) {
    return std::abs(p.gap) > multiple * p.ci_half_width;
  });
}

bool TransitionGapReport::within_ci() const noexcept {
  return std::all_of(points.begin(), points.end(),
                     [](const GapPoint& p) { return std::abs(p.gap) <= p.ci_half_width; });
}

TransitionGapReport transition_gap_demo(const ExchangeableMixtureSpec& spec, const Objective& obj,
                                        const MutationKernel& kernel, std::span<const double> xs,
                                        std::size_t replicates, const RandomStream& rng,
                                        const GapOptions& options) {
  spec.validate();
  if (obj.domain().dim() != 1) throw std::invalid_argument("transition_gap_demo needs d = 1");
  if (xs.empty()) throw std::invalid_argument("transition_gap_demo needs evaluation points");
  const Interval range = options.grid_range.value_or(obj.domain()[0]);
  const InitLaw law = spec.law();

  const double z = diagnostics::simultaneous_z(xs.size(), options.level);
  const auto mc = diagnostics::exact_next_marginal_mc(diagnostics::law_sampler(law), obj, kernel,
                                                      xs, spec.N, replicates, rng.derive(0), z,
                                                      options.jobs);
  const auto grid0 = ipm::MarginalDensityGrid::from_law(law, range.lo, range.hi,
                                                        options.grid_bins);
  const auto step = ipm::grid_selection_mutation_step(grid0, obj, kernel);

  TransitionGapReport rep;
  rep.z = z;
  rep.population_size = spec.N;
  rep.replicates = replicates;
  rep.grid_leaked_mass = step.leaked_mass;
  rep.points.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    GapPoint p;
    p.x = xs[i];
    p.exact_estimate = mc.estimate[i];
    p.ipm_prediction = step.grid.density_at(xs[i]);
    p.gap = p.exact_estimate - p.ipm_prediction;
    p.ci_half_width = mc.ci_half_width[i];
    if (p.ci_half_width > 0.0) {
      rep.max_gap_ratio = std::max(rep.max_gap_ratio, std::abs(p.gap) / p.ci_half_width);
    }
    rep.points.push_back(p);
  }
  rep.var_eta = diagnostics::sample_variance(mc.eta);
  if (mc.slot_covariance) rep.slot_covariance = *mc.slot_covariance;
  return rep;
}

std::vector<EtaVarianceRow> eta_variance_scan(const ExchangeableMixtureSpec& spec,
                                              const Objective& obj,
                                              std::span<const std::size_t> sizes,
                                              std::size_t replicates, const RandomStream& rng,
                                              unsigned jobs) {
  spec.validate();
  if (replicates < 30) throw std::invalid_argument("eta_variance_scan needs R >= 30");
  const InitLaw law = spec.law();
  std::vector<EtaVarianceRow> rows;
  rows.reserve(sizes.size());
  for (std::size_t n : sizes) {
    if (n < 2) throw std::invalid_argument("eta_variance_scan needs N >= 2");
    const RandomStream base = rng.derive(n);
    std::vector<double> eta(replicates), g0(replicates), g1(replicates);
    parallel_for(replicates, jobs, [&](std::size_t r) {
      const Population pop = sample_initial_population(law, n, 1, base.derive(r));
      const auto g = evaluate_fitness(pop, obj);
      eta[r] = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(n);
      g0[r] = g[0];
      g1[r] = g[1];
    });
    const auto cov = diagnostics::covariance_estimate(g0, g1);
    rows.push_back({n, replicates, diagnostics::sample_variance(eta), cov.value,
                    cov.ci_half_width});
  }
  return rows;
}

}  // namespace ipmlab::counterexample
