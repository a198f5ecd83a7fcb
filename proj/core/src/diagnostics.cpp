#include "ipmlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include "ipmlab/errors.hpp"
#include "ipmlab/parallel.hpp"

namespace ipmlab::diagnostics {

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::ks: return "ks";
    case Metric::tv_hist: return "tv_hist";
    case Metric::energy: return "energy";
    case Metric::fitness_cov: return "fitness_cov";
  }
  return "unknown";
}

Metric metric_from_name(std::string_view name) {
  for (Metric m : {Metric::ks, Metric::tv_hist, Metric::energy, Metric::fitness_cov}) {
    if (metric_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

namespace {

std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  return s;
}

// Grid CDF evaluated with a precomputed edge table.
struct GridCdf {
  const ipm::MarginalDensityGrid& grid;
  std::vector<double> edges = grid.edge_cdf();

  double operator()(double x) const noexcept {
    if (x <= grid.lo()) return 0.0;
    if (x >= grid.hi()) return edges.back();
    const std::size_t b = grid.bin_of(x);
    const double left = grid.lo() + static_cast<double>(b) * grid.delta();
    return edges[b] + grid.values()[b] * (x - left);
  }
};

std::vector<double> histogram_masses(std::span<const double> xs, double lo, double hi,
                                     std::size_t bins) {
  // bins + 2 cells: [0] below lo, [bins + 1] above hi.
  std::vector<double> h(bins + 2, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double x : xs) {
    std::size_t cell;
    if (x < lo) {
      cell = 0;
    } else if (x >= hi) {
      cell = x == hi ? bins : bins + 1;
    } else {
      cell = 1 + std::min(static_cast<std::size_t>((x - lo) / width), bins - 1);
    }
    h[cell] += 1.0;
  }
  for (auto& v : h) v /= static_cast<double>(xs.size());
  return h;
}

double half_l1(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * s);
}

std::vector<double> grid_bin_masses(const ipm::MarginalDensityGrid& grid, std::size_t bins) {
  const GridCdf cdf{grid};
  std::vector<double> p(bins + 2, 0.0);
  const double width = (grid.hi() - grid.lo()) / static_cast<double>(bins);
  double left = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double right = cdf(grid.lo() + static_cast<double>(b + 1) * width);
    p[b + 1] = std::max(0.0, right - left);
    left = right;
  }
  return p;
}

// sum_j |x - s_j| for sorted s with prefix sums.
double abs_sum(double x, const std::vector<double>& s, const std::vector<double>& prefix) {
  const auto c = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
  const double below = prefix[c];
  const double above = prefix.back() - below;
  return x * static_cast<double>(c) - below + above - x * static_cast<double>(s.size() - c);
}

double mean_abs_within(const std::vector<double>& s) {
  const auto n = static_cast<double>(s.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += s[i] * (2.0 * static_cast<double>(i) - n + 1.0);
  }
  return 2.0 * acc / (n * n);
}

}  // namespace

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic needs nonempty samples");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_statistic(std::span<const double> samples, const ipm::MarginalDensityGrid& grid) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic needs nonempty samples");
  const auto s = sorted_copy(samples);
  const GridCdf cdf{grid};
  const auto n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::min(d, 1.0);
}

double ks_null_quantile(std::size_t na, std::size_t nb, double c) {
  if (na == 0) throw std::invalid_argument("ks_null_quantile needs na >= 1");
  double v = 1.0 / static_cast<double>(na);
  if (nb > 0) v += 1.0 / static_cast<double>(nb);
  return c * std::sqrt(v);
}

double tv_histogram_distance(std::span<const double> a, std::span<const double> b, double lo,
                             double hi, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("tv_histogram_distance needs bins >= 2");
  if (!(lo < hi)) throw std::invalid_argument("tv_histogram_distance needs lo < hi");
  if (a.empty() || b.empty()) throw std::invalid_argument("tv_histogram_distance needs samples");
  return half_l1(histogram_masses(a, lo, hi, bins), histogram_masses(b, lo, hi, bins));
}

double tv_histogram_distance(std::span<const double> samples, const ipm::MarginalDensityGrid& grid,
                             std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("tv_histogram_distance needs bins >= 2");
  if (samples.empty()) throw std::invalid_argument("tv_histogram_distance needs samples");
  return half_l1(histogram_masses(samples, grid.lo(), grid.hi(), bins), grid_bin_masses(grid, bins));
}

double tv_noise_half_width(std::span<const double> bin_masses, std::size_t na, std::size_t nb,
                           double z) {
  double spread = 0.0;
  for (double p : bin_masses) spread += std::sqrt(std::max(0.0, p * (1.0 - p)));
  double v = na > 0 ? 1.0 / static_cast<double>(na) : 0.0;
  if (nb > 0) v += 1.0 / static_cast<double>(nb);
  return std::min(1.0, 0.5 * z * spread * std::sqrt(v));
}

double energy_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("energy_distance needs samples");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  std::vector<double> prefix(sb.size() + 1, 0.0);
  std::partial_sum(sb.begin(), sb.end(), prefix.begin() + 1);
  double cross = 0.0;
  for (double x : sa) cross += abs_sum(x, sb, prefix);
  cross /= static_cast<double>(sa.size()) * static_cast<double>(sb.size());
  return std::max(0.0, 2.0 * cross - mean_abs_within(sa) - mean_abs_within(sb));
}

double normal_two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  const double target = 0.5 + 0.5 * level;
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double simultaneous_z(std::size_t count, double level) {
  if (count == 0) throw std::invalid_argument("simultaneous_z needs count >= 1");
  return normal_two_sided_z(1.0 - (1.0 - level) / static_cast<double>(count));
}

Estimate mean_estimate(std::span<const double> xs, double z) {
  if (xs.empty()) throw std::invalid_argument("mean_estimate needs samples");
  Estimate e;
  e.replicates = xs.size();
  e.value = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    e.ci_half_width = z * std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
  }
  return e;
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(xs.size() - 1);
}

namespace {

// Mean of xs - xs[0]; exact zero for constant input.
double shifted_mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x - xs[0];
  return s / static_cast<double>(xs.size());
}

}  // namespace

Estimate covariance_estimate(std::span<const double> a, std::span<const double> b, double z) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("covariance_estimate needs two equal-length samples, R >= 2");
  }
  const auto r = static_cast<double>(a.size());
  const double ma = shifted_mean(a);
  const double mb = shifted_mean(b);
  std::vector<double> products(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) products[i] = (a[i] - a[0] - ma) * (b[i] - b[0] - mb);
  Estimate e;
  e.replicates = a.size();
  e.value = std::accumulate(products.begin(), products.end(), 0.0) / (r - 1.0);
  e.ci_half_width = z * std::sqrt(sample_variance(products) / r);
  return e;
}

std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson_correlation needs two equal-length samples, R >= 2");
  }
  const double ma = shifted_mean(a);
  const double mb = shifted_mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - a[0] - ma;
    const double db = b[i] - b[0] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double mean_fitness(const Population& pop, const Objective& obj) {
  const auto g = evaluate_fitness(pop, obj);
  return std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
}

Estimate pairwise_fitness_covariance(std::span<const Population> replicated_pops,
                                     const Objective& obj, std::size_t slot_a, std::size_t slot_b,
                                     double z) {
  if (replicated_pops.size() < 30) {
    throw std::invalid_argument("pairwise_fitness_covariance needs R >= 30 replicates");
  }
  std::vector<double> ga, gb;
  ga.reserve(replicated_pops.size());
  gb.reserve(replicated_pops.size());
  for (const auto& pop : replicated_pops) {
    if (pop.size() < 2) throw std::invalid_argument("pairwise_fitness_covariance needs n >= 2");
    if (slot_a >= pop.size() || slot_b >= pop.size()) {
      throw std::out_of_range("pairwise_fitness_covariance: slot out of range");
    }
    ga.push_back(obj(pop[slot_a]));
    gb.push_back(obj(pop[slot_b]));
  }
  return covariance_estimate(ga, gb, z);
}

std::vector<double> marginal_samples_of_slot(std::span<const Population> replicated_pops,
                                             std::size_t slot) {
  std::vector<double> out;
  out.reserve(replicated_pops.size());
  for (const auto& pop : replicated_pops) {
    if (slot >= pop.size()) {
      throw std::out_of_range("slot " + std::to_string(slot) + " out of range for population of " +
                              std::to_string(pop.size()));
    }
    out.push_back(pop[slot][0]);
  }
  return out;
}

Population slot_individuals(std::span<const Population> replicated_pops, std::size_t slot) {
  if (replicated_pops.empty()) throw std::invalid_argument("slot_individuals needs replicates");
  const std::size_t d = replicated_pops.front().dim();
  std::vector<double> coords;
  coords.reserve(replicated_pops.size() * d);
  for (const auto& pop : replicated_pops) {
    if (slot >= pop.size()) throw std::out_of_range("slot out of range");
    const auto row = pop[slot];
    coords.insert(coords.end(), row.begin(), row.end());
  }
  return Population(d, std::move(coords), replicated_pops.front().generation());
}

PopulationSampler law_sampler(const InitLaw& law, std::size_t dim) {
  validate_law(law);
  return [law, dim](std::size_t n, const RandomStream& rng) {
    return sample_initial_population(law, n, dim, rng);
  };
}

MarginalEstimate exact_next_marginal_mc(const PopulationSampler& sampler, const Objective& obj,
                                        const MutationKernel& kernel, std::span<const double> xs,
                                        std::size_t population_size, std::size_t replicates,
                                        const RandomStream& rng, double z, unsigned jobs) {
  if (replicates < 1000) throw std::invalid_argument("exact_next_marginal_mc needs R >= 1000");
  if (population_size == 0) throw std::invalid_argument("exact_next_marginal_mc needs N >= 1");
  if (kernel.is_zero_noise()) {
    throw std::invalid_argument("exact_next_marginal_mc needs a kernel with a density");
  }
  const std::size_t nx = xs.size();
  std::vector<double> contrib(replicates * nx);
  std::vector<double> eta(replicates);
  std::vector<double> g0(replicates), g1(replicates);

  parallel_for(replicates, jobs, [&](std::size_t r) {
    const Population pop = sampler(population_size, rng.derive(r));
    if (pop.dim() != 1) throw std::invalid_argument("exact_next_marginal_mc needs d = 1");
    const auto g = evaluate_fitness(pop, obj);
    const double eta_r = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    eta[r] = eta_r;
    g0[r] = g[0];
    g1[r] = g.size() > 1 ? g[1] : g[0];
    const double y = pop[0][0];
    for (std::size_t i = 0; i < nx; ++i) {
      contrib[r * nx + i] = g[0] * kernel.increment_density(xs[i] - y) / eta_r;
    }
  });

  MarginalEstimate out;
  out.xs.assign(xs.begin(), xs.end());
  out.population_size = population_size;
  out.replicates = replicates;
  out.estimate.resize(nx);
  out.standard_error.resize(nx);
  out.ci_half_width.resize(nx);
  std::vector<double> column(replicates);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t r = 0; r < replicates; ++r) column[r] = contrib[r * nx + i];
    const auto e = mean_estimate(column, 1.0);
    out.estimate[i] = e.value;
    out.standard_error[i] = e.ci_half_width;
    out.ci_half_width[i] = z * e.ci_half_width;
  }
  out.eta = std::move(eta);
  if (population_size >= 2) out.slot_covariance = covariance_estimate(g0, g1);
  return out;
}

ProjectionReport projection_joint_check(std::span<const Population> replicated_pops, std::size_t m) {
  if (replicated_pops.size() < 1000) {
    throw std::invalid_argument("projection_joint_check needs R >= 1000 replicates");
  }
  if (m == 0) throw std::invalid_argument("projection_joint_check needs m >= 1");
  ProjectionReport rep;
  rep.m = m;
  rep.replicates = replicated_pops.size();
  std::vector<std::vector<double>> slots(m);
  for (std::size_t i = 0; i < m; ++i) slots[i] = marginal_samples_of_slot(replicated_pops, i);

  std::vector<double> pooled;
  pooled.reserve(m * replicated_pops.size());
  for (const auto& s : slots) pooled.insert(pooled.end(), s.begin(), s.end());

  rep.ks.assign(m, std::vector<double>(m, 0.0));
  rep.correlation.assign(m, std::vector<double>(m, 1.0));
  rep.ks_vs_pooled.resize(m);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double corr_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    rep.ks_vs_pooled[i] = ks_statistic(slots[i], pooled);
    rep.max_ks_vs_pooled = std::max(rep.max_ks_vs_pooled, rep.ks_vs_pooled[i]);
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = ks_statistic(slots[i], slots[j]);
      rep.ks[i][j] = rep.ks[j][i] = d;
      rep.max_ks = std::max(rep.max_ks, d);
      const auto r = pearson_correlation(slots[i], slots[j]);
      rep.correlation[i][j] = rep.correlation[j][i] = r.value_or(nan);
      if (r) {
        rep.max_abs_correlation = std::max(rep.max_abs_correlation, std::abs(*r));
        corr_sum += *r;
        ++rep.pairs;
      }
    }
  }
  rep.mean_pairwise_correlation = rep.pairs > 0 ? corr_sum / static_cast<double>(rep.pairs) : 0.0;
  return rep;
}

void ConvergenceCurve::add(ConvergenceRow row) {
  const auto key = [](const ConvergenceRow& r) { return std::tie(r.k, r.n, r.metric); };
  const auto it = std::lower_bound(rows_.begin(), rows_.end(), row,
                                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
  if (it != rows_.end() && key(*it) == key(row)) {
    throw std::invalid_argument("duplicate convergence row for (k=" + std::to_string(row.k) +
                                ", n=" + std::to_string(row.n) + ", metric=" + row.metric + ")");
  }
  rows_.insert(it, std::move(row));
}

const ConvergenceRow* ConvergenceCurve::find(std::size_t k, std::size_t n,
                                             std::string_view metric) const {
  for (const auto& r : rows_) {
    if (r.k == k && r.n == n && r.metric == metric) return &r;
  }
  return nullptr;
}

std::vector<std::vector<Population>> run_replicates(const operators::OperatorStack& stack,
                                                    const Objective& obj, const InitLaw& init,
                                                    std::size_t dim, std::size_t n,
                                                    std::size_t generations,
                                                    std::size_t replicates,
                                                    const RandomStream& root, unsigned jobs) {
  std::vector<std::vector<Population>> out(replicates);
  parallel_for(replicates, jobs, [&](std::size_t r) {
    auto& traj = out[r];
    traj.reserve(generations + 1);
    traj.push_back(sample_initial_population(init, n, dim, seed_plan(root, r, 0, StreamRole::init)));
    for (std::size_t k = 0; k < generations; ++k) {
      traj.push_back(operators::apply_stack(traj.back(), stack, obj, root.derive(r).derive(k)));
    }
  });
  return out;
}

ConvergenceCurve convergence_sweep(const SweepSpec& spec, const RandomStream& root) {
  if (spec.sizes.empty()) throw std::invalid_argument("convergence_sweep needs population sizes");
  if (spec.replicates < 30) throw std::invalid_argument("convergence_sweep needs R >= 30");
  const std::size_t states = std::visit([](const auto& v) { return v.size(); }, spec.reference);
  if (states < spec.generations + 1) {
    throw std::invalid_argument("IPM reference covers fewer generations than requested");
  }
  if (std::holds_alternative<std::vector<ipm::MarginalDensityGrid>>(spec.reference) &&
      spec.dimension != 1) {
    throw std::invalid_argument("grid IPM reference needs dimension 1");
  }
  if (const auto* parts = std::get_if<std::vector<ipm::ParticleEnsemble>>(&spec.reference)) {
    for (const auto& e : *parts) {
      if (e.particles.dim() != spec.dimension) {
        throw std::invalid_argument("particle IPM reference dimension differs from the EA");
      }
    }
  }

  ConvergenceCurve curve;
  const std::size_t R = spec.replicates;
  for (std::size_t n : spec.sizes) {
    const auto runs = run_replicates(spec.stack, spec.objective, spec.init, spec.dimension, n,
                                     spec.generations, R, root.derive(n), spec.jobs);
    for (std::size_t k = 0; k <= spec.generations; ++k) {
      std::vector<Population> gen;
      gen.reserve(R);
      for (const auto& traj : runs) gen.push_back(traj[k]);
      const auto slot0 = marginal_samples_of_slot(gen, 0);

      double ks = 0.0, ks_hw = 0.0, tv = 0.0, tv_hw = 0.0;
      if (const auto* grids = std::get_if<std::vector<ipm::MarginalDensityGrid>>(&spec.reference)) {
        const auto& g = (*grids)[k];
        ks = ks_statistic(slot0, g);
        ks_hw = ks_null_quantile(R, 0);
        tv = tv_histogram_distance(slot0, g, spec.tv_bins);
        tv_hw = tv_noise_half_width(grid_bin_masses(g, spec.tv_bins), R, 0);
      } else {
        const auto& ens = std::get<std::vector<ipm::ParticleEnsemble>>(spec.reference)[k];
        std::vector<double> ref(ens.size());
        for (std::size_t p = 0; p < ens.size(); ++p) ref[p] = ens.particles[p][0];
        ks = ks_statistic(slot0, ref);
        ks_hw = ks_null_quantile(R, ref.size());
        const auto [mn, mx] = std::minmax_element(ref.begin(), ref.end());
        const double lo = *mn, hi = *mx > *mn ? *mx : *mn + 1.0;
        tv = tv_histogram_distance(slot0, ref, lo, hi, spec.tv_bins);
        tv_hw = tv_noise_half_width(histogram_masses(ref, lo, hi, spec.tv_bins), R, ref.size());
      }
      curve.add({k, n, R, std::string(metric_name(Metric::ks)), ks, ks_hw, spec.seed});
      curve.add({k, n, R, std::string(metric_name(Metric::tv_hist)), tv, tv_hw, spec.seed});
      if (n >= 2) {
        const auto cov = pairwise_fitness_covariance(gen, spec.objective);
        curve.add({k, n, R, std::string(metric_name(Metric::fitness_cov)), cov.value,
                   cov.ci_half_width, spec.seed});
      }
    }
  }
  return curve;
}

}  // namespace ipmlab::diagnostics
