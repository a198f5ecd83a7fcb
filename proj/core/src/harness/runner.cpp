#include "ipmlab/harness/runner.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>

#include "ipmlab/counterexample.hpp"
#include "ipmlab/errors.hpp"
#include "ipmlab/harness/output.hpp"
#include "ipmlab/ipm.hpp"
#include "ipmlab/parallel.hpp"
#include "json.hpp"

#ifndef IPMLAB_VERSION
#define IPMLAB_VERSION "0.0.0"
#endif

namespace ipmlab::harness {
namespace {

using nlohmann::json;

// Top-level branches of the master stream.
constexpr std::uint64_t kEaBranch = 0;
constexpr std::uint64_t kLlnBranch = 5;
constexpr std::uint64_t kGapBranch = 6;
constexpr std::uint64_t kEtaBranch = 7;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RandomStream ipm_stream(const ExperimentConfig& c) {
  return derive_stream(RandomStream(c.seed), StreamRole::ipm);
}

struct Context {
  const ExperimentConfig& config;
  unsigned jobs;
  std::filesystem::path dir;
  std::vector<EmittedFile> files;

  void record(const std::string& name, std::size_t rows) { files.push_back({name, rows}); }
};

void write_csv(Context& ctx, const std::string& name, const std::vector<CsvRecord>& records,
               const CsvSchema& schema) {
  ctx.record(name, emit_results(records, schema, ctx.dir / name));
}

void write_jsonl(Context& ctx, const std::string& name, const std::vector<json>& items) {
  std::vector<std::string> lines;
  lines.reserve(items.size());
  for (const auto& j : items) lines.push_back(j.dump());
  ctx.record(name, emit_lines(lines, ctx.dir / name));
}

std::vector<std::vector<Population>> replicate_runs(const ExperimentConfig& c, std::size_t n,
                                                     unsigned jobs) {
  const RandomStream ea = RandomStream(c.seed).derive(kEaBranch);
  return diagnostics::run_replicates(build_stack(c), build_objective(c), c.init, c.dimension, n,
                                     c.generations, c.replicates, ea.derive(n), jobs);
}

void run_simulate(Context& ctx) {
  const auto& c = ctx.config;
  const Objective obj = build_objective(c);
  std::vector<CsvRecord> rows;
  std::vector<json> summary;
  for (std::size_t n : c.sizes) {
    const auto runs = replicate_runs(c, n, ctx.jobs);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      for (std::size_t k = 0; k < runs[r].size(); ++k) {
        const Population& pop = runs[r][k];
        const auto g = evaluate_fitness(pop, obj);
        for (std::size_t s = 0; s < pop.size(); ++s) {
          CsvRecord rec{static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r),
                        static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(s), g[s]};
          for (double x : pop[s]) rec.emplace_back(x);
          rows.push_back(std::move(rec));
        }
      }
    }
    for (std::size_t k = 0; k <= c.generations; ++k) {
      std::vector<double> eta, slot0;
      for (const auto& traj : runs) {
        eta.push_back(diagnostics::mean_fitness(traj[k], obj));
        slot0.push_back(traj[k][0][0]);
      }
      const auto e = diagnostics::mean_estimate(eta);
      const auto s0 = diagnostics::mean_estimate(slot0);
      summary.push_back({{"n", n},
                         {"k", k},
                         {"replicates", runs.size()},
                         {"mean_eta", e.value},
                         {"mean_eta_ci_half_width", e.ci_half_width},
                         {"slot0_mean", s0.value},
                         {"slot0_variance", diagnostics::sample_variance(slot0)}});
    }
  }
  write_csv(ctx, "population.csv", rows, schemas::population(c.dimension));
  write_jsonl(ctx, "simulate_summary.jsonl", summary);
}

void run_ipm(Context& ctx) {
  const auto& c = ctx.config;
  const auto reference = build_reference(c, ctx.jobs);
  std::vector<json> summary;
  if (const auto* grids = std::get_if<std::vector<ipm::MarginalDensityGrid>>(&reference)) {
    std::vector<CsvRecord> rows;
    const auto traj = ipm::iterate_ipm(grids->front(), build_stack(c), build_objective(c),
                                       c.generations);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const auto& g = traj.states[k];
      for (std::size_t b = 0; b < g.bins(); ++b) {
        rows.push_back({static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(b),
                        g.midpoint(b), g.values()[b]});
      }
      summary.push_back({{"k", k},
                         {"method", "grid"},
                         {"mean", g.mean()},
                         {"variance", g.variance()},
                         {"mass", g.mass()},
                         {"leaked_mass", k == 0 ? 0.0 : traj.leaked_mass[k - 1]}});
    }
    write_csv(ctx, "ipm_grid.csv", rows, schemas::ipm_grid());
  } else {
    const auto& parts = std::get<std::vector<ipm::ParticleEnsemble>>(reference);
    CsvSchema schema{"ipm_particles", {"generation", "particle"}};
    for (std::size_t i = 0; i < c.dimension; ++i) schema.columns.push_back("x" + std::to_string(i));
    std::vector<CsvRecord> rows;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto& pop = parts[k].particles;
      std::vector<double> mean(c.dimension, 0.0), sq(c.dimension, 0.0);
      for (std::size_t p = 0; p < pop.size(); ++p) {
        CsvRecord rec{static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(p)};
        for (std::size_t i = 0; i < c.dimension; ++i) {
          rec.emplace_back(pop[p][i]);
          mean[i] += pop[p][i];
          sq[i] += pop[p][i] * pop[p][i];
        }
        rows.push_back(std::move(rec));
      }
      const auto P = static_cast<double>(pop.size());
      std::vector<double> var(c.dimension);
      for (std::size_t i = 0; i < c.dimension; ++i) {
        mean[i] /= P;
        var[i] = sq[i] / P - mean[i] * mean[i];
      }
      summary.push_back({{"k", k},
                         {"method", "particle"},
                         {"particles", pop.size()},
                         {"mean", mean},
                         {"variance", var}});
    }
    write_csv(ctx, "ipm_particles.csv", rows, schema);
  }
  write_jsonl(ctx, "ipm_summary.jsonl", summary);
}

void run_compare(Context& ctx) {
  const auto& c = ctx.config;
  if (c.compare.k > c.generations) {
    throw ConfigError("compare.k", "must not exceed generations");
  }
  const std::size_t n = c.compare.n == 0 ? c.sizes.back() : c.compare.n;
  const std::size_t k = c.compare.k;
  const auto reference = build_reference(c, ctx.jobs);
  const auto runs = replicate_runs(c, n, ctx.jobs);
  std::vector<Population> gen;
  for (const auto& traj : runs) gen.push_back(traj[k]);
  const auto slot0 = diagnostics::marginal_samples_of_slot(gen, 0);

  std::vector<double> ref;
  double ks = 0.0, ks_hw = 0.0, tv = 0.0;
  if (const auto* grids = std::get_if<std::vector<ipm::MarginalDensityGrid>>(&reference)) {
    const auto& g = (*grids)[k];
    ks = diagnostics::ks_statistic(slot0, g);
    ks_hw = diagnostics::ks_null_quantile(slot0.size(), 0);
    tv = diagnostics::tv_histogram_distance(slot0, g, c.tv_bins);
    const auto draws = ipm::sample_from_grid(g, c.particles, ipm_stream(c).derive(2));
    for (std::size_t p = 0; p < draws.size(); ++p) ref.push_back(draws.particles[p][0]);
  } else {
    const auto& ens = std::get<std::vector<ipm::ParticleEnsemble>>(reference)[k];
    for (std::size_t p = 0; p < ens.size(); ++p) ref.push_back(ens.particles[p][0]);
    ks = diagnostics::ks_statistic(slot0, ref);
    ks_hw = diagnostics::ks_null_quantile(slot0.size(), ref.size());
    const auto [mn, mx] = std::minmax_element(ref.begin(), ref.end());
    tv = diagnostics::tv_histogram_distance(slot0, ref, *mn, *mx > *mn ? *mx : *mn + 1.0,
                                            c.tv_bins);
  }
  diagnostics::ConvergenceCurve curve;
  const std::size_t R = slot0.size();
  curve.add({k, n, R, "ks", ks, ks_hw, c.seed});
  curve.add({k, n, R, "tv_hist", tv, 0.0, c.seed});
  curve.add({k, n, R, "energy", diagnostics::energy_distance(slot0, ref), 0.0, c.seed});
  if (n >= 2 && R >= 30) {
    const auto cov = diagnostics::pairwise_fitness_covariance(gen, build_objective(c));
    curve.add({k, n, R, "fitness_cov", cov.value, cov.ci_half_width, c.seed});
  }
  write_csv(ctx, "compare.csv", convergence_records(curve), schemas::convergence());
}

void run_sweep(Context& ctx) {
  const auto& c = ctx.config;
  diagnostics::SweepSpec spec{build_stack(c),  build_objective(c), c.init,
                              c.dimension,     c.generations,      c.sizes,
                              c.replicates,    build_reference(c, ctx.jobs),
                              c.tv_bins,       c.seed,             ctx.jobs};
  const auto curve =
      diagnostics::convergence_sweep(spec, RandomStream(c.seed).derive(kEaBranch));
  write_csv(ctx, "convergence.csv", convergence_records(curve), schemas::convergence());
}

void run_counterexample(Context& ctx) {
  const auto& c = ctx.config;
  const RandomStream master(c.seed);

  auto lln = counterexample::LlnCounterexampleSpec::with_defaults(c.lln.g_min, c.lln.g_max,
                                                                  c.lln.N);
  if (c.lln.z_half_width) lln.z_half_width = *c.lln.z_half_width;
  if (c.lln.y_half_width) lln.y_half_width = *c.lln.y_half_width;
  const auto records =
      counterexample::sample_lln_counterexample(lln, c.lln.replicates, master.derive(kLlnBranch),
                                                ctx.jobs);
  const auto dep = counterexample::dependence_statistic(records);
  const auto mom = counterexample::mean_of_means(records);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  write_csv(ctx, "lln_dependence.csv",
            {{static_cast<std::uint64_t>(lln.N), static_cast<std::uint64_t>(records.size()),
              lln.g_min, lln.g_max, dep.correlation.value_or(nan),
              dep.correlation ? dep.ci_lo : nan, dep.correlation ? dep.ci_hi : nan, mom.value,
              mom.ci_half_width, lln.center()}},
            schemas::lln_dependence());

  if (c.dimension != 1) throw ConfigError("dimension", "the transition gap demo needs d = 1");
  const counterexample::ExchangeableMixtureSpec mix{c.gap.centers, c.gap.weights, c.gap.within_sd,
                                                    c.gap.N};
  const Objective obj = build_objective(c);
  const MutationKernel kernel = build_kernel(c.kernel);
  std::vector<double> xs(c.gap.points);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = xs.size() == 1 ? c.gap.x_lo
                           : c.gap.x_lo + (c.gap.x_hi - c.gap.x_lo) * static_cast<double>(i) /
                                              static_cast<double>(xs.size() - 1);
  }
  counterexample::GapOptions opts;
  opts.grid_bins = c.grid_bins;
  opts.jobs = ctx.jobs;
  const auto gap = counterexample::transition_gap_demo(mix, obj, kernel, xs, c.gap.replicates,
                                                       master.derive(kGapBranch), opts);
  std::vector<CsvRecord> gap_rows;
  for (const auto& p : gap.points) {
    gap_rows.push_back({p.x, p.exact_estimate, p.ipm_prediction, p.gap, p.ci_half_width});
  }
  write_csv(ctx, "transition_gap.csv", gap_rows, schemas::transition_gap());

  const auto eta = counterexample::eta_variance_scan(mix, obj, c.gap.eta_sizes,
                                                     c.gap.eta_replicates,
                                                     master.derive(kEtaBranch), ctx.jobs);
  std::vector<CsvRecord> eta_rows;
  for (const auto& r : eta) {
    eta_rows.push_back({static_cast<std::uint64_t>(r.N), static_cast<std::uint64_t>(r.replicates),
                        r.var_eta, r.cov_estimate, r.cov_ci_half_width});
  }
  write_csv(ctx, "eta_variance.csv", eta_rows, schemas::eta_variance());
}

void dispatch(Context& ctx) {
  switch (ctx.config.kind) {
    case ExperimentKind::simulate: return run_simulate(ctx);
    case ExperimentKind::ipm: return run_ipm(ctx);
    case ExperimentKind::compare: return run_compare(ctx);
    case ExperimentKind::counterexample: return run_counterexample(ctx);
    case ExperimentKind::sweep: return run_sweep(ctx);
  }
}

}  // namespace

std::string_view tool_version() noexcept { return IPMLAB_VERSION; }

ExperimentConfig with_overrides(ExperimentConfig config, const RunOptions& options) {
  if (options.seed_override) config.seed = *options.seed_override;
  if (options.output_dir) config.output_dir = options.output_dir->string();
  return config;
}

diagnostics::IpmReference build_reference(const ExperimentConfig& c, unsigned jobs) {
  const auto stack = build_stack(c);
  const Objective obj = build_objective(c);
  if (c.ipm_method == "grid") {
    if (c.dimension != 1) throw ConfigError("ipm_method", "the grid method needs dimension 1");
    try {
      ipm::check_grid_compatible(stack);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("ipm_method", e.what());
    }
    const auto grid0 = ipm::MarginalDensityGrid::from_law(c.init, c.objective.domain.lo,
                                                          c.objective.domain.hi, c.grid_bins);
    return ipm::iterate_ipm(grid0, stack, obj, c.generations).states;
  }
  const RandomStream s = ipm_stream(c);
  ipm::ParticleEnsemble ens0{sample_initial_population(c.init, c.particles, c.dimension,
                                                       s.derive(0))};
  return ipm::iterate_ipm(ens0, stack, obj, c.generations, s.derive(1),
                          ipm::kDefaultParticleFloor, jobs);
}

RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const ExperimentConfig c = with_overrides(config, options);
  RunManifest manifest;
  manifest.config_hash = config_hash_hex(c);
  manifest.tool_version = std::string(tool_version());
  manifest.output_dir = c.output_dir;
  manifest.started_at = utc_now();

  std::error_code ec;
  std::filesystem::create_directories(manifest.output_dir, ec);
  if (ec) {
    throw ConfigError("output_dir", "cannot create '" + c.output_dir + "': " + ec.message());
  }

  Context ctx{c, options.jobs, manifest.output_dir, {}};
  const std::string kind(kind_name(c.kind));
  try {
    dispatch(ctx);
  } catch (const ConfigError&) {
    throw;
  } catch (const NumericalError& e) {
    throw NumericalError(kind + " experiment: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", kind + " experiment: " + e.what());
  }
  manifest.files = std::move(ctx.files);
  manifest.finished_at = utc_now();

  json files = json::array();
  for (const auto& f : manifest.files) files.push_back({{"path", f.path}, {"rows", f.rows}});
  const json doc = {{"config_hash", manifest.config_hash},
                    {"tool_version", manifest.tool_version},
                    {"kind", kind},
                    {"seed", c.seed},
                    {"jobs", resolve_jobs(options.jobs)},
                    {"started_at", manifest.started_at},
                    {"finished_at", manifest.finished_at},
                    {"files", files},
                    {"config", json::parse(canonical_json(c))}};
  std::ofstream out(manifest.output_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in '" + c.output_dir + "'");
  out << doc.dump(2) << '\n';
  return manifest;
}

}  // namespace ipmlab::harness
