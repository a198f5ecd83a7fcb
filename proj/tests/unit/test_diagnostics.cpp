#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ipmlab/diagnostics.hpp"
#include "ipmlab/init_law.hpp"
#include "ipmlab/ipm.hpp"
#include "ipmlab/kernel.hpp"
#include "ipmlab/operators.hpp"

using namespace ipmlab;
using namespace ipmlab::diagnostics;
using operators::Mutation;
using operators::OperatorStack;
using operators::Selection;

namespace {

// sup |F_a - F_b| evaluated at every pooled point by direct counting.
double ks_brute(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  double d = 0.0;
  for (double t : pooled) {
    const double fa = std::count_if(a.begin(), a.end(), [&](double x) { return x <= t; }) / double(a.size());
    const double fb = std::count_if(b.begin(), b.end(), [&](double x) { return x <= t; }) / double(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

double energy_brute(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean_abs = [](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (double x : u) for (double y : v) s += std::abs(x - y);
    return s / (double(u.size()) * double(v.size()));
  };
  return 2.0 * mean_abs(a, b) - mean_abs(a, a) - mean_abs(b, b);
}

std::vector<double> draws(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  RandomStream rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = mean + sd * rng.normal();
  return out;
}

std::vector<Population> iid_pops(std::size_t R, std::size_t n, std::uint64_t seed) {
  std::vector<Population> out;
  for (std::uint64_t r = 0; r < R; ++r) {
    out.push_back(sample_initial_population(GaussianLaw{}, n, 1, RandomStream(seed, {r})));
  }
  return out;
}

std::vector<Population> identical_pops(std::size_t R, std::size_t n, std::uint64_t seed) {
  std::vector<Population> out;
  RandomStream rng(seed);
  for (std::size_t r = 0; r < R; ++r) {
    out.push_back(Population::from_values(std::vector<double>(n, rng.normal())));
  }
  return out;
}

double phi(double x, double sd) { return std::exp(-0.5 * x * x / (sd * sd)) / (sd * std::sqrt(2 * M_PI)); }

// Quadrature of int phi((y - c)/s) g(y) h(x - y) dy and int phi g.
struct ComponentIntegrals {
  double a = 0.0;
  double b = 0.0;
};

ComponentIntegrals component(double c, double s, const Objective& g, double sigma, double x) {
  ComponentIntegrals out;
  const double dy = 1e-3;
  for (double y = c - 10 * s; y <= c + 10 * s; y += dy) {
    const double w = phi(y - c, s) * g(std::span<const double>(&y, 1)) * dy;
    out.a += w * phi(x - y, sigma);
    out.b += w;
  }
  return out;
}

}  // namespace

TEST_SUITE("distances") {
  TEST_CASE("ks examples") {
    const std::vector<double> a{1, 2, 3, 4}, b{3, 4, 5, 6};
    CHECK(ks_statistic(a, a) == 0.0);
    CHECK(ks_statistic(std::vector<double>(5, 0.0), std::vector<double>(7, 1.0)) == 1.0);
    CHECK(ks_statistic(a, b) == 0.5);
    CHECK_THROWS(ks_statistic(std::vector<double>{}, b));
  }

  TEST_CASE("ks matches direct counting, with ties, and is symmetric") {
    RandomStream rng(1);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t na = 1 + rng.index(30), nb = 1 + rng.index(30);
      std::vector<double> a(na), b(nb);
      for (auto& x : a) x = double(rng.index(8));
      for (auto& x : b) x = double(rng.index(8)) + (trial % 2 ? 0.5 : 0.0);
      const double d = ks_statistic(a, b);
      REQUIRE(d == doctest::Approx(ks_brute(a, b)).epsilon(1e-12));
      REQUIRE(d == ks_statistic(b, a));
      REQUIRE(d >= 0.0);
      REQUIRE(d <= 1.0);
    }
  }

  TEST_CASE("ks is zero iff empirical CDFs coincide") {
    const std::vector<double> a{1, 1, 2, 3}, b{3, 2, 1, 1, 3, 3, 1, 1};
    CHECK(ks_statistic(a, std::vector<double>{1, 1, 2, 3, 1, 1, 2, 3}) == 0.0);
    CHECK(ks_statistic(a, b) == 0.125);
  }

  TEST_CASE("one-sample ks against a grid") {
    const auto grid = ipm::MarginalDensityGrid::from_law(GaussianLaw{}, -8, 8, 4096);
    CHECK(ks_statistic(draws(20000, 2), grid) < ks_null_quantile(20000, 0, kKolmogorov99));
    CHECK(ks_statistic(draws(20000, 3, 0.5), grid) > 0.15);
    CHECK(ks_statistic(std::vector<double>{-100.0}, grid) == doctest::Approx(1.0));
  }

  TEST_CASE("same-law null calibration") {
    // Two samples of size R from one law exceed 1.63 sqrt(2/R) about 1% of the time.
    const std::size_t R = 400;
    const double threshold = ks_null_quantile(R, R, kKolmogorov99);
    CHECK(threshold == doctest::Approx(1.628 * std::sqrt(2.0 / R)));
    int exceed = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      exceed += ks_statistic(draws(R, 2 * t + 100), draws(R, 2 * t + 101)) > threshold;
    }
    CHECK(exceed <= 25);
  }

  TEST_CASE("tv histogram examples") {
    const auto a = draws(1000, 4);
    CHECK(tv_histogram_distance(a, a, -4, 4, 32) == 0.0);
    CHECK(tv_histogram_distance(std::vector<double>(10, 0.0), std::vector<double>(10, 1.0), -2, 2,
                                8) == 1.0);
    CHECK(tv_histogram_distance(std::vector<double>(10, -9.0), std::vector<double>(10, 9.0), -2, 2,
                                8) == 1.0);
    CHECK(tv_histogram_distance(draws(100000, 5), draws(100000, 6), -4, 4, 64) < 0.02);
    CHECK_THROWS(tv_histogram_distance(a, a, -4, 4, 1));
  }

  TEST_CASE("tv histogram is symmetric, in [0, 1], and equals half the L1 bin error") {
    RandomStream rng(7);
    for (int t = 0; t < 50; ++t) {
      const auto a = draws(200, 1000 + t, rng.uniform(-1, 1));
      const auto b = draws(300, 2000 + t, rng.uniform(-1, 1), 1.5);
      const double d = tv_histogram_distance(a, b, -3, 3, 12);
      REQUIRE(d == tv_histogram_distance(b, a, -3, 3, 12));
      REQUIRE(d >= 0.0);
      REQUIRE(d <= 1.0);
      std::vector<double> pa(14, 0.0), pb(14, 0.0);
      auto cell = [](double x) {
        if (x < -3) return std::size_t{0};
        if (x >= 3) return std::size_t{13};
        return 1 + std::min<std::size_t>(static_cast<std::size_t>((x + 3) / 0.5), 11);
      };
      for (double x : a) pa[cell(x)] += 1.0 / a.size();
      for (double x : b) pb[cell(x)] += 1.0 / b.size();
      double l1 = 0.0;
      for (std::size_t i = 0; i < 14; ++i) l1 += std::abs(pa[i] - pb[i]);
      REQUIRE(d == doctest::Approx(0.5 * l1).epsilon(1e-12));
    }
  }

  TEST_CASE("tv against a grid") {
    const auto grid = ipm::MarginalDensityGrid::from_law(GaussianLaw{}, -8, 8, 2048);
    CHECK(tv_histogram_distance(draws(100000, 8), grid, 64) < 0.02);
    CHECK(tv_histogram_distance(draws(10000, 9, 4.0), grid, 64) > 0.8);
  }

  TEST_CASE("energy distance matches the double sum") {
    for (std::uint64_t t = 0; t < 20; ++t) {
      const auto a = draws(37, 3000 + t), b = draws(23, 4000 + t, 0.3 * double(t % 4));
      REQUIRE(energy_distance(a, b) == doctest::Approx(energy_brute(a, b)).epsilon(1e-10));
    }
    const auto a = draws(50, 1);
    CHECK(energy_distance(a, a) == doctest::Approx(0.0));
  }
}

TEST_SUITE("estimators") {
  TEST_CASE("normal quantiles") {
    CHECK(normal_two_sided_z(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(normal_two_sided_z(0.99) == doctest::Approx(2.575829).epsilon(1e-6));
    CHECK(simultaneous_z(25, 0.95) == doctest::Approx(3.090232).epsilon(1e-6));
  }

  TEST_CASE("mean_fitness") {
    CHECK(mean_fitness(Population::from_values({1, 2, 3}), constant_objective(2.5, Box::cube(1, -5, 5))) == 2.5);
    const Objective table(
        "table", [](std::span<const double> x) { return x[0] < 0.5 ? 1.0 : 3.0; }, 1.0, 3.0,
        Box::cube(1, -1, 2));
    CHECK(mean_fitness(Population::from_values({0.0, 1.0}), table) == 2.0);
    const auto g = test::bump_objective();
    for (std::uint64_t r = 0; r < 100; ++r) {
      const double eta = mean_fitness(sample_initial_population(GaussianLaw{0, 2}, 10, 1, RandomStream(r)), g);
      REQUIRE(eta >= g.g_min());
      REQUIRE(eta <= g.g_max());
    }
  }

  TEST_CASE("pairwise fitness covariance") {
    const auto g = test::bump_objective();
    const auto iid = pairwise_fitness_covariance(iid_pops(10000, 2, 1), g);
    CHECK(std::abs(iid.value) <= iid.ci_half_width);

    const auto same = identical_pops(10000, 3, 2);
    std::vector<double> gx;
    for (const auto& p : same) gx.push_back(g(p[0]));
    const double var_g = test::variance_of(gx);
    const auto coupled = pairwise_fitness_covariance(same, g);
    CHECK(var_g > 0.01);
    CHECK(coupled.value == doctest::Approx(var_g).epsilon(1e-9));

    const std::vector<Population> fixed(50, Population::from_values({0.5, 0.5}));
    const auto zero = pairwise_fitness_covariance(fixed, g);
    CHECK(zero.value == 0.0);
    CHECK(zero.ci_half_width == 0.0);

    CHECK_THROWS(pairwise_fitness_covariance(iid_pops(100, 1, 3), g));
    CHECK_THROWS(pairwise_fitness_covariance(iid_pops(29, 2, 3), g));
  }
}

TEST_SUITE("slots") {
  TEST_CASE("marginal_samples_of_slot") {
    const auto pops = iid_pops(100, 4, 5);
    CHECK(marginal_samples_of_slot(pops, 3).size() == 100);
    CHECK_THROWS_AS(marginal_samples_of_slot(pops, 4), std::out_of_range);
    const std::vector<Population> fixed(10, Population::from_values({0.25, 0.75}));
    for (double x : marginal_samples_of_slot(fixed, 1)) CHECK(x == 0.75);
  }

  TEST_CASE("exchangeable slots have equal marginals") {
    std::vector<Population> pops;
    for (std::uint64_t r = 0; r < 10000; ++r) {
      pops.push_back(sample_initial_population(GaussianMixtureLaw{{-2, 2}, {0.5, 0.5}, 0.5}, 5, 1,
                                               RandomStream(6, {r})));
    }
    CHECK(ks_statistic(marginal_samples_of_slot(pops, 0), marginal_samples_of_slot(pops, 1)) < 0.05);
  }

  TEST_CASE("projection joint check") {
    const auto iid = projection_joint_check(iid_pops(10000, 4, 7), 4);
    CHECK(iid.pairs == 6);
    CHECK(iid.max_abs_correlation < 0.05);
    CHECK(iid.max_ks < 0.05);

    const auto same = projection_joint_check(identical_pops(2000, 3, 8), 3);
    CHECK(same.mean_pairwise_correlation == doctest::Approx(1.0));
    CHECK(same.max_ks == 0.0);

    const auto single = projection_joint_check(iid_pops(1000, 4, 9), 1);
    CHECK(single.pairs == 0);
    CHECK(single.ks_vs_pooled[0] == 0.0);
    CHECK_THROWS(projection_joint_check(iid_pops(999, 2, 9), 2));
  }
}

TEST_SUITE("exact marginal") {
  const std::vector<double> xs = test::linspace(-4.0, 4.0, 25);

  TEST_CASE("constant fitness gives the mutated initial marginal") {
    const double sigma = 0.5;
    const auto est = exact_next_marginal_mc(law_sampler(GaussianLaw{}),
                                            constant_objective(1.0, Box::cube(1, -10, 10)),
                                            MutationKernel::gaussian(sigma), xs, 8, 10000,
                                            RandomStream(1), simultaneous_z(xs.size(), 0.99));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CHECK(std::abs(est.estimate[i] - phi(xs[i], std::sqrt(1 + sigma * sigma))) <= est.ci_half_width[i]);
    }
  }

  TEST_CASE("i.i.d. init at N = 256 matches the grid step") {
    const auto g = test::bump_objective();
    const auto k = MutationKernel::gaussian(0.5);
    const auto est = exact_next_marginal_mc(law_sampler(GaussianLaw{}), g, k, xs, 256, 10000,
                                            RandomStream(2));
    const auto grid = ipm::grid_selection_mutation_step(
        ipm::MarginalDensityGrid::from_law(GaussianLaw{}, -10, 10, 2048), g, k).grid;
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      worst = std::max(worst, std::abs(est.estimate[i] - grid.density_at(xs[i])));
    }
    CHECK(worst < 0.05);
  }

  TEST_CASE("error is nonincreasing in N up to CI overlap") {
    const auto g = test::bump_objective();
    const auto k = MutationKernel::gaussian(0.5);
    const auto grid = ipm::grid_selection_mutation_step(
        ipm::MarginalDensityGrid::from_law(GaussianLaw{}, -10, 10, 2048), g, k).grid;
    double prev_err = INFINITY, prev_hw = 0.0;
    for (std::size_t N : {4, 16, 64, 256}) {
      const auto est = exact_next_marginal_mc(law_sampler(GaussianLaw{}), g, k, xs, N, 10000,
                                              RandomStream(3, {N}));
      double err = 0.0, hw = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = std::abs(est.estimate[i] - grid.density_at(xs[i]));
        if (e > err) {
          err = e;
          hw = est.ci_half_width[i];
        }
      }
      CAPTURE(N);
      CHECK(err <= prev_err + prev_hw + hw);
      prev_err = err;
      prev_hw = hw;
    }
  }

  TEST_CASE("mixture init departs from the grid step and follows the per-component oracle") {
    const auto g = test::bump_objective();
    const double sigma = 0.5;
    const auto k = MutationKernel::gaussian(sigma);
    const GaussianMixtureLaw mix{{-2, 2}, {0.5, 0.5}, 0.5};
    const double z = simultaneous_z(xs.size(), 0.95);
    const auto est = exact_next_marginal_mc(law_sampler(mix), g, k, xs, 256, 10000, RandomStream(4), z);
    const auto grid = ipm::grid_selection_mutation_step(
        ipm::MarginalDensityGrid::from_law(mix, -10, 10, 2048), g, k).grid;
    bool departs = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      departs |= std::abs(est.estimate[i] - grid.density_at(xs[i])) > 3.0 * est.ci_half_width[i];
      const auto lo = component(-2, 0.5, g, sigma, xs[i]);
      const auto hi = component(2, 0.5, g, sigma, xs[i]);
      const double oracle = 0.5 * lo.a / lo.b + 0.5 * hi.a / hi.b;
      const double ipm_closed_form = (lo.a + hi.a) / (lo.b + hi.b);
      CHECK(std::abs(est.estimate[i] - oracle) <= est.ci_half_width[i] + 0.005);
      CHECK(std::abs(grid.density_at(xs[i]) - ipm_closed_form) < 1e-3);
    }
    CHECK(departs);
  }

  TEST_CASE("preconditions") {
    const auto g = test::bump_objective();
    CHECK_THROWS(exact_next_marginal_mc(law_sampler(GaussianLaw{}), g, MutationKernel::gaussian(1), xs,
                                        4, 999, RandomStream(1)));
    CHECK_THROWS(exact_next_marginal_mc(law_sampler(GaussianLaw{}), g, MutationKernel::zero_noise(), xs,
                                        4, 1000, RandomStream(1)));
  }

  TEST_CASE("result does not depend on the worker count") {
    const auto g = test::bump_objective();
    const auto k = MutationKernel::gaussian(0.5);
    const auto a = exact_next_marginal_mc(law_sampler(GaussianLaw{}), g, k, xs, 16, 2000, RandomStream(5), 1.96, 1);
    const auto b = exact_next_marginal_mc(law_sampler(GaussianLaw{}), g, k, xs, 16, 2000, RandomStream(5), 1.96, 4);
    CHECK(a.estimate == b.estimate);
    CHECK(a.eta == b.eta);
  }
}

TEST_SUITE("sweep") {
  SweepSpec make_spec(const OperatorStack& stack, std::size_t K, std::vector<std::size_t> sizes) {
    const auto g = test::bump_objective();
    auto grid0 = ipm::MarginalDensityGrid::from_law(GaussianLaw{}, -10, 10, 2048);
    return SweepSpec{stack, g, GaussianLaw{}, 1, K, std::move(sizes), 2000,
                     ipm::iterate_ipm(grid0, stack, g, K).states, 64, 17, 1};
  }

  TEST_CASE("mutation-only sweep is flat at the same-law level") {
    const OperatorStack stack({Mutation{MutationKernel::gaussian(0.5)}});
    const auto curve = convergence_sweep(make_spec(stack, 3, {1, 4, 16}), RandomStream(1));
    // 0.03 is about the 95% same-law level at R = 2000, so a few of the 12
    // rows may exceed it; none may exceed the 99% level.
    int above = 0;
    for (const auto& row : curve.rows()) {
      if (row.metric != "ks") continue;
      CHECK(row.value < ks_null_quantile(2000, 0, kKolmogorov99));
      above += row.value >= 0.03;
    }
    CHECK(above <= 3);
    CHECK(curve.size() == 4 * 3 * 2 + 4 * 2);
  }

  TEST_CASE("simple EA sweep decreases in n") {
    const OperatorStack stack({Selection{}, Mutation{MutationKernel::gaussian(0.5)}});
    const std::vector<std::size_t> sizes{2, 8, 32, 128};
    const auto curve = convergence_sweep(make_spec(stack, 3, sizes), RandomStream(2));
    CHECK(curve.size() == 3 * 4 * 4);
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      const auto* a = curve.find(3, sizes[i], "ks");
      const auto* b = curve.find(3, sizes[i + 1], "ks");
      REQUIRE(a);
      REQUIRE(b);
      CHECK(b->value <= a->value + a->ci_half_width + b->ci_half_width);
    }
    CHECK(curve.find(3, 128, "ks")->value < 0.05);
    CHECK(curve.find(3, 2, "ks")->value > 0.05);
  }

  TEST_CASE("K = 0 distances sit at the calibration level") {
    const OperatorStack stack({Selection{}, Mutation{MutationKernel::gaussian(0.5)}});
    const auto curve = convergence_sweep(make_spec(stack, 0, {2, 16}), RandomStream(3));
    for (const auto& row : curve.rows()) {
      if (row.metric == "ks") CHECK(row.value < ks_null_quantile(2000, 0, kKolmogorov99));
    }
  }

  TEST_CASE("incompatible references are rejected") {
    const OperatorStack stack({Mutation{MutationKernel::gaussian(0.5)}});
    auto spec = make_spec(stack, 1, {2});
    spec.dimension = 2;
    CHECK_THROWS_AS(convergence_sweep(spec, RandomStream(1)), std::invalid_argument);
    auto short_ref = make_spec(stack, 1, {2});
    short_ref.generations = 3;
    CHECK_THROWS_AS(convergence_sweep(short_ref, RandomStream(1)), std::invalid_argument);
  }

  TEST_CASE("particle references work in two dimensions") {
    const auto g = rastrigin_floor_objective(0.1, Box::cube(2, -5, 5));
    const OperatorStack stack({Mutation{MutationKernel::gaussian(0.3)}});
    const ipm::ParticleEnsemble pool{sample_initial_population(GaussianLaw{}, 20000, 2, RandomStream(4))};
    SweepSpec spec{stack, g, GaussianLaw{}, 2, 2, {1, 8}, 1000,
                   ipm::iterate_ipm(pool, stack, g, 2, RandomStream(5)), 32, 1, 1};
    const auto curve = convergence_sweep(spec, RandomStream(6));
    for (const auto& row : curve.rows()) {
      if (row.metric == "ks") CHECK(row.value < ks_null_quantile(1000, 20000, kKolmogorov99));
    }
  }

  TEST_CASE("duplicate rows are rejected") {
    ConvergenceCurve c;
    c.add({0, 2, 10, "ks", 0.1, 0.01, 1});
    CHECK_THROWS(c.add({0, 2, 10, "ks", 0.2, 0.01, 1}));
    c.add({0, 1, 10, "ks", 0.1, 0.01, 1});
    CHECK(c.rows().front().n == 1);
  }
}

TEST_SUITE("covariance decay") {
  TEST_CASE("one simple-EA step: covariance shrinks from n = 4 to n = 128") {
    const auto g = test::bump_objective();
    const OperatorStack stack({Selection{}, Mutation{MutationKernel::gaussian(0.5)}});
    Estimate est[2];
    int i = 0;
    for (std::size_t n : {4, 128}) {
      const auto runs = run_replicates(stack, g, GaussianLaw{}, 1, n, 1, 10000, RandomStream(9).derive(n));
      std::vector<Population> gen1;
      for (const auto& t : runs) gen1.push_back(t[1]);
      est[i++] = pairwise_fitness_covariance(gen1, g);
    }
    CHECK(std::abs(est[1].value) < std::abs(est[0].value));
    CHECK(std::abs(est[0].value) - est[0].ci_half_width > std::abs(est[1].value) + est[1].ci_half_width);
  }
}
