#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ipmlab/diagnostics.hpp"
#include "ipmlab/errors.hpp"
#include "ipmlab/init_law.hpp"
#include "ipmlab/ipm.hpp"
#include "ipmlab/kernel.hpp"
#include "ipmlab/operators.hpp"

using namespace ipmlab;
using namespace ipmlab::ipm;
using operators::Mutation;
using operators::OperatorStack;
using operators::Recombination;
using operators::RecombinationLaw;
using operators::Selection;

namespace {

MarginalDensityGrid standard_normal_grid(std::size_t bins, double lo = -10.0, double hi = 10.0) {
  return MarginalDensityGrid::from_law(GaussianLaw{0.0, 1.0}, lo, hi, bins);
}

double sup_cdf_error(const MarginalDensityGrid& grid, double sd) {
  const auto edges = grid.edge_cdf();
  double worst = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double x = grid.lo() + static_cast<double>(i) * grid.delta();
    worst = std::max(worst, std::abs(edges[i] - test::normal_cdf_ref(x, sd)));
  }
  return worst;
}

double sup_density_error(const MarginalDensityGrid& grid, double sd) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.bins(); ++i) {
    const double x = grid.midpoint(i);
    const double f = std::exp(-0.5 * x * x / (sd * sd)) / (sd * std::sqrt(2.0 * M_PI));
    worst = std::max(worst, std::abs(grid.values()[i] - f));
  }
  return worst;
}

std::vector<double> first_coords(const ParticleEnsemble& e) {
  std::vector<double> out(e.size());
  for (std::size_t p = 0; p < e.size(); ++p) out[p] = e.particles[p][0];
  return out;
}

ParticleEnsemble normal_pool(std::size_t P, std::uint64_t seed) {
  return {sample_initial_population(GaussianLaw{}, P, 1, RandomStream(seed))};
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("construction validates mass and sign") {
    CHECK_THROWS_AS(MarginalDensityGrid(0.0, 1.0, {1.0, 1.5}), NumericalError);
    CHECK_THROWS_AS(MarginalDensityGrid(0.0, 1.0, {-1.0, 3.0}), NumericalError);
    CHECK_NOTHROW(MarginalDensityGrid(0.0, 1.0, {0.5, 1.5}));
    const auto g = MarginalDensityGrid::normalized(0.0, 2.0, {1, 1, 1, 1});
    CHECK(g.mass() == doctest::Approx(1.0));
    CHECK(g.values()[0] == doctest::Approx(0.5));
    CHECK(g.cdf(1.0) == doctest::Approx(0.5));
    CHECK(g.cdf(-1.0) == 0.0);
    CHECK(g.cdf(3.0) == 1.0);
  }

  TEST_CASE("constant fitness reduces the step to a convolution") {
    const auto grid = standard_normal_grid(512);
    const auto k = MutationKernel::gaussian(0.5);
    const auto a = grid_selection_mutation_step(grid, constant_objective(3.0, Box::cube(1, -10, 10)), k);
    const auto b = grid_mutation_step(grid, k);
    for (std::size_t i = 0; i < grid.bins(); ++i) {
      CHECK(a.grid.values()[i] == doctest::Approx(b.grid.values()[i]).epsilon(1e-12));
    }
    CHECK(a.grid.generation() == 1);
  }

  TEST_CASE("zero-noise kernel is pure fitness reweighting") {
    const auto grid = standard_normal_grid(400);
    const auto g = test::bump_objective();
    const auto out = grid_selection_mutation_step(grid, g, MutationKernel::zero_noise()).grid;
    double z = 0.0;
    for (std::size_t i = 0; i < grid.bins(); ++i) {
      const double x = grid.midpoint(i);
      z += grid.values()[i] * g(std::span<const double>(&x, 1)) * grid.delta();
    }
    for (std::size_t i = 0; i < grid.bins(); ++i) {
      const double x = grid.midpoint(i);
      const double expected = grid.values()[i] * g(std::span<const double>(&x, 1)) / z;
      CHECK(out.values()[i] == doctest::Approx(expected).epsilon(1e-10));
    }
  }

  TEST_CASE("uniform density reweighted by 1 + x gives (1 + x) / 2") {
    const Objective linear(
        "1+x", [](std::span<const double> x) { return std::max(1.0 + x[0], 1e-12); }, 1e-12, 2.0,
        Box::cube(1, -1.0, 1.0));
    const auto grid = MarginalDensityGrid::from_law(UniformLaw{-1.0, 1.0}, -1.0, 1.0, 1000);
    const auto out = grid_selection_mutation_step(grid, linear, MutationKernel::zero_noise()).grid;
    for (std::size_t i = 0; i < out.bins(); ++i) {
      CHECK(out.values()[i] == doctest::Approx((1.0 + out.midpoint(i)) / 2.0).epsilon(1e-12));
    }
    // Fine-grid numeric integration of the closed form: mass 1, mean 1/3.
    CHECK(out.mean() == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  }

  TEST_CASE("zero-noise mutation is the identity") {
    const auto grid = standard_normal_grid(300);
    const auto out = grid_mutation_step(grid, MutationKernel::zero_noise());
    for (std::size_t i = 0; i < grid.bins(); ++i) {
      REQUIRE(out.grid.values()[i] == doctest::Approx(grid.values()[i]).epsilon(1e-14));
    }
    CHECK(out.grid.generation() == grid.generation() + 1);
  }

  TEST_CASE("gaussian convolution matches N(0, 1.25)") {
    const auto out = grid_mutation_step(standard_normal_grid(2048), MutationKernel::gaussian(0.5));
    CHECK(sup_cdf_error(out.grid, std::sqrt(1.25)) < 0.005);
  }

  TEST_CASE("two steps of variance s equal one step of variance 2s") {
    const double s = 0.25;
    const auto grid = standard_normal_grid(1024);
    const auto once = grid_mutation_step(grid, MutationKernel::gaussian(std::sqrt(2 * s))).grid;
    const auto twice = grid_mutation_step(
        grid_mutation_step(grid, MutationKernel::gaussian(std::sqrt(s))).grid,
        MutationKernel::gaussian(std::sqrt(s))).grid;
    const auto e1 = once.edge_cdf(), e2 = twice.edge_cdf();
    double worst = 0.0;
    for (std::size_t i = 0; i < e1.size(); ++i) worst = std::max(worst, std::abs(e1[i] - e2[i]));
    CHECK(worst < 0.01);
  }

  TEST_CASE("halving the bin width shrinks the density error by at least 1.8") {
    const auto k = MutationKernel::gaussian(0.5);
    const double sd = std::sqrt(1.25);
    double prev = 0.0;
    for (std::size_t bins : {64, 128, 256, 512}) {
      const double err = sup_density_error(grid_mutation_step(standard_normal_grid(bins), k).grid, sd);
      if (prev > 0.0) {
        CAPTURE(bins);
        CHECK(prev / err >= 1.8);
      }
      prev = err;
    }
  }

  TEST_CASE("mass is conserved over 100 steps") {
    auto grid = standard_normal_grid(512);
    const auto g = test::bump_objective();
    const auto k = MutationKernel::gaussian(0.5);
    for (int step = 0; step < 100; ++step) {
      grid = grid_selection_mutation_step(grid, g, k).grid;
      REQUIRE(std::abs(grid.mass() - 1.0) <= kMassTolerance);
    }
  }

  TEST_CASE("leaked mass is reported") {
    const auto narrow = standard_normal_grid(400, -2.0, 2.0);
    const auto step = grid_mutation_step(narrow, MutationKernel::gaussian(1.0));
    CHECK(step.leaked_mass > 0.05);
    CHECK(std::abs(step.grid.mass() - 1.0) <= kMassTolerance);
  }

  TEST_CASE("zero-noise selection concentrates mass at the optimum") {
    const auto g = test::bump_objective();
    auto grid = standard_normal_grid(800);
    const std::size_t star = grid.bin_of(1.0);
    double prev = grid.values()[star];
    for (int k = 0; k < 30; ++k) {
      grid = grid_selection_mutation_step(grid, g, MutationKernel::zero_noise()).grid;
      REQUIRE(grid.values()[star] >= prev);
      prev = grid.values()[star];
    }
  }

  TEST_CASE("grid step rejects objectives that do not cover it") {
    const auto grid = standard_normal_grid(100, -20.0, 20.0);
    CHECK_THROWS_AS(grid_selection_mutation_step(grid, test::bump_objective(), MutationKernel::gaussian(1.0)),
                    std::invalid_argument);
  }
}

TEST_SUITE("particles") {
  TEST_CASE("zero-noise mutation is a bootstrap resample") {
    const auto pool = normal_pool(10000, 1);
    const auto out = particle_ipm_step(pool, Mutation{MutationKernel::zero_noise()},
                                       test::bump_objective(), RandomStream(2));
    CHECK(out.generation() == 1);
    CHECK(diagnostics::ks_statistic(first_coords(out), first_coords(pool)) < 0.02);
    const auto in = first_coords(pool);
    for (double x : first_coords(out)) REQUIRE(std::find(in.begin(), in.end(), x) != in.end());
  }

  TEST_CASE("mean crossover on N(0,1) halves the variance") {
    const auto out = particle_ipm_step(normal_pool(100000, 3),
                                       Recombination{RecombinationLaw::mean_crossover()},
                                       test::bump_objective(), RandomStream(4));
    CHECK(test::variance_of(first_coords(out)) == doctest::Approx(0.5).epsilon(0.03));
  }

  TEST_CASE("constant-fitness selection preserves mean and variance") {
    const auto pool = normal_pool(100000, 5);
    const auto out = particle_ipm_step(pool, Selection{}, constant_objective(1.0, Box::cube(1, -10, 10)),
                                       RandomStream(6));
    const auto a = first_coords(pool), b = first_coords(out);
    CHECK(std::abs(test::mean_of(a) - test::mean_of(b)) < 0.02);
    CHECK(test::variance_of(b) == doctest::Approx(test::variance_of(a)).epsilon(0.02));
  }

  TEST_CASE("pool floor and empty pool") {
    CHECK_THROWS_AS(particle_ipm_step(normal_pool(999, 1), Selection{}, test::bump_objective(),
                                      RandomStream(1)),
                    std::invalid_argument);
    CHECK_NOTHROW(particle_ipm_step(normal_pool(10, 1), Selection{}, test::bump_objective(),
                                    RandomStream(1), 10));
  }

  TEST_CASE("output particles are uncorrelated") {
    const OperatorStack stack({Selection{}, Mutation{MutationKernel::gaussian(0.5)}});
    const auto traj = iterate_ipm(normal_pool(100000, 7), stack, test::bump_objective(), 1, RandomStream(8));
    const auto x = first_coords(traj.back());
    std::vector<double> a, b;
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
      a.push_back(x[i]);
      b.push_back(x[i + 1]);
    }
    CHECK(std::abs(*diagnostics::pearson_correlation(a, b)) < 0.02);
  }

  TEST_CASE("particle step does not depend on the worker count") {
    const auto pool = normal_pool(5000, 9);
    const Mutation m{MutationKernel::gaussian(0.3)};
    const auto a = particle_ipm_step(pool, m, test::bump_objective(), RandomStream(10), 1000, 1);
    const auto b = particle_ipm_step(pool, m, test::bump_objective(), RandomStream(10), 1000, 3);
    CHECK(a.particles == b.particles);
  }
}

TEST_SUITE("trajectories") {
  TEST_CASE("K = 0 returns the initial state") {
    const auto grid = standard_normal_grid(64);
    const OperatorStack stack({Selection{}, Mutation{MutationKernel::gaussian(0.5)}});
    const auto t = iterate_ipm(grid, stack, test::bump_objective(), 0);
    REQUIRE(t.states.size() == 1);
    CHECK(t.states[0].values() == grid.values());
    const auto p = iterate_ipm(normal_pool(2000, 1), stack, test::bump_objective(), 0, RandomStream(1));
    REQUIRE(p.size() == 1);
  }

  TEST_CASE("constant fitness grid trajectory equals repeated convolution") {
    const auto grid = standard_normal_grid(512);
    const auto k = MutationKernel::gaussian(0.5);
    const OperatorStack stack({Selection{}, Mutation{k}});
    const auto t = iterate_ipm(grid, stack, constant_objective(2.0, Box::cube(1, -10, 10)), 3);
    auto ref = grid;
    for (int i = 0; i < 3; ++i) ref = grid_mutation_step(ref, k).grid;
    REQUIRE(t.states.size() == 4);
    for (std::size_t i = 0; i < ref.bins(); ++i) {
      CHECK(t.states[3].values()[i] == doctest::Approx(ref.values()[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("grid path refuses recombination") {
    const OperatorStack stack({Recombination{RecombinationLaw::mean_crossover()}});
    CHECK_THROWS_AS(check_grid_compatible(stack), std::invalid_argument);
    CHECK_THROWS_AS(iterate_ipm(standard_normal_grid(64), stack, test::bump_objective(), 1),
                    std::invalid_argument);
  }

  TEST_CASE("particle mutation trajectory reaches variance 2 after four steps") {
    const OperatorStack stack({Mutation{MutationKernel::gaussian(0.5)}});
    const auto t = iterate_ipm(normal_pool(100000, 11), stack, test::bump_objective(), 4, RandomStream(12));
    CHECK(test::variance_of(first_coords(t.back())) == doctest::Approx(2.0).epsilon(0.03));
  }

  TEST_CASE("grid and particle trajectories agree for the simple EA") {
    const auto g = test::bump_objective();
    const OperatorStack stack({Selection{}, Mutation{MutationKernel::gaussian(0.5)}});
    const auto grid = iterate_ipm(standard_normal_grid(2048), stack, g, 3);
    const auto parts = iterate_ipm(normal_pool(100000, 13), stack, g, 3, RandomStream(14));
    CHECK(diagnostics::ks_statistic(first_coords(parts.back()), grid.states.back()) < 0.03);
  }
}

TEST_SUITE("bridges") {
  TEST_CASE("single occupied bin") {
    std::vector<double> v(50, 0.0);
    v[17] = 50.0;
    const MarginalDensityGrid grid(0.0, 1.0, v);
    const auto draws = sample_from_grid(grid, 1000, RandomStream(1));
    for (double x : first_coords(draws)) {
      REQUIRE(x >= 0.34);
      REQUIRE(x <= 0.36);
    }
  }

  TEST_CASE("uniform grid moments and self-consistency") {
    const MarginalDensityGrid uniform(0.0, 1.0, std::vector<double>(100, 1.0));
    const auto draws = first_coords(sample_from_grid(uniform, 100000, RandomStream(2)));
    CHECK(std::abs(test::mean_of(draws) - 0.5) < 0.003);
    const auto grid = standard_normal_grid(512);
    const auto x = first_coords(sample_from_grid(grid, 100000, RandomStream(3)));
    CHECK(diagnostics::ks_statistic(x, grid) < 0.01);
  }

  TEST_CASE("histogram round trip") {
    const auto grid = standard_normal_grid(100, -5.0, 5.0);
    const auto x = first_coords(sample_from_grid(grid, 1000000, RandomStream(4)));
    const auto back = grid_from_samples(x, -5.0, 5.0, 100);
    CHECK(back.clip_fraction == 0.0);
    double l1 = 0.0;
    for (std::size_t i = 0; i < 100; ++i) l1 += std::abs(back.grid.values()[i] - grid.values()[i]) * grid.delta();
    CHECK(l1 < 0.02);
  }

  TEST_CASE("constant samples and clipping") {
    const std::vector<double> same(200, 0.3);
    const auto h = grid_from_samples(same, 0.0, 1.0, 10);
    CHECK(std::count_if(h.grid.values().begin(), h.grid.values().end(), [](double v) { return v > 0; }) == 1);
    std::vector<double> mixed(200, 0.5);
    mixed[0] = 5.0;
    CHECK(grid_from_samples(mixed, 0.0, 1.0, 10).clip_fraction == doctest::Approx(0.005));
    CHECK_THROWS_AS(grid_from_samples(std::vector<double>(200, 9.0), 0.0, 1.0, 10), NumericalError);
    CHECK_THROWS(grid_from_samples(std::vector<double>(99, 0.5), 0.0, 1.0, 10));
  }
}
