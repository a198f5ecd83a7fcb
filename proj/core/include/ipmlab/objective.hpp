#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipmlab/random.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab {

/// Bounded fitness function g with declared bounds 0 < g_min <= g <= g_max on
/// its domain box. The box also truncates grid computations.
class Objective {
 public:
  using Function = std::function<double(std::span<const double>)>;

  Objective(std::string name, Function eval, double g_min, double g_max, Box domain);

  const std::string& name() const noexcept { return name_; }
  double operator()(std::span<const double> x) const { return eval_(x); }
  double g_min() const noexcept { return g_min_; }
  double g_max() const noexcept { return g_max_; }
  const Box& domain() const noexcept { return domain_; }
  std::size_t dim() const noexcept { return domain_.dim(); }

 private:
  std::string name_;
  Function eval_;
  double g_min_;
  double g_max_;
  Box domain_;
};

// Built-in registry. Declared bounds are taken as given; use
// validate_objective() to spot-check them.

/// g(x) = value.
Objective constant_objective(double value, Box domain);

/// g(x) = floor + amplitude * exp(-sum_i ((x_i - center) / width)^2).
/// Natural bounds: [floor, floor + amplitude].
Objective gaussian_bump_objective(double floor, double amplitude, double center, double width,
                                  Box domain);

/// g(x) = floor + 1 / (1 + rastrigin(x)), rastrigin(x) = 10 d + sum(x^2 - 10 cos(2 pi x)).
/// Natural bounds: [floor, floor + 1].
Objective rastrigin_floor_objective(double floor, Box domain);

struct ObjectiveValidation {
  bool passed = true;
  std::size_t probes = 0;
  std::size_t violations = 0;
  /// Largest distance by which g left [g_min, g_max]; 0 when passed.
  double worst_violation = 0.0;
  std::optional<Individual> worst_point;
};

/// Samples probe_count uniform points in the domain box and checks
/// g_min <= g(x) <= g_max. Throws NumericalError on a non-finite value.
ObjectiveValidation validate_objective(const Objective& obj, std::size_t probe_count,
                                       RandomStream rng);

/// Component i is obj(pop[i]). Throws NumericalError naming the first
/// individual outside the domain box.
std::vector<double> evaluate_fitness(const Population& pop, const Objective& obj);

}  // namespace ipmlab
