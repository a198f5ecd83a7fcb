#include "ipmlab/objective.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ipmlab/errors.hpp"

namespace ipmlab {

Objective::Objective(std::string name, Function eval, double g_min, double g_max, Box domain)
    : name_(std::move(name)),
      eval_(std::move(eval)),
      g_min_(g_min),
      g_max_(g_max),
      domain_(std::move(domain)) {
  if (!eval_) throw std::invalid_argument("objective needs an evaluation function");
  if (!(g_min_ > 0.0 && g_max_ >= g_min_ && std::isfinite(g_max_))) {
    throw std::invalid_argument("objective bounds must satisfy 0 < g_min <= g_max < inf");
  }
  if (domain_.dim() == 0) throw std::invalid_argument("objective domain must have d >= 1");
}

Objective constant_objective(double value, Box domain) {
  return Objective(
      "constant", [value](std::span<const double>) { return value; }, value, value,
      std::move(domain));
}

Objective gaussian_bump_objective(double floor, double amplitude, double center, double width,
                                  Box domain) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be positive");
  auto eval = [=](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) {
      const double t = (xi - center) / width;
      r2 += t * t;
    }
    return floor + amplitude * std::exp(-r2);
  };
  return Objective("gaussian_bump", eval, floor, floor + amplitude, std::move(domain));
}

Objective rastrigin_floor_objective(double floor, Box domain) {
  auto eval = [floor](std::span<const double> x) {
    double r = 10.0 * static_cast<double>(x.size());
    for (double xi : x) r += xi * xi - 10.0 * std::cos(2.0 * std::numbers::pi * xi);
    return floor + 1.0 / (1.0 + r);
  };
  return Objective("rastrigin_floor", eval, floor, floor + 1.0, std::move(domain));
}

namespace {

std::string describe(std::span<const double> x) {
  std::ostringstream out;
  out.precision(17);
  out << '(';
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << ')';
  return out.str();
}

}  // namespace

ObjectiveValidation validate_objective(const Objective& obj, std::size_t probe_count,
                                       RandomStream rng) {
  if (probe_count == 0) throw std::invalid_argument("validate_objective: probe_count must be >= 1");
  ObjectiveValidation report;
  report.probes = probe_count;
  const Box& box = obj.domain();
  std::vector<double> x(box.dim());
  for (std::size_t p = 0; p < probe_count; ++p) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(box[i].lo, box[i].hi);
    const double g = obj(x);
    if (!std::isfinite(g)) {
      throw NumericalError("objective '" + obj.name() + "' is not finite at " + describe(x));
    }
    const double excess = std::max(obj.g_min() - g, g - obj.g_max());
    if (excess > 0.0) {
      ++report.violations;
      if (excess > report.worst_violation) {
        report.worst_violation = excess;
        report.worst_point = Individual{x};
      }
    }
  }
  report.passed = report.violations == 0;
  return report;
}

std::vector<double> evaluate_fitness(const Population& pop, const Objective& obj) {
  std::vector<double> fitness(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto x = pop[i];
    if (!obj.domain().contains(x)) {
      throw NumericalError("individual " + std::to_string(i) + " at " + describe(x) +
                           " lies outside the domain box of objective '" + obj.name() + "'");
    }
    fitness[i] = obj(x);
  }
  return fitness;
}

}  // namespace ipmlab
