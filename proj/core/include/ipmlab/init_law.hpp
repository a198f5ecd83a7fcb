#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "ipmlab/random.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab {

/// i.i.d. N(mean, sd^2) on every coordinate.
struct GaussianLaw {
  double mean = 0.0;
  double sd = 1.0;
};

/// i.i.d. U[lo, hi] on every coordinate.
struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
};

/// Exchangeable but not i.i.d.: one latent component c is drawn per
/// population with probability weights[c], then every individual is
/// N(centers[c], within_sd^2) independently.
struct GaussianMixtureLaw {
  std::vector<double> centers;
  std::vector<double> weights;
  double within_sd = 1.0;
};

using InitLaw = std::variant<GaussianLaw, UniformLaw, GaussianMixtureLaw>;

/// Throws std::invalid_argument on malformed parameters.
void validate_law(const InitLaw& law);
std::string law_name(const InitLaw& law);
/// False only for a mixture with two or more positive-weight components.
bool is_iid(const InitLaw& law);

/// Draws an initial population of n individuals in dimension dim.
Population sample_initial_population(const InitLaw& law, std::size_t n, std::size_t dim,
                                     RandomStream rng);

/// CDF and density of the one-coordinate marginal law.
double marginal_cdf(const InitLaw& law, double x);
double marginal_density(const InitLaw& law, double x);
double marginal_mean(const InitLaw& law);
double marginal_variance(const InitLaw& law);

/// Standard normal CDF.
double normal_cdf(double z) noexcept;

}  // namespace ipmlab
