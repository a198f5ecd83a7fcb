#include "ipmlab/init_law.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ipmlab {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::size_t pick_component(const GaussianMixtureLaw& law, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t c = 0; c + 1 < law.weights.size(); ++c) {
    acc += law.weights[c];
    if (u < acc) return c;
  }
  return law.weights.size() - 1;
}

}  // namespace

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void validate_law(const InitLaw& law) {
  std::visit(overloaded{
                 [](const GaussianLaw& g) {
                   if (!(g.sd > 0.0 && std::isfinite(g.mean))) {
                     throw std::invalid_argument("gaussian law needs sd > 0");
                   }
                 },
                 [](const UniformLaw& u) {
                   if (!(u.lo < u.hi)) throw std::invalid_argument("uniform law needs lo < hi");
                 },
                 [](const GaussianMixtureLaw& m) {
                   if (m.centers.empty() || m.centers.size() != m.weights.size()) {
                     throw std::invalid_argument("mixture needs one weight per center");
                   }
                   if (!(m.within_sd > 0.0)) {
                     throw std::invalid_argument("mixture needs within_sd > 0");
                   }
                   for (double w : m.weights) {
                     if (!(w >= 0.0)) throw std::invalid_argument("mixture weights must be >= 0");
                   }
                   const double total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
                   if (std::abs(total - 1.0) > 1e-12) {
                     throw std::invalid_argument("mixture weights must sum to 1");
                   }
                 },
             },
             law);
}

std::string law_name(const InitLaw& law) {
  return std::visit(overloaded{[](const GaussianLaw&) { return std::string("gaussian"); },
                               [](const UniformLaw&) { return std::string("uniform"); },
                               [](const GaussianMixtureLaw&) { return std::string("mixture"); }},
                    law);
}

bool is_iid(const InitLaw& law) {
  if (const auto* m = std::get_if<GaussianMixtureLaw>(&law)) {
    std::size_t positive = 0;
    for (double w : m->weights) positive += w > 0.0 ? 1 : 0;
    return positive < 2;
  }
  return true;
}

Population sample_initial_population(const InitLaw& law, std::size_t n, std::size_t dim,
                                     RandomStream rng) {
  if (n == 0 || dim == 0) throw std::invalid_argument("initial population needs n, d >= 1");
  std::vector<double> coords(n * dim);
  std::visit(overloaded{
                 [&](const GaussianLaw& g) {
                   for (auto& c : coords) c = g.mean + g.sd * rng.normal();
                 },
                 [&](const UniformLaw& u) {
                   for (auto& c : coords) c = rng.uniform(u.lo, u.hi);
                 },
                 [&](const GaussianMixtureLaw& m) {
                   const double center = m.centers[pick_component(m, rng)];
                   for (auto& c : coords) c = center + m.within_sd * rng.normal();
                 },
             },
             law);
  return Population(dim, std::move(coords), 0);
}

double marginal_cdf(const InitLaw& law, double x) {
  return std::visit(
      overloaded{
          [x](const GaussianLaw& g) { return normal_cdf((x - g.mean) / g.sd); },
          [x](const UniformLaw& u) {
            if (x <= u.lo) return 0.0;
            if (x >= u.hi) return 1.0;
            return (x - u.lo) / (u.hi - u.lo);
          },
          [x](const GaussianMixtureLaw& m) {
            double p = 0.0;
            for (std::size_t c = 0; c < m.centers.size(); ++c) {
              p += m.weights[c] * normal_cdf((x - m.centers[c]) / m.within_sd);
            }
            return p;
          },
      },
      law);
}

double marginal_density(const InitLaw& law, double x) {
  return std::visit(
      overloaded{
          [x](const GaussianLaw& g) { return normal_pdf((x - g.mean) / g.sd) / g.sd; },
          [x](const UniformLaw& u) { return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
          [x](const GaussianMixtureLaw& m) {
            double p = 0.0;
            for (std::size_t c = 0; c < m.centers.size(); ++c) {
              p += m.weights[c] * normal_pdf((x - m.centers[c]) / m.within_sd) / m.within_sd;
            }
            return p;
          },
      },
      law);
}

double marginal_mean(const InitLaw& law) {
  return std::visit(overloaded{[](const GaussianLaw& g) { return g.mean; },
                               [](const UniformLaw& u) { return 0.5 * (u.lo + u.hi); },
                               [](const GaussianMixtureLaw& m) {
                                 double mu = 0.0;
                                 for (std::size_t c = 0; c < m.centers.size(); ++c) {
                                   mu += m.weights[c] * m.centers[c];
                                 }
                                 return mu;
                               }},
                    law);
}

double marginal_variance(const InitLaw& law) {
  return std::visit(overloaded{[](const GaussianLaw& g) { return g.sd * g.sd; },
                               [](const UniformLaw& u) { return (u.hi - u.lo) * (u.hi - u.lo) / 12.0; },
                               [&law](const GaussianMixtureLaw& m) {
                                 const double mu = marginal_mean(law);
                                 double v = m.within_sd * m.within_sd;
                                 for (std::size_t c = 0; c < m.centers.size(); ++c) {
                                   v += m.weights[c] * (m.centers[c] - mu) * (m.centers[c] - mu);
                                 }
                                 return v;
                               }},
                    law);
}

}  // namespace ipmlab
