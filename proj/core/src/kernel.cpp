#include "ipmlab/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ipmlab {

MutationKernel MutationKernel::zero_noise() { return {Kind::zero_noise, 0.0}; }

MutationKernel MutationKernel::gaussian(double sigma) {
  if (!(sigma > 0.0 && std::isfinite(sigma))) {
    throw std::invalid_argument("gaussian kernel: sigma must be positive");
  }
  return {Kind::gaussian, sigma};
}

MutationKernel MutationKernel::uniform_box(double half_width) {
  if (!(half_width > 0.0 && std::isfinite(half_width))) {
    throw std::invalid_argument("uniform_box kernel: half_width must be positive");
  }
  return {Kind::uniform_box, half_width};
}

std::string_view MutationKernel::name() const noexcept {
  switch (kind_) {
    case Kind::zero_noise: return "zero_noise";
    case Kind::gaussian: return "gaussian";
    case Kind::uniform_box: return "uniform_box";
  }
  return "unknown";
}

double MutationKernel::increment_density(double t) const {
  switch (kind_) {
    case Kind::gaussian: {
      const double z = t / scale_;
      return std::exp(-0.5 * z * z) / (scale_ * std::sqrt(2.0 * std::numbers::pi));
    }
    case Kind::uniform_box:
      return std::abs(t) <= scale_ ? 0.5 / scale_ : 0.0;
    case Kind::zero_noise:
      break;
  }
  throw std::logic_error("zero_noise kernel has no density");
}

double MutationKernel::increment_cdf(double t) const noexcept {
  switch (kind_) {
    case Kind::gaussian:
      return 0.5 * std::erfc(-t / (scale_ * std::numbers::sqrt2));
    case Kind::uniform_box:
      if (t <= -scale_) return 0.0;
      if (t >= scale_) return 1.0;
      return (t + scale_) / (2.0 * scale_);
    case Kind::zero_noise:
      break;
  }
  return t >= 0.0 ? 1.0 : 0.0;
}

double MutationKernel::density(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw std::invalid_argument("kernel density: dimension mismatch");
  double p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) p *= increment_density(x[i] - y[i]);
  return p;
}

double MutationKernel::sup_bound(std::size_t dim) const noexcept {
  switch (kind_) {
    case Kind::gaussian:
      return std::pow(scale_ * std::sqrt(2.0 * std::numbers::pi), -static_cast<double>(dim));
    case Kind::uniform_box:
      return std::pow(2.0 * scale_, -static_cast<double>(dim));
    case Kind::zero_noise:
      break;
  }
  return std::numeric_limits<double>::infinity();
}

void MutationKernel::sample(std::span<const double> y, RandomStream& rng,
                            std::span<double> out) const {
  if (out.size() != y.size()) throw std::invalid_argument("kernel sample: dimension mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) {
    switch (kind_) {
      case Kind::zero_noise: out[i] = y[i]; break;
      case Kind::gaussian: out[i] = y[i] + scale_ * rng.normal(); break;
      case Kind::uniform_box: out[i] = y[i] + rng.uniform(-scale_, scale_); break;
    }
  }
}

Individual MutationKernel::sample(std::span<const double> y, RandomStream& rng) const {
  Individual out{std::vector<double>(y.size())};
  sample(y, rng, out.coords);
  return out;
}

}  // namespace ipmlab
