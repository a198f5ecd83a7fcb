#pragma once

#include <limits>
#include <span>
#include <string_view>

#include "ipmlab/random.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab {

/// Mutation kernel f_w(x | y) from the built-in registry. All built-ins are
/// translation invariant and act independently on each coordinate, so
/// f_w(x | y) = prod_i h(x_i - y_i) for a one-dimensional increment density h.
class MutationKernel {
 public:
  enum class Kind { zero_noise, gaussian, uniform_box };

  /// Dirac kernel: x = y. Has no density; sup_bound() is +inf.
  static MutationKernel zero_noise();
  /// x = y + sigma * N(0, I).
  static MutationKernel gaussian(double sigma);
  /// x = y + U[-half_width, half_width]^d.
  static MutationKernel uniform_box(double half_width);

  Kind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;
  bool is_zero_noise() const noexcept { return kind_ == Kind::zero_noise; }
  /// sigma for gaussian, half-width for uniform_box, 0 for zero_noise.
  double scale() const noexcept { return scale_; }

  /// One-dimensional increment density h(t). Throws std::logic_error for zero_noise.
  double increment_density(double t) const;
  /// One-dimensional increment CDF H(t).
  double increment_cdf(double t) const noexcept;
  /// f_w(x | y). Throws std::logic_error for zero_noise.
  double density(std::span<const double> x, std::span<const double> y) const;
  /// sup f_w for dimension d.
  double sup_bound(std::size_t dim = 1) const noexcept;

  /// Writes a draw from f_w(. | y) into out (same size as y).
  void sample(std::span<const double> y, RandomStream& rng, std::span<double> out) const;
  Individual sample(std::span<const double> y, RandomStream& rng) const;

 private:
  MutationKernel(Kind kind, double scale) : kind_(kind), scale_(scale) {}

  Kind kind_;
  double scale_;
};

}  // namespace ipmlab
