#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ipmlab/objective.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab::test {

inline Objective bump_objective() {
  return gaussian_bump_objective(0.1, 1.0, 1.0, 2.0, Box::cube(1, -10.0, 10.0));
}

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> xs(count);
  for (std::size_t i = 0; i < count; ++i) {
    xs[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return xs;
}

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double variance_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double covariance_of(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

inline double normal_cdf_ref(double x, double sd) {
  return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0)));
}

}  // namespace ipmlab::test
