#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ipmlab {

/// A point in the solution space R^d.
struct Individual {
  std::vector<double> coords;

  std::size_t dim() const noexcept { return coords.size(); }
  friend bool operator==(const Individual&, const Individual&) = default;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box, one interval per coordinate.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> sides);
  /// Same interval on every coordinate.
  static Box cube(std::size_t dim, double lo, double hi);

  std::size_t dim() const noexcept { return sides_.size(); }
  const Interval& operator[](std::size_t i) const { return sides_.at(i); }
  const std::vector<Interval>& sides() const noexcept { return sides_; }
  bool contains(std::span<const double> x) const noexcept;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<Interval> sides_;
};

/// Ordered population of n >= 1 individuals of common dimension d, stored
/// row-major. Slot i is the i-th individual of generation generation().
class Population {
 public:
  Population(std::size_t dim, std::vector<double> coords, std::size_t generation = 0);
  static Population from_individuals(std::span<const Individual> individuals,
                                     std::size_t generation = 0);
  /// n one-dimensional individuals.
  static Population from_values(std::vector<double> values, std::size_t generation = 0);

  std::size_t size() const noexcept { return coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t generation() const noexcept { return generation_; }

  std::span<const double> operator[](std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  Individual individual(std::size_t i) const;
  const std::vector<double>& coords() const noexcept { return coords_; }

  Population with_generation(std::size_t generation) const;

  friend bool operator==(const Population&, const Population&) = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::size_t generation_;
};

/// First m individuals of pop, same generation. Throws std::invalid_argument
/// unless 1 <= m <= pop.size().
Population project(const Population& pop, std::size_t m);

}  // namespace ipmlab
