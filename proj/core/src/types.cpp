#include "ipmlab/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ipmlab/errors.hpp"

namespace ipmlab {

Box::Box(std::vector<Interval> sides) : sides_(std::move(sides)) {
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    const auto& s = sides_[i];
    if (!(std::isfinite(s.lo) && std::isfinite(s.hi) && s.lo < s.hi)) {
      throw std::invalid_argument("box side " + std::to_string(i) + " must satisfy lo < hi");
    }
  }
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box(std::vector<Interval>(dim, Interval{lo, hi}));
}

bool Box::contains(std::span<const double> x) const noexcept {
  if (x.size() != sides_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= sides_[i].lo && x[i] <= sides_[i].hi)) return false;
  }
  return true;
}

Population::Population(std::size_t dim, std::vector<double> coords, std::size_t generation)
    : dim_(dim), coords_(std::move(coords)), generation_(generation) {
  if (dim_ == 0) throw std::invalid_argument("population dimension must be >= 1");
  if (coords_.empty() || coords_.size() % dim_ != 0) {
    throw std::invalid_argument("population needs n >= 1 individuals of dimension " +
                                std::to_string(dim_));
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i])) {
      throw NumericalError("non-finite coordinate in individual " + std::to_string(i / dim_));
    }
  }
}

Population Population::from_individuals(std::span<const Individual> individuals,
                                        std::size_t generation) {
  if (individuals.empty()) throw std::invalid_argument("population needs n >= 1 individuals");
  const std::size_t dim = individuals.front().dim();
  std::vector<double> coords;
  coords.reserve(dim * individuals.size());
  for (const auto& ind : individuals) {
    if (ind.dim() != dim) throw std::invalid_argument("individuals differ in dimension");
    coords.insert(coords.end(), ind.coords.begin(), ind.coords.end());
  }
  return Population(dim, std::move(coords), generation);
}

Population Population::from_values(std::vector<double> values, std::size_t generation) {
  return Population(1, std::move(values), generation);
}

Individual Population::individual(std::size_t i) const {
  const auto row = (*this)[i];
  return Individual{{row.begin(), row.end()}};
}

Population Population::with_generation(std::size_t generation) const {
  Population copy = *this;
  copy.generation_ = generation;
  return copy;
}

Population project(const Population& pop, std::size_t m) {
  if (m < 1 || m > pop.size()) {
    throw std::invalid_argument("project: need 1 <= m <= n (m=" + std::to_string(m) +
                                ", n=" + std::to_string(pop.size()) + ")");
  }
  const auto& c = pop.coords();
  return Population(pop.dim(), std::vector<double>(c.begin(), c.begin() + m * pop.dim()),
                    pop.generation());
}

}  // namespace ipmlab
