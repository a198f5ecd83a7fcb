#include "ipmlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ipmlab/errors.hpp"

namespace ipmlab::operators {

RecombinationLaw RecombinationLaw::mean_crossover() { return {Preset::mean, 2}; }

RecombinationLaw RecombinationLaw::uniform_crossover() { return {Preset::uniform, 2}; }

RecombinationLaw RecombinationLaw::fixed(std::vector<std::vector<double>> matrices,
                                         std::size_t dim) {
  if (matrices.size() < 2) throw std::invalid_argument("fixed recombination needs k >= 2 matrices");
  if (dim == 0) throw std::invalid_argument("fixed recombination needs d >= 1");
  RecombinationLaw law(Preset::fixed, matrices.size());
  law.fixed_dim_ = dim;
  for (const auto& m : matrices) {
    if (m.size() != dim * dim) {
      throw std::invalid_argument("fixed recombination matrix must have d*d entries");
    }
    for (double v : m) {
      if (!std::isfinite(v)) throw std::invalid_argument("fixed recombination matrix not finite");
    }
    law.fixed_blocks_.insert(law.fixed_blocks_.end(), m.begin(), m.end());
  }
  return law;
}

std::string_view RecombinationLaw::name() const noexcept {
  switch (preset_) {
    case Preset::mean: return "mean";
    case Preset::uniform: return "uniform";
    case Preset::fixed: return "fixed";
  }
  return "unknown";
}

bool RecombinationLaw::supports_dim(std::size_t dim) const noexcept {
  return dim >= 1 && (preset_ != Preset::fixed || dim == fixed_dim_);
}

bool RecombinationLaw::preserves_consensus() const {
  if (preset_ != Preset::fixed) return true;
  const std::size_t d = fixed_dim_;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      double sum = 0.0;
      for (std::size_t l = 0; l < arity_; ++l) sum += fixed_blocks_[l * d * d + r * d + c];
      if (std::abs(sum - (r == c ? 1.0 : 0.0)) > 1e-12) return false;
    }
  }
  return true;
}

std::vector<double> RecombinationLaw::sample_coefficients(std::size_t dim,
                                                          RandomStream& rng) const {
  if (!supports_dim(dim)) {
    throw std::invalid_argument("recombination law '" + std::string(name()) +
                                "' does not support dimension " + std::to_string(dim));
  }
  const std::size_t block = dim * dim;
  std::vector<double> u(arity_ * block, 0.0);
  switch (preset_) {
    case Preset::mean:
      for (std::size_t j = 0; j < dim; ++j) {
        u[j * dim + j] = 0.5;
        u[block + j * dim + j] = 0.5;
      }
      break;
    case Preset::uniform:
      for (std::size_t j = 0; j < dim; ++j) {
        const double s = rng.bernoulli() ? 1.0 : 0.0;
        u[j * dim + j] = s;
        u[block + j * dim + j] = 1.0 - s;
      }
      break;
    case Preset::fixed:
      u = fixed_blocks_;
      break;
  }
  return u;
}

StreamRole role_of(const OperatorDescriptor& op) noexcept {
  switch (op.index()) {
    case 0: return StreamRole::selection;
    case 1: return StreamRole::mutation;
    default: return StreamRole::recombination;
  }
}

std::string_view operator_name(const OperatorDescriptor& op) noexcept {
  switch (op.index()) {
    case 0: return "selection";
    case 1: return "mutation";
    default: return "recombination";
  }
}

OperatorStack::OperatorStack(std::vector<OperatorDescriptor> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw std::invalid_argument("operator stack must be nonempty");
}

bool OperatorStack::has_recombination() const noexcept {
  return std::any_of(ops_.begin(), ops_.end(), [](const auto& op) {
    return std::holds_alternative<Recombination>(op);
  });
}

std::vector<double> selection_distribution(std::span<const double> fitness) {
  if (fitness.empty()) throw std::invalid_argument("selection needs n >= 1");
  const double total = std::accumulate(fitness.begin(), fitness.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("selection: total fitness must be positive and finite");
  }
  std::vector<double> p(fitness.size());
  std::transform(fitness.begin(), fitness.end(), p.begin(), [total](double g) { return g / total; });
  return p;
}

std::vector<double> selection_distribution(const Population& pop, const Objective& obj) {
  return selection_distribution(evaluate_fitness(pop, obj));
}

Population proportionate_selection(const Population& pop, std::span<const double> fitness,
                                   const RandomStream& rng) {
  const std::size_t n = pop.size();
  if (fitness.size() != n) throw std::invalid_argument("selection: fitness length mismatch");
  std::vector<double> cumulative(n);
  std::partial_sum(fitness.begin(), fitness.end(), cumulative.begin());
  const double total = cumulative.back();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("selection: total fitness must be positive and finite");
  }
  const std::size_t d = pop.dim();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream slot = rng.derive(i);
    const double u = slot.uniform() * total;
    // first j with u < cumulative[j]
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto j = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), n - 1);
    const auto src = pop[j];
    std::copy(src.begin(), src.end(), out.begin() + i * d);
  }
  return Population(d, std::move(out), pop.generation());
}

Population proportionate_selection(const Population& pop, const Objective& obj,
                                   const RandomStream& rng) {
  const auto fitness = evaluate_fitness(pop, obj);
  return proportionate_selection(pop, fitness, rng);
}

Population mutate(const Population& pop, const MutationKernel& kernel, const RandomStream& rng) {
  const std::size_t n = pop.size();
  const std::size_t d = pop.dim();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream slot = rng.derive(i);
    kernel.sample(pop[i], slot, std::span<double>(out.data() + i * d, d));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      throw NumericalError("mutation produced a non-finite coordinate for individual " +
                           std::to_string(i / d));
    }
  }
  return Population(d, std::move(out), pop.generation() + 1);
}

std::vector<std::size_t> sample_parent_indices(std::size_t n, std::size_t k, std::size_t count,
                                               const RandomStream& rng) {
  if (n == 0) throw std::invalid_argument("parent sampling needs n >= 1");
  std::vector<std::size_t> idx(count * k);
  for (std::size_t g = 0; g < count; ++g) {
    RandomStream group = rng.derive(g);
    for (std::size_t l = 0; l < k; ++l) idx[g * k + l] = group.index(n);
  }
  return idx;
}

Population sample_parents(const Population& pop, std::size_t k, std::size_t count,
                          const RandomStream& rng) {
  if (k == 0 || count == 0) throw std::invalid_argument("parent sampling needs k, count >= 1");
  const auto idx = sample_parent_indices(pop.size(), k, count, rng);
  const std::size_t d = pop.dim();
  std::vector<double> out;
  out.reserve(idx.size() * d);
  for (std::size_t j : idx) {
    const auto row = pop[j];
    out.insert(out.end(), row.begin(), row.end());
  }
  return Population(d, std::move(out), pop.generation());
}

namespace {

// out = sum_l U_l * parent_l
void combine_rows(const Population& pool, std::span<const std::size_t> parents,
                  std::span<const double> coefficients, std::span<double> out) {
  const std::size_t d = pool.dim();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t l = 0; l < parents.size(); ++l) {
    const auto y = pool[parents[l]];
    const double* u = coefficients.data() + l * d * d;
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += u[r * d + c] * y[c];
      out[r] += acc;
    }
  }
}

}  // namespace

Individual combine_offspring(const Population& parents, const RecombinationLaw& law,
                             RandomStream rng) {
  if (parents.size() != law.arity()) {
    throw std::invalid_argument("combine_offspring: expected " + std::to_string(law.arity()) +
                                " parents, got " + std::to_string(parents.size()));
  }
  const std::size_t d = parents.dim();
  const auto u = law.sample_coefficients(d, rng);
  std::vector<std::size_t> order(parents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Individual child{std::vector<double>(d)};
  combine_rows(parents, order, u, child.coords);
  return child;
}

Population recombine(const Population& pop, const RecombinationLaw& law, const RandomStream& rng) {
  const std::size_t n = pop.size();
  const std::size_t d = pop.dim();
  const std::size_t k = law.arity();
  if (!law.supports_dim(d)) {
    throw std::invalid_argument("recombination law '" + std::string(law.name()) +
                                "' does not support dimension " + std::to_string(d));
  }
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const RandomStream offspring = rng.derive(i);
    const auto parents = sample_parent_indices(n, k, 1, offspring.derive(0));
    RandomStream coeff_stream = offspring.derive(1);
    const auto u = law.sample_coefficients(d, coeff_stream);
    combine_rows(pop, parents, u, std::span<double>(out.data() + i * d, d));
  }
  return Population(d, std::move(out), pop.generation() + 1);
}

Population simple_ea_step(const Population& pop, const Objective& obj,
                          const MutationKernel& kernel, const RandomStream& rng) {
  const auto selected = proportionate_selection(
      pop, obj, derive_stream(rng, StreamRole::selection).derive(0));
  const auto mutated = mutate(selected, kernel, derive_stream(rng, StreamRole::mutation).derive(1));
  return mutated.with_generation(pop.generation() + 1);
}

Population apply_stack(const Population& pop, const OperatorStack& stack, const Objective& obj,
                       const RandomStream& rng) {
  Population current = pop;
  for (std::size_t p = 0; p < stack.size(); ++p) {
    const auto& op = stack.ops()[p];
    const RandomStream stream = derive_stream(rng, role_of(op)).derive(p);
    if (std::holds_alternative<Selection>(op)) {
      current = proportionate_selection(current, obj, stream);
    } else if (const auto* m = std::get_if<Mutation>(&op)) {
      current = mutate(current, m->kernel, stream);
    } else {
      current = recombine(current, std::get<Recombination>(op).law, stream);
    }
    // Intermediate populations keep the pre-increment index.
    current = current.with_generation(pop.generation());
  }
  return current.with_generation(pop.generation() + 1);
}

double distinct_parent_probability(std::size_t m, std::size_t k, std::size_t i) {
  if (m == 0 || k * i == 0) {
    throw std::invalid_argument("distinct_parent_probability needs m >= 1 and k*i >= 1");
  }
  const std::size_t draws = k * i;
  if (draws > m) return 0.0;
  // Exact integer ratio when both terms fit in a double mantissa.
  constexpr std::uint64_t kExact = std::uint64_t{1} << 53;
  std::uint64_t falling = 1;
  std::uint64_t power = 1;
  bool exact = true;
  for (std::size_t j = 0; j < draws && exact; ++j) {
    if (power > kExact / m) {
      exact = false;
      break;
    }
    falling *= (m - j);
    power *= m;
  }
  if (exact) return static_cast<double>(falling) / static_cast<double>(power);
  double p = 1.0;
  for (std::size_t j = 0; j < draws; ++j) {
    p *= static_cast<double>(m - j) / static_cast<double>(m);
  }
  return p;
}

}  // namespace ipmlab::operators
