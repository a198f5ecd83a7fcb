#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ipmlab/kernel.hpp"
#include "ipmlab/objective.hpp"
#include "ipmlab/random.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab::operators {

/// Law of the random coefficient matrices (U_1, ..., U_k) of k-ary
/// recombination: offspring = sum_i U_i y_i over k parents y_i.
class RecombinationLaw {
 public:
  /// k = 2, U_1 = U_2 = I / 2.
  static RecombinationLaw mean_crossover();
  /// k = 2, U_1 = Diag(s_1..s_d) with i.i.d. fair bits s_j, U_2 = I - U_1.
  static RecombinationLaw uniform_crossover();
  /// Deterministic matrices, each dim x dim row-major; k = matrices.size() >= 2.
  static RecombinationLaw fixed(std::vector<std::vector<double>> matrices, std::size_t dim);

  std::size_t arity() const noexcept { return arity_; }
  std::string_view name() const noexcept;
  /// Fixed laws only work in the dimension they were declared for.
  bool supports_dim(std::size_t dim) const noexcept;
  /// True when sum_i U_i = I almost surely.
  bool preserves_consensus() const;

  /// Draws (U_1..U_k) for dimension dim as k consecutive dim x dim row-major blocks.
  std::vector<double> sample_coefficients(std::size_t dim, RandomStream& rng) const;

 private:
  enum class Preset { mean, uniform, fixed };
  RecombinationLaw(Preset preset, std::size_t arity) : preset_(preset), arity_(arity) {}

  Preset preset_;
  std::size_t arity_;
  std::size_t fixed_dim_ = 0;
  std::vector<double> fixed_blocks_;
};

struct Selection {};
struct Mutation {
  MutationKernel kernel;
};
struct Recombination {
  RecombinationLaw law;
};
using OperatorDescriptor = std::variant<Selection, Mutation, Recombination>;

StreamRole role_of(const OperatorDescriptor& op) noexcept;
std::string_view operator_name(const OperatorDescriptor& op) noexcept;

/// Ordered, nonempty list of operators applied left to right once per generation.
class OperatorStack {
 public:
  explicit OperatorStack(std::vector<OperatorDescriptor> ops);

  const std::vector<OperatorDescriptor>& ops() const noexcept { return ops_; }
  std::size_t size() const noexcept { return ops_.size(); }
  bool has_recombination() const noexcept;

 private:
  std::vector<OperatorDescriptor> ops_;
};

/// Proportionate selection probabilities g(x_j) / sum_l g(x_l).
std::vector<double> selection_distribution(const Population& pop, const Objective& obj);
std::vector<double> selection_distribution(std::span<const double> fitness);

/// n draws with replacement using the selection distribution, one derived
/// stream per output slot. Generation unchanged.
Population proportionate_selection(const Population& pop, const Objective& obj,
                                   const RandomStream& rng);
/// Same, with fitness already evaluated.
Population proportionate_selection(const Population& pop, std::span<const double> fitness,
                                   const RandomStream& rng);

/// Output slot i is a draw from kernel(. | pop[i]) using stream rng.derive(i).
/// Generation + 1.
Population mutate(const Population& pop, const MutationKernel& kernel, const RandomStream& rng);

/// count * k parent indices, uniform on [0, n) with replacement; group g uses
/// stream rng.derive(g).
std::vector<std::size_t> sample_parent_indices(std::size_t n, std::size_t k, std::size_t count,
                                               const RandomStream& rng);
/// The parents themselves, group-major.
Population sample_parents(const Population& pop, std::size_t k, std::size_t count,
                          const RandomStream& rng);

/// sum_i U_i y_i for one draw of the coefficient matrices.
Individual combine_offspring(const Population& parents, const RecombinationLaw& law,
                             RandomStream rng);

/// n offspring, each from an independent parent group (stream
/// rng.derive(i).derive(0)) and coefficient draw (rng.derive(i).derive(1)).
/// Generation + 1.
Population recombine(const Population& pop, const RecombinationLaw& law, const RandomStream& rng);

/// One generation of the simple EA: selection then mutation. Identical
/// (bit for bit) to apply_stack with [Selection, Mutation{kernel}].
Population simple_ea_step(const Population& pop, const Objective& obj,
                          const MutationKernel& kernel, const RandomStream& rng);

/// Applies the stack left to right. Operator at position p draws from
/// rng.derive(role).derive(p). Result generation = pop.generation() + 1.
Population apply_stack(const Population& pop, const OperatorStack& stack, const Objective& obj,
                       const RandomStream& rng);

/// Probability that k*i parents drawn uniformly with replacement from m are
/// pairwise distinct: m (m-1) ... (m-k i+1) / m^(k i); 0 when k i > m.
double distinct_parent_probability(std::size_t m, std::size_t k, std::size_t i);

}  // namespace ipmlab::operators
