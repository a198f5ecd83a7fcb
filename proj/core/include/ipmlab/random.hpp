#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ipmlab {

/// Philox4x32 with 10 rounds. Pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream addressed by a master seed and a hierarchical
/// derivation path.
///
/// Two streams with the same (seed, path) produce identical sequences. Child
/// streams are obtained with derive(); drawing from a parent never affects its
/// children, so draws can be assigned to replicates, generations and
/// individuals in any order (or concurrently) without changing results.
///
/// Satisfies UniformRandomBitGenerator, but the library only uses the
/// distribution helpers below, which are implemented here so that output is
/// identical across standard library implementations.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path = {});

  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  /// Fresh stream with path = path() ++ [child_index]; counter reset.
  RandomStream derive(std::uint64_t child_index) const;

  std::uint64_t next_u64() noexcept;
  result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one normal per two uniforms).
  double normal() noexcept;
  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n) noexcept;
  bool bernoulli(double p = 0.5) noexcept { return uniform() < p; }

  friend bool operator==(const RandomStream& a, const RandomStream& b) noexcept {
    return a.seed_ == b.seed_ && a.path_ == b.path_ && a.counter_ == b.counter_ &&
           a.buffered_ == b.buffered_;
  }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Convenience for derive(derive(...)).
RandomStream derive_path(const RandomStream& parent, std::span<const std::uint64_t> indices);

}  // namespace ipmlab

namespace ipmlab {

inline RandomStream derive_stream(const RandomStream& parent, std::uint64_t child_index) {
  return parent.derive(child_index);
}

}  // namespace ipmlab

namespace ipmlab {

/// Role codes appended to a (replicate, generation) stream path. The numeric
/// values are part of the reproducibility contract and must not change.
enum class StreamRole : std::uint64_t {
  selection = 0,
  mutation = 1,
  recombination = 2,
  init = 3,
  ipm = 4,
};

inline RandomStream derive_stream(const RandomStream& parent, StreamRole role) {
  return parent.derive(static_cast<std::uint64_t>(role));
}

}  // namespace ipmlab

namespace ipmlab {

/// Stream for (replicate, generation, role) under root: path
/// root.path() ++ [replicate, generation, role]. Operators applied to the
/// population of generation k of replicate r receive
/// root.derive(r).derive(k) and append their own role code.
inline RandomStream seed_plan(const RandomStream& root, std::uint64_t replicate,
                              std::uint64_t generation, StreamRole role) {
  const std::uint64_t tail[] = {replicate, generation, static_cast<std::uint64_t>(role)};
  return derive_path(root, tail);
}

}  // namespace ipmlab
