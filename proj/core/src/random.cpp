#include "ipmlab/random.hpp"

#include <cmath>
#include <numbers>

namespace ipmlab {
namespace {

__extension__ using uint128 = unsigned __int128;

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::array<std::uint32_t, 2> derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
  std::uint64_t k = mix64(seed ^ 0x6A09E667F3BCC908ull);
  for (std::uint64_t element : path) {
    k = mix64(k ^ mix64(element + 0x9E3779B97F4A7C15ull));
  }
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path)
    : seed_(seed), path_(std::move(path)), key_(derive_key(seed_, path_)) {}

RandomStream RandomStream::derive(std::uint64_t child_index) const {
  std::vector<std::uint64_t> child_path;
  child_path.reserve(path_.size() + 1);
  child_path.assign(path_.begin(), path_.end());
  child_path.push_back(child_index);
  return RandomStream(seed_, std::move(child_path));
}

void RandomStream::refill() noexcept {
  const auto block = philox4x32_10(
      {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u},
      key_);
  ++counter_;
  buffer_[0] = (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
  buffer_[1] = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
  buffered_ = 2;
}

std::uint64_t RandomStream::next_u64() noexcept {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

double RandomStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomStream::index(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  uint128 m = static_cast<uint128>(next_u64()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<uint128>(next_u64()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

RandomStream derive_path(const RandomStream& parent, std::span<const std::uint64_t> indices) {
  std::vector<std::uint64_t> path = parent.path();
  path.insert(path.end(), indices.begin(), indices.end());
  return RandomStream(parent.seed(), std::move(path));
}

}  // namespace ipmlab
