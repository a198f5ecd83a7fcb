#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "ipmlab/random.hpp"

namespace ipmlab::harness {

struct RoleEntry {
  StreamRole role;
  std::string_view name;
};

/// Role codes used in stream paths. The codes are part of the output
/// contract: changing them changes every result file.
std::span<const RoleEntry> role_table() noexcept;

/// "role,code" lines, header first.
std::string role_table_csv();

/// Stream at path [replicate, generation, role] under the master seed.
RandomStream seed_plan(std::uint64_t master_seed, std::uint64_t replicate,
                       std::uint64_t generation, StreamRole role);

}  // namespace ipmlab::harness
