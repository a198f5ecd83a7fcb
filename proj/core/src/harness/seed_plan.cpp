#include "ipmlab/harness/seed_plan.hpp"

#include <array>

namespace ipmlab::harness {

namespace {
constexpr std::array<RoleEntry, 5> kRoles{{{StreamRole::selection, "selection"},
                                           {StreamRole::mutation, "mutation"},
                                           {StreamRole::recombination, "recombination"},
                                           {StreamRole::init, "init"},
                                           {StreamRole::ipm, "ipm"}}};
}  // namespace

std::span<const RoleEntry> role_table() noexcept { return kRoles; }

std::string role_table_csv() {
  std::string out = "role,code\n";
  for (const auto& e : kRoles) {
    out += e.name;
    out += ',';
    out += std::to_string(static_cast<std::uint64_t>(e.role));
    out += '\n';
  }
  return out;
}

RandomStream seed_plan(std::uint64_t master_seed, std::uint64_t replicate,
                       std::uint64_t generation, StreamRole role) {
  return ipmlab::seed_plan(RandomStream(master_seed), replicate, generation, role);
}

}  // namespace ipmlab::harness
