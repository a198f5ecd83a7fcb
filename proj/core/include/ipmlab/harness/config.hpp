#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipmlab/init_law.hpp"
#include "ipmlab/kernel.hpp"
#include "ipmlab/objective.hpp"
#include "ipmlab/operators.hpp"
#include "ipmlab/types.hpp"

namespace ipmlab::harness {

enum class ExperimentKind { simulate, ipm, compare, counterexample, sweep };

std::string_view kind_name(ExperimentKind kind) noexcept;
/// Throws ConfigError (key "kind") for unknown names.
ExperimentKind kind_from_name(std::string_view name);

struct ObjectiveConfig {
  std::string name = "gaussian_bump";
  double value = 1.0;      // constant
  double floor = 0.1;      // gaussian_bump, rastrigin_floor
  double amplitude = 1.0;  // gaussian_bump
  double center = 1.0;     // gaussian_bump
  double width = 2.0;      // gaussian_bump
  Interval domain{-10.0, 10.0};
};

struct KernelConfig {
  std::string name = "gaussian";
  double sigma = 0.5;       // gaussian
  double half_width = 0.5;  // uniform_box
};

struct Thresholds {
  double ks_same_law = 0.03;
  double ks_final = 0.05;
  double exchangeability = 0.02;
  double gap_multiple = 3.0;
};

struct CompareConfig {
  std::size_t k = 0;
  /// 0 selects the largest entry of sizes.
  std::size_t n = 0;
};

struct LlnConfig {
  double g_min = 1.0;
  double g_max = 2.0;
  std::size_t N = 1000;
  std::size_t replicates = 10000;
  /// Unset means the defaults (g_max - g_min)/8 and (g_max - g_min)/4.
  std::optional<double> z_half_width;
  std::optional<double> y_half_width;
};

struct GapConfig {
  std::vector<double> centers{-2.0, 2.0};
  std::vector<double> weights{0.5, 0.5};
  double within_sd = 0.5;
  std::size_t N = 256;
  std::size_t replicates = 10000;
  std::size_t points = 25;
  double x_lo = -4.0;
  double x_hi = 4.0;
  std::vector<std::size_t> eta_sizes{16, 64, 256, 512};
  std::size_t eta_replicates = 10000;
};

/// Validated experiment description. See README for the file syntax.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::simulate;
  std::size_t dimension = 1;
  ObjectiveConfig objective;
  KernelConfig kernel;
  std::string recombination = "mean";
  std::vector<std::string> stack{"selection", "mutation"};
  InitLaw init = GaussianLaw{0.0, 1.0};
  std::size_t generations = 0;
  std::vector<std::size_t> sizes{2, 8, 32, 128};
  std::size_t replicates = 1000;
  std::size_t particles = 100000;
  std::size_t grid_bins = 2048;
  std::string ipm_method = "grid";
  std::size_t tv_bins = 64;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  Thresholds thresholds;
  CompareConfig compare;
  LlnConfig lln;
  GapConfig gap;
};

/// Throws ConfigError with the offending key path.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(std::string_view text);

/// Every field, defaults included, as sorted-key JSON.
std::string canonical_json(const ExperimentConfig& config, int indent = -1);
/// FNV-1a 64 of canonical_json with output_dir removed.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

Objective build_objective(const ExperimentConfig& config);
MutationKernel build_kernel(const KernelConfig& kernel);
operators::RecombinationLaw build_recombination(const ExperimentConfig& config);
operators::OperatorStack build_stack(const ExperimentConfig& config);

}  // namespace ipmlab::harness
