#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipmlab/diagnostics.hpp"
#include "ipmlab/harness/config.hpp"

namespace ipmlab::harness {

std::string_view tool_version() noexcept;

struct RunOptions {
  /// Worker threads for replicate loops; 0 means all cores.
  unsigned jobs = 0;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed_override;
};

struct EmittedFile {
  std::string path;  // relative to the output directory
  std::size_t rows = 0;
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::string started_at;
  std::string finished_at;
  std::filesystem::path output_dir;
  std::vector<EmittedFile> files;
};

/// Applies CLI overrides to a parsed config (seed override changes the hash).
ExperimentConfig with_overrides(ExperimentConfig config, const RunOptions& options);

/// Runs the experiment, writes its files and manifest.json into the output
/// directory. Module argument errors surface as ConfigError, numerical
/// failures as NumericalError, both prefixed with the experiment kind.
RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// IPM states 0..K for the configured stack and init (grid or particle).
diagnostics::IpmReference build_reference(const ExperimentConfig& config, unsigned jobs = 1);

}  // namespace ipmlab::harness
