#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ipmlab/errors.hpp"
#include "ipmlab/harness/config.hpp"
#include "ipmlab/harness/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace ipmlab;

  CLI::App app{"ipm-lab: finite-population EA runs against infinite-population models"};
  app.set_version_flag("--version", std::string(harness::tool_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned jobs = 0;
  std::uint64_t seed_override = 0;

  for (const char* name : {"simulate", "ipm", "compare", "counterexample", "sweep"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--jobs", jobs, "worker threads, 0 = all cores")->default_val(0);
    sub->add_option("--seed-override", seed_override, "replace the master seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  harness::RunOptions options;
  options.jobs = jobs;
  if (!out_dir.empty()) options.output_dir = out_dir;
  if (sub->count("--seed-override") > 0) options.seed_override = seed_override;

  try {
    auto config = harness::parse_config(config_path);
    config.kind = harness::kind_from_name(sub->get_name());
    const auto manifest = harness::run_experiment(config, options);
    for (const auto& f : manifest.files) {
      std::cout << (manifest.output_dir / f.path).string() << ": " << f.rows << " rows\n";
    }
    std::cout << "config " << manifest.config_hash << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
