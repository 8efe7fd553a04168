// pourlab command-line front end.
//
//   pourlab train    --index I [--seed N]     train one grid cell
//   pourlab sweep                             train, evaluate, classify, report
//   pourlab eval     --policy FILE [--episodes K] [--seed N]
//   pourlab classify [--overrides FILE]
//   pourlab report
//
// Config resolution: built-in defaults, then --config, then --ci, then flags.
// Exit codes: 0 success, 2 usage, 3 config, 4 runtime.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pourlab/config.hpp"
#include "pourlab/error.hpp"
#include "pourlab/harness.hpp"
#include "pourlab/manifest.hpp"
#include "pourlab/reward.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

struct GlobalFlags {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool ci = false;
};

pourlab::harness::SweepConfig resolve(const GlobalFlags& flags, std::string& file_hash) {
  using namespace pourlab::harness;
  SweepConfig config = default_config();
  if (!flags.config_path.empty()) {
    load_config(flags.config_path, config);
    file_hash = sha256_file(flags.config_path);
  }
  if (flags.ci) apply_ci_profile(config);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.workers) config.workers = *flags.workers;
  if (!flags.out.empty()) config.output_dir = flags.out;
  validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  namespace h = pourlab::harness;
  CLI::App app{"Reward-mutation skill discovery on a planar pouring task"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--seed", flags.seed, "Base seed");
  app.add_option("--workers", flags.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--ci", flags.ci, "Use the small CI budget profile");

  int index = -1;
  auto* train = app.add_subcommand("train", "Train one grid cell");
  train->add_option("--index", index, "Grid cell index")->required();

  auto* sweep = app.add_subcommand("sweep", "Run the full grid sweep");

  std::string policy_path;
  int episodes = 10;
  int eval_index = -1;
  auto* eval = app.add_subcommand("eval", "Evaluate a policy artifact");
  eval->add_option("--policy", policy_path, "Policy artifact")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--index", eval_index, "Grid cell index recorded in the feature rows");

  std::string overrides;
  auto* classify = app.add_subcommand("classify", "Label evaluations from features.csv");
  classify->add_option("--overrides", overrides, "Label-override file")->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "Write summary.csv and grid.svg from labels.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    std::string file_hash;
    const h::SweepConfig config = resolve(flags, file_hash);
    const std::filesystem::path out = config.output_dir;

    if (*train) {
      const std::uint64_t seed = config.seed;
      const auto paths = h::cmd_train(config, index, seed, out, file_hash);
      std::cout << "policy " << paths.policy.string() << "\ncurve " << paths.curve.string() << '\n';
    } else if (*sweep) {
      h::SweepOptions options;
      options.config_file_sha256 = file_hash;
      const auto result = h::cmd_sweep(config, out, options);
      std::cout << "trained " << result.trained << ", reused " << result.skipped << ", "
                << result.labels.size() << " evaluations labelled\n"
                << "results in " << out.string() << '\n';
    } else if (*eval) {
      const std::uint64_t seed = flags.seed ? *flags.seed : config.seed;
      const auto rows = h::cmd_eval(config, policy_path, episodes, seed, out, eval_index);
      std::cout << rows.size() << " episodes appended to " << (out / "features.csv").string() << '\n';
    } else if (*classify) {
      std::optional<std::filesystem::path> table;
      if (!overrides.empty()) table = overrides;
      const auto labels = h::cmd_classify(config, out, table);
      std::cout << labels.size() << " labels written to " << (out / "labels.csv").string() << '\n';
    } else if (*report) {
      h::cmd_report(out);
      std::cout << "wrote " << (out / "summary.csv").string() << " and "
                << (out / "grid.svg").string() << '\n';
    }
    return 0;
  } catch (const pourlab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pourlab::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
