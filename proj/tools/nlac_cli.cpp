// Scenario runner: `nlac-cli run|list|export`.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nlac/runner.hpp"
#include "nlac/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

nlac::ScenarioConfig resolve(const std::string &target) {
  if (auto builtin = nlac::find_builtin(target))
    return *builtin;
  if (std::filesystem::is_regular_file(target))
    return nlac::load_config(target);
  throw nlac::ConfigError("'" + target + "' is neither a config file nor a built-in scenario (did you mean '" +
                          nlac::suggest_builtin(target) + "'?)");
}

std::filesystem::path output_dir(const nlac::ScenarioConfig &cfg, const std::string &flag) {
  if (!flag.empty())
    return flag;
  if (!cfg.output_dir.empty())
    return cfg.output_dir;
  if (const char *env = std::getenv("NLAC_OUTPUT_DIR"); env && *env)
    return std::filesystem::path(env) / cfg.name;
  return std::filesystem::path("nlac_out") / cfg.name;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Two-photon aberration cancellation simulator"};
  app.require_subcommand(1);

  std::string target, out_flag;
  std::uint64_t seed = 0;
  std::size_t grid = 0;
  bool noiseless = false;
  auto *run = app.add_subcommand("run", "run a config file or built-in scenario");
  run->add_option("scenario", target, "config path or built-in name")->required();
  auto *out_opt = run->add_option("--out", out_flag, "output directory");
  auto *seed_opt = run->add_option("--seed", seed, "seed for detector noise and Monte Carlo errors");
  auto *grid_opt = run->add_option("--grid", grid, "grid points per axis (power of two)");
  run->add_flag("--noiseless", noiseless, "use expected counts instead of Poisson draws");
  (void)out_opt;

  auto *list = app.add_subcommand("list", "list built-in scenarios");

  std::string export_name, export_path;
  auto *exp = app.add_subcommand("export", "write a built-in scenario as a config file");
  exp->add_option("builtin", export_name)->required();
  exp->add_option("path", export_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto &b : nlac::builtin_scenarios())
        std::cout << b.name << "  " << b.description << '\n';
      return 0;
    }
    if (*exp) {
      const auto cfg = nlac::find_builtin(export_name);
      if (!cfg)
        throw nlac::ConfigError("unknown built-in scenario '" + export_name + "' (did you mean '" +
                                nlac::suggest_builtin(export_name) + "'?)");
      const std::filesystem::path path(export_path);
      if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
      nlac::write_text(path, nlac::to_config_text(*cfg));
      return 0;
    }

    auto cfg = resolve(target);
    if (*seed_opt) {
      cfg.scan.seed = seed;
      cfg.analysis.seed = seed;
    }
    if (*grid_opt)
      cfg.grid.points = grid;
    if (noiseless)
      cfg.scan.noise = nlac::NoiseModel::Noiseless;
    try {
      cfg.validate();
    } catch (const nlac::InvalidParameter &e) {
      throw nlac::ConfigError(e.what());
    }
    const auto dir = output_dir(cfg, out_flag);
    for (const auto &f : nlac::run_scenario(cfg, dir))
      std::cout << (dir / f).string() << '\n';
    return 0;
  } catch (const nlac::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlac::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
