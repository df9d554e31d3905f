#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epilab/epilab.hpp"

namespace {

std::filesystem::path default_out(const std::string& leaf) {
  if (const char* env = std::getenv("EPILAB_OUTPUT_DIR"); env && *env) return std::filesystem::path(env) / leaf;
  return std::filesystem::path("epilab-out") / leaf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epilab: random closed sets, epi-convergence and argmin consistency on lattices"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run one experiment config; exit 0 pass, 1 fail, 2 hypothesis not met, 3 config error");
  run->add_option("config", config_path, "config file")->required();

  auto* list = app.add_subcommand("list", "list the scenario library");

  std::uint64_t seed = epilab::kDefaultVerifySeed;
  std::string out_dir;
  std::vector<int> only;
  std::string broken;
  auto* verify = app.add_subcommand("verify-all", "run the acceptance suite and write report.json");
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--out", out_dir, "output directory");
  verify->add_option("--criteria", only, "run only these criteria")->delimiter(',');
  verify->add_option("--inject-fault", broken, "replace a scenario's sampler by a broken one")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(epilab::ExitCode::config_error);
  }

  if (*run) {
    const auto outcome = epilab::run_config_file(config_path);
    if (outcome.code == epilab::ExitCode::config_error) {
      std::cerr << "config error: " << outcome.message << "\n";
    } else {
      std::cout << epilab::summary_text(outcome.report);
      std::cout << "artifacts: " << outcome.dir.string() << "\n";
    }
    return static_cast<int>(outcome.code);
  }

  if (*list) {
    std::cout << epilab::list_scenarios();
    return 0;
  }

  epilab::VerifyOptions opt;
  opt.seed = seed;
  if (!broken.empty()) opt.library = epilab::with_broken_sampler(epilab::default_library(), broken);
  const auto report = epilab::verify_all(opt, only);
  const std::filesystem::path dir = out_dir.empty() ? default_out("verify-all") : std::filesystem::path(out_dir);
  epilab::write_verify_report(report, dir);
  std::cout << epilab::verify_lines(report);
  std::cout << "report: " << (dir / "report.json").string() << "\n";
  return report.all_pass() ? 0 : 1;
}
