#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "resolv/experiment.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw resolv::Error("cannot write " + path.string());
  out << body;
}

void emit(const nlohmann::json& report, const std::string& out_dir,
          const std::string& filename) {
  const std::string body = report.dump(2) + "\n";
  if (out_dir.empty()) {
    std::cout << body;
  } else {
    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / filename, body);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized-MLE risk bound certificates over discretized "
               "parameter spaces, with Monte Carlo verification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int trials = 1000;
  int budget_seconds = -1;

  CLI::App* certify = app.add_subcommand(
      "certify", "Compute risk-bound certificates for a configuration");
  certify->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  certify->add_option("--out", out_dir, "output directory");
  certify->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });

  CLI::App* mc = app.add_subcommand(
      "mc-risk", "Monte Carlo risk estimation against the certificates");
  mc->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  mc->add_option("--out", out_dir, "output directory");
  mc->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  mc->add_option("--budget-seconds", budget_seconds,
                 "wall-clock budget; partial output and exit 3 beyond it");

  CLI::App* lemmas = app.add_subcommand(
      "verify-lemmas", "Randomized oracle checks of every supporting bound");
  lemmas->add_option("--seed", seed, "suite seed")
      ->each([&](const std::string&) { seed_given = true; });
  lemmas->add_option("--trials", trials, "trials per check (default 1000)");
  lemmas->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (certify->parsed()) {
      resolv::ExperimentConfig config =
          resolv::ExperimentConfig::load(config_path);
      if (seed_given) config.seed = seed;
      emit(resolv::run_certify(config), out_dir, "certify.json");
      return 0;
    }
    if (mc->parsed()) {
      resolv::ExperimentConfig config =
          resolv::ExperimentConfig::load(config_path);
      if (seed_given) config.seed = seed;
      const resolv::McRiskResult result =
          resolv::run_mc_risk(config, budget_seconds);
      if (out_dir.empty()) {
        std::cout << result.csv;
        std::cout << result.report.dump(2) << "\n";
      } else {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "mc_risk.csv", result.csv);
        write_file(std::filesystem::path(out_dir) / "mc_risk.json",
                   result.report.dump(2) + "\n");
      }
      return result.exit_code;
    }
    if (lemmas->parsed()) {
      const resolv::LemmaRunResult result =
          resolv::run_verify_lemmas(seed_given ? seed : 20250810ULL, trials);
      emit(result.report, out_dir, "lemmas.json");
      return result.exit_code;
    }
  } catch (const resolv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const resolv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
