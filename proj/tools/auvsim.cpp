// auvsim: run, validate and replay missions.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "auv/runner.hpp"

namespace {

void print_findings(const std::vector<auv::Finding>& findings) {
  for (const auto& f : findings) std::cerr << f.path << ": " << f.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AUV frontseat/backseat mission simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string transport;
  std::string log_dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a mission and write logs");
  run->add_option("config", config_path, "Run configuration (JSON)")->required();
  run->add_option("--seed", seed, "Override the RNG seed");
  run->add_option("--transport", transport, "inprocess or tcp")->check(CLI::IsMember({"inprocess", "tcp"}));
  run->add_option("--log-dir", log_dir, "Output directory (overrides the config)");
  run->add_flag("-q,--quiet", quiet, "Do not print the report");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a run configuration and list findings");
  validate->add_option("config", validate_path, "Run configuration (JSON)")->required();

  std::string replay_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "Recompute the report from run logs");
  replay->add_option("log", replay_path, "Run directory or log.tsv")->required();
  replay->add_option("--out", replay_out, "Also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : auv::kExitConfig;
  }

  if (*validate) {
    const auto loaded = auv::load_run(validate_path);
    if (loaded.findings.empty()) {
      std::cout << "ok: 0 findings\n";
      return 0;
    }
    print_findings(loaded.findings);
    std::cout << loaded.findings.size() << " finding(s)\n";
    return auv::kExitConfig;
  }

  if (*replay) {
    try {
      const auto report = auv::replay(replay_path);
      const std::string text = auv::report_json(report);
      std::cout << text;
      if (!replay_out.empty()) {
        std::ofstream os(replay_out, std::ios::binary);
        os << text;
      }
      return report.exit_code;
    } catch (const std::exception& e) {
      std::cerr << "replay: " << e.what() << "\n";
      return auv::kExitConfig;
    }
  }

  auto loaded = auv::load_run(config_path);
  if (!loaded.run) {
    print_findings(loaded.findings);
    return auv::kExitConfig;
  }
  auv::LoadedRun cfg = *loaded.run;
  if (seed) cfg.run.seed = *seed;
  if (transport == "tcp") cfg.run.transport = auv::Transport::kTcp;
  else if (transport == "inprocess") cfg.run.transport = auv::Transport::kInProcess;
  if (!log_dir.empty()) cfg.run.log_dir = log_dir;

  try {
    const auto artifacts = auv::execute(cfg);
    auv::write_artifacts(artifacts, cfg.run.log_dir);
    if (!quiet) std::cout << artifacts.report_json;
    std::cerr << "logs: " << cfg.run.log_dir << " (" << artifacts.wall_seconds << " s wall)\n";
    return artifacts.report.exit_code;
  } catch (const auv::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return auv::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return auv::kExitFault;
  }
}
