// Command-line front end: one subcommand per scenario kind.
//
//   aoigame convergence --out-dir results/conv
//   aoigame churn --config configs/churn.conf --reinit-kappa
//   aoigame sweep_poa_vs_n --out-dir results/poa
//
// Exit status: 0 when every cross-check passes, 1 when a check fails,
// 2 on configuration or runtime errors.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "aoigame/aoigame.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw aoigame::ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Built-in configuration for a scenario run without --config.
std::string default_config_text(aoigame::ScenarioKind kind) {
  std::string text = "[scenario]\nkind = " + std::string(aoigame::to_string(kind)) + "\n";
  if (kind == aoigame::ScenarioKind::churn) text += "n = 3\nframes = 120\n\n[churn]\njoin = 20 7\nleave = 80 7\n";
  return text;
}

struct Overrides {
  std::string config_path;
  std::string out_dir = "results";
  std::uint64_t seed = 0;
  std::size_t frames = 0;
  std::size_t frame_length = 0;
  std::size_t n = 0;
  std::string mode;
  bool reinit_kappa = false;
};

int run(aoigame::ScenarioKind kind, const Overrides& o) {
  using namespace aoigame;
  ExperimentConfig cfg = parse_config(o.config_path.empty() ? default_config_text(kind) : read_file(o.config_path));
  if (cfg.scenario.kind != kind)
    throw ConfigError("config file describes scenario '" + std::string(to_string(cfg.scenario.kind)) +
                      "' but subcommand '" + std::string(to_string(kind)) + "' was given");
  if (o.seed) cfg.seed = o.seed;
  if (o.frames) cfg.scenario.frames = o.frames;
  if (o.frame_length) cfg.frame_length = o.frame_length;
  if (o.n) cfg.scenario.n = o.n;
  if (o.mode == "stochastic") cfg.mode = LearningMode::stochastic;
  if (o.mode == "expected") cfg.mode = LearningMode::expected;
  if (o.reinit_kappa) cfg.schedule.reinit_on_churn = true;
  cfg.validate();

  ScenarioReport report = run_scenario(cfg, o.out_dir);
  for (const auto& t : report.tables) std::cout << "wrote " << t.string() << "\n";
  std::cout << "wrote " << report.manifest.string() << "\n";
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "[ok]   " : "[FAIL] ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information transmission game: learning simulator and equilibrium solver"};
  app.require_subcommand(1);

  Overrides o;
  aoigame::ScenarioKind chosen = aoigame::ScenarioKind::convergence;
  for (const auto& [name, kind] : aoigame::scenario_kinds()) {
    auto* sub = app.add_subcommand(std::string(name), "run the " + std::string(name) + " scenario");
    sub->add_option("--config", o.config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out-dir", o.out_dir, "directory for tables and manifest")->capture_default_str();
    sub->add_option("--seed", o.seed, "override the seed");
    sub->add_option("--frames", o.frames, "override the frame count");
    sub->add_option("--frame-length", o.frame_length, "override the slots per frame");
    sub->add_option("--n", o.n, "override the initial roster size");
    sub->add_option("--mode", o.mode, "learning mode")->check(CLI::IsMember({"stochastic", "expected"}));
    sub->add_flag("--reinit-kappa", o.reinit_kappa, "restart learning-rate clocks when the roster changes");
    sub->callback([&chosen, kind = kind] { chosen = kind; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return run(chosen, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
