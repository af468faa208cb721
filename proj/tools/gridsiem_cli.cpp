// gridsiem command-line entry point: run, replay, report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gridsiem/errors.hpp"
#include "gridsiem/runner.hpp"
#include "gridsiem/scenario.hpp"
#include "gridsiem/store.hpp"

namespace fs = std::filesystem;
using namespace gridsiem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitLog = 3;
constexpr int kExitOther = 1;

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid SIEM simulator: run scenarios, replay logs, render reports"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write events.log and report.json");
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_s;
  bool no_reaction = false;
  std::string out_dir = ".";
  std::string run_format = "human";
  run_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--duration", duration_s, "Override the duration in seconds");
  run_cmd->add_flag("--no-reaction", no_reaction, "Detect only; never apply reactions");
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--format", run_format, "Report printed to stdout")->check(CLI::IsMember({"human", "machine", "none"}));

  auto* replay_cmd = app.add_subcommand("replay", "Re-run detection over a stored event log");
  std::string log_path, rules_path, replay_format = "human";
  replay_cmd->add_option("--log", log_path, "Event log")->required();
  replay_cmd->add_option("--rules", rules_path, "Rules file (a scenario file works too)")->required();
  replay_cmd->add_option("--format", replay_format, "Output format")->check(CLI::IsMember({"human", "machine"}));

  auto* report_cmd = app.add_subcommand("report", "Render a stored report");
  std::string report_in, report_format = "human";
  report_cmd->add_option("--in", report_in, "report.json from a run")->required();
  report_cmd->add_option("--format", report_format, "Output format")
      ->check(CLI::IsMember({"human", "machine"}))
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      auto cfg = load_scenario(scenario_path);
      RunOptions opts;
      opts.seed = seed;
      if (duration_s) opts.duration_us = seconds_to_us(*duration_s);
      opts.no_reaction = no_reaction;
      fs::create_directories(out_dir);
      const auto log_file = fs::path(out_dir) / "events.log";
      fs::remove(log_file);
      opts.log_path = log_file;
      const auto result = run(std::move(cfg), opts);
      const auto machine = render_machine(result.report);
      write_file(fs::path(out_dir) / "report.json", machine);
      if (run_format == "human") std::cout << render_human(result.report);
      if (run_format == "machine") std::cout << machine;
    } else if (*replay_cmd) {
      const auto rules = load_rules(rules_path);
      const auto report = replay_file(log_path, rules);
      std::cout << (replay_format == "machine" ? render_machine(report) : render_human(report));
    } else if (*report_cmd) {
      const auto report = parse_machine_report(read_file(report_in));
      std::cout << (report_format == "machine" ? render_machine(report) : render_human(report));
    }
  } catch (const ConfigInvalid& e) {
    std::cerr << "config invalid: " << e.what() << "\n";
    return kExitConfig;
  } catch (const LogCorrupt& e) {
    std::cerr << "log corrupt: " << e.what() << "\n";
    return kExitLog;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return 0;
}
