// Command-line front end: run experiments from flat config files, execute the
// built-in identity check suite, and extract bubbles from recorded snapshots.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plateau/experiment.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudospectral simulator for the half-harmonic map heat flow on the circle"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string sweep_spec;
  std::uint64_t seed = 0;
  bool seed_set = false;

  CLI::App* run = app.add_subcommand("run", "integrate an experiment described by a config file");
  run->add_option("config", config_path, "flat key = value config file")->required();
  run->add_option("--output", output_dir, "override the output directory");
  run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--sweep", sweep_spec, "sweep one key: key=v1,v2,...");

  std::string inject;
  CLI::App* check = app.add_subcommand("check", "run the built-in identity suite");
  check->add_option("--inject", inject, "fault-injection hook for the test harness")
      ->check(CLI::IsMember({"dtn-sign"}));

  std::string snapshot_path;
  int event_index = 0;
  CLI::App* bubble = app.add_subcommand("bubble", "extract the bubble for a recorded event");
  bubble->add_option("snapshot", snapshot_path, "snapshots.ndjson produced by run")->required();
  bubble->add_option("index", event_index, "event index into events.ndjson")->required();

  CLI11_PARSE(app, argc, argv);

  plateau::cli::RunOptions options;
  options.output_override = output_dir;
  if (seed_set) options.seed_override = seed;

  if (run->parsed()) {
    if (!sweep_spec.empty()) {
      const auto eq = sweep_spec.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "config error: --sweep expects key=v1,v2,...\n";
        return 1;
      }
      const std::string key = sweep_spec.substr(0, eq);
      const auto values = split_csv(sweep_spec.substr(eq + 1));
      return plateau::cli::cmd_run_sweep(config_path, key, values, options);
    }
    return plateau::cli::cmd_run(config_path, options);
  }
  if (check->parsed()) {
    plateau::cli::CheckOptions copts;
    copts.inject_dtn_sign_error = (inject == "dtn-sign");
    return plateau::cli::cmd_check(std::cout, copts);
  }
  if (bubble->parsed()) {
    return plateau::cli::cmd_bubble(snapshot_path, event_index);
  }
  return 1;
}
