#include "plateau/experiment.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "plateau/curve_target.hpp"
#include "plateau/diagnostics.hpp"
#include "plateau/spectral.hpp"
#include "test_support.hpp"

using namespace plateau;
using namespace plateau::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("plateau_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path path = dir / "config.txt";
  std::ofstream out(path);
  out << body;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing: round trip, comments, unknown keys, bad values") {
  const fs::path dir = temp_dir("config");
  const fs::path path = write_config(dir,
                                     "# comment line\n"
                                     "target = sphere:2\n"
                                     "initial = perturbed:0.25\n"
                                     "max_mode = 48\n"
                                     "t_max = 7.5\n"
                                     "reprojection = on\n"
                                     "scheme = imex_factor\n");
  const cli::ExperimentConfig cfg = cli::load_config(path.string());
  CHECK(cfg.target == "sphere:2");
  CHECK(cfg.initial == "perturbed:0.25");
  CHECK(cfg.max_mode == 48);
  CHECK(cfg.t_max == 7.5);
  CHECK(cfg.reprojection == true);
  CHECK(cfg.scheme == "imex_factor");

  const fs::path bad_key = write_config(dir, "no_such_option = 3\n");
  try {
    cli::load_config(bad_key.string());
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    CHECK(e.key() == "no_such_option");
    CHECK(std::string(e.what()).find("no_such_option") != std::string::npos);
  }

  const fs::path bad_value = write_config(dir, "t_max = banana\n");
  try {
    cli::load_config(bad_value.string());
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    CHECK(e.key() == "t_max");
  }
  fs::remove_all(dir);
}

TEST_CASE("format_double17 round-trips doubles exactly") {
  cli::DeterministicRng rng(99);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-1e6, 1e6) * std::pow(10.0, static_cast<int>(rng.uniform(-12, 12)));
    const std::string text = cli::format_double17(x);
    CHECK(std::stod(text) == x);
  }
  CHECK(cli::format_double17(0.0) == "0");
  CHECK(cli::format_double17(std::numbers::pi) == "3.1415926535897931");
}

TEST_CASE("initial data presets") {
  cli::ExperimentConfig cfg;
  cfg.max_mode = 16;
  const auto target = cli::make_target(cfg);

  cfg.initial = "identity";
  const BoundaryField id = cli::make_initial(cfg, *target);
  CHECK(boundary_l2_distance(id, circle_mode(1, 16)) < 1e-12);

  cfg.initial = "mode:3";
  CHECK(spectral::winding_degree(cli::make_initial(cfg, *target)) == 3);

  cfg.initial = "perturbed:0.3";
  const BoundaryField pert = cli::make_initial(cfg, *target);
  const GridSamples s = spectral::synthesize(pert, 49);
  for (int m = 0; m < 49; ++m)
    CHECK(std::abs(s.values.col(m).norm() - 1.0) < 1e-6);

  cfg.initial = "mobius-concentrated:0.9";
  const BoundaryField conc = cli::make_initial(cfg, *target);
  CHECK(spectral::dirichlet_energy(conc) > 2.0);  // most of pi within K = 16

  cfg.initial = "nonsense";
  CHECK_THROWS_AS(cli::make_initial(cfg, *target), cli::ConfigError);

  cfg.target = "curve:/does/not/exist.csv";
  CHECK_THROWS_AS(cli::make_target(cfg), std::invalid_argument);
}

TEST_CASE("cmd_run: identity preset converges with energy pi") {
  const fs::path dir = temp_dir("run_identity");
  const fs::path cfg = write_config(dir,
                                    "target = sphere:2\n"
                                    "initial = identity\n"
                                    "max_mode = 16\n"
                                    "t_max = 5.0\n"
                                    "residual_tol = 1e-9\n"
                                    "output = " + (dir / "out").string() + "\n");
  std::ostringstream log;
  const int code = cli::cmd_run(cfg.string(), {}, &log);
  CHECK(code == 0);

  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("termination") == "converged");
  CHECK(std::abs(summary.at("final_energy").get<double>() - std::numbers::pi) < 1e-10);

  const std::string series = slurp(dir / "out" / "series.csv");
  CHECK(series.rfind("t,E,E_half,dissipation,residual,max_local_energy,degree\n", 0) == 0);
  CHECK(slurp(dir / "out" / "events.ndjson").empty());
  CHECK(!slurp(dir / "out" / "snapshots.ndjson").empty());
  fs::remove_all(dir);
}

TEST_CASE("cmd_run: malformed config exits 1 naming the key") {
  const fs::path dir = temp_dir("run_bad");
  const fs::path cfg = write_config(dir, "target = sphere:2\nwibble = 1\n");
  std::ostringstream log;
  CHECK(cli::cmd_run(cfg.string(), {}, &log) == 1);
  CHECK(log.str().find("wibble") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cmd_run: concentrated preset fires an event and exits 3; bubble extracts") {
  const fs::path dir = temp_dir("run_conc");
  const fs::path cfg = write_config(dir,
                                    "target = sphere:2\n"
                                    "initial = mobius-concentrated:0.99\n"
                                    "max_mode = 1024\n"
                                    "t_max = 1.0\n"
                                    "residual_tol = 1e-10\n"
                                    "delta_conc = 1.0\n"
                                    "ladder_top = 0.4\n"
                                    "ladder_levels = 3\n"
                                    "output = " + (dir / "out").string() + "\n");
  std::ostringstream log;
  const int code = cli::cmd_run(cfg.string(), {}, &log);
  CHECK(code == 3);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("termination") == "concentration_detected");
  CHECK(summary.at("events").get<int>() >= 1);

  // extract the first event's bubble
  const int bcode = cli::cmd_bubble((dir / "out" / "snapshots.ndjson").string(), 0, &log);
  CHECK(bcode == 0);
  const auto bubble = nlohmann::json::parse(slurp(dir / "out" / "bubble.ndjson"));
  CHECK(std::abs(bubble.at("energy").get<double>() - std::numbers::pi) <
        0.05 * std::numbers::pi);

  // bubble reruns are byte-identical
  const std::string first = slurp(dir / "out" / "bubble.ndjson");
  CHECK(cli::cmd_bubble((dir / "out" / "snapshots.ndjson").string(), 0, &log) == 0);
  CHECK(slurp(dir / "out" / "bubble.ndjson") == first);

  // bad event index
  CHECK(cli::cmd_bubble((dir / "out" / "snapshots.ndjson").string(), 99, &log) == 1);
  fs::remove_all(dir);
}

TEST_CASE("cmd_bubble: stale events exit 3") {
  const fs::path dir = temp_dir("bubble_stale");
  const fs::path cfg = write_config(dir,
                                    "target = sphere:2\n"
                                    "initial = identity\n"
                                    "max_mode = 8\n"
                                    "t_max = 1.0\n"
                                    "output = " + (dir / "out").string() + "\n");
  std::ostringstream log;
  REQUIRE(cli::cmd_run(cfg.string(), {}, &log) == 0);
  // plant an event that the smooth field cannot support
  std::ofstream events(dir / "out" / "events.ndjson");
  events << "{\"time\":0,\"center\":[1,0],\"radius\":0.1,\"local_energy\":3.0}\n";
  events.close();
  CHECK(cli::cmd_bubble((dir / "out" / "snapshots.ndjson").string(), 0, &log) == 3);
  fs::remove_all(dir);
}

TEST_CASE("cmd_run is byte-deterministic for a fixed config and seed") {
  const fs::path dir = temp_dir("determinism");
  for (const std::string run : {"a", "b"}) {
    const fs::path cfg = write_config(dir,
                                      "target = sphere:2\n"
                                      "initial = perturbed:0.3\n"
                                      "max_mode = 16\n"
                                      "t_max = 2.0\n"
                                      "residual_tol = 1e-8\n"
                                      "seed = 7\n"
                                      "output = " + (dir / run).string() + "\n");
    REQUIRE(cli::cmd_run(cfg.string(), {}, nullptr) == 0);
  }
  for (const std::string file : {"series.csv", "snapshots.ndjson", "events.ndjson", "summary.json"})
    CHECK(slurp(dir / "a" / file) == slurp(dir / "b" / file));
  fs::remove_all(dir);
}

TEST_CASE("cmd_check passes, is deterministic, and the fault hook trips it") {
  std::ostringstream out1, out2, out3;
  CHECK(cli::cmd_check(out1) == 0);
  CHECK(cli::cmd_check(out2) == 0);
  CHECK(out1.str() == out2.str());
  CHECK(out1.str().find("RESULT: PASS") != std::string::npos);

  cli::CheckOptions inject;
  inject.inject_dtn_sign_error = true;
  CHECK(cli::cmd_check(out3, inject) == 5);
  CHECK(out3.str().find("[FAIL]") != std::string::npos);
}

TEST_CASE("sweep fans out into per-value directories") {
  const fs::path dir = temp_dir("sweep");
  const fs::path cfg = write_config(dir,
                                    "target = sphere:2\n"
                                    "initial = perturbed:0.2\n"
                                    "max_mode = 8\n"
                                    "t_max = 0.5\n"
                                    "dt_policy = fixed\n"
                                    "dt = 0.01\n"
                                    "output = " + (dir / "out").string() + "\n");
  std::ostringstream log;
  const int code = cli::cmd_run_sweep(cfg.string(), "dt", {"0.01", "0.005"}, {}, &log);
  CHECK(code == 0);
  CHECK(fs::exists(dir / "out" / "dt=0.01" / "series.csv"));
  CHECK(fs::exists(dir / "out" / "dt=0.005" / "series.csv"));
  CHECK(fs::exists(dir / "out" / "dt=0.005" / "summary.json"));

  // sweeping an unknown key is a config error
  CHECK(cli::cmd_run_sweep(cfg.string(), "wobble", {"1"}, {}, &log) == 1);
  fs::remove_all(dir);
}

TEST_CASE("file preset restarts from a recorded snapshot") {
  const fs::path dir = temp_dir("restart");
  const fs::path cfg = write_config(dir,
                                    "target = sphere:2\n"
                                    "initial = perturbed:0.3\n"
                                    "max_mode = 12\n"
                                    "t_max = 1.0\n"
                                    "residual_tol = 1e-12\n"
                                    "output = " + (dir / "out").string() + "\n");
  std::ostringstream log;
  REQUIRE(cli::cmd_run(cfg.string(), {}, &log) == 0);

  cli::ExperimentConfig restart;
  restart.target = "sphere:2";
  restart.initial = "file:" + (dir / "out" / "snapshots.ndjson").string();
  restart.max_mode = 12;
  const auto target = cli::make_target(restart);
  const BoundaryField resumed = cli::make_initial(restart, *target);
  CHECK(resumed.max_mode() == 12);
  CHECK(resumed.n_components() == 2);
  // the recorded final state is nearly half-harmonic, so its residual is small
  CHECK(diag::residual(resumed, *target) < 1e-1);
  fs::remove_all(dir);
}

TEST_CASE("installed binary wiring: subprocess check passes") {
#ifdef PLATEAU_CLI_PATH
  const std::string base = std::string(PLATEAU_CLI_PATH);
  CHECK(std::system((base + " check > /dev/null 2>&1").c_str()) == 0);
  CHECK(std::system((base + " --help > /dev/null 2>&1").c_str()) == 0);
#endif
}
