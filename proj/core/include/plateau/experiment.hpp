#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plateau/boundary_field.hpp"
#include "plateau/flow.hpp"
#include "plateau/targets.hpp"

namespace plateau::cli {

/// Configuration error carrying the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Flat key = value experiment description (diff-friendly, no nesting).
struct ExperimentConfig {
  std::string target = "sphere:2";     // sphere:<n> | curve:<csv path>
  std::string initial = "identity";    // identity | mode:<k> | perturbed[:amp]
                                       // | mobius-concentrated:<a> | file:<ndjson>
  int max_mode = 32;
  int grid_size = 0;
  std::string scheme = "euler_project";
  double epsilon = 0.0;
  std::string dt_policy = "adaptive";  // adaptive | fixed
  double dt = 0.0;
  double safety = 0.9;
  double c_stab = 0.5;
  double t_max = 10.0;
  double residual_tol = 1e-8;
  double snapshot_interval = 1.0;
  double delta_conc = 0.0;
  double ladder_top = 0.4;
  int ladder_levels = 3;
  int lattice_size = 64;
  bool reprojection = true;
  std::string output = "out";
  std::uint64_t seed = 0;

  flow::FlowConfig flow_config() const;
};

std::map<std::string, std::string> read_key_values(const std::string& path);
ExperimentConfig config_from_key_values(const std::map<std::string, std::string>& kv);
ExperimentConfig load_config(const std::string& path);

std::unique_ptr<targets::TargetManifold> make_target(const ExperimentConfig& cfg);
BoundaryField make_initial(const ExperimentConfig& cfg, const targets::TargetManifold& target);

/// Locale-independent decimal formatting with 17 significant digits
/// (round-trips binary doubles exactly).
std::string format_double17(double value);

/// splitmix64: portable deterministic random stream for test data.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double uniform(double lo, double hi);

 private:
  std::uint64_t state_;
};

struct RunOptions {
  std::string output_override;
  std::optional<std::uint64_t> seed_override;
};

/// Integrate the configured experiment and write series.csv,
/// snapshots.ndjson, events.ndjson, and summary.json into the output
/// directory. Exit codes: 0 converged / t_max, 1 config error, 2 numeric
/// failure, 3 concentration detected, 4 step size floor.
int cmd_run(const std::string& config_path, const RunOptions& options = {},
            std::ostream* log = nullptr);

/// Run one experiment per value of the swept key, each into
/// <output>/<key>=<value>/. Returns the maximum exit code.
int cmd_run_sweep(const std::string& config_path, const std::string& sweep_key,
                  const std::vector<std::string>& values, const RunOptions& options = {},
                  std::ostream* log = nullptr);

struct CheckOptions {
  bool inject_dtn_sign_error = false;  // test hook: must make the suite fail
};

/// Small-scale identity suite (energy identity, trace identity, projector
/// split, distance Laplacian, Poisson cross-validation, conformal
/// invariance). Prints one row per check; exit 0 iff all pass, 5 otherwise.
int cmd_check(std::ostream& out, const CheckOptions& options = {});

/// Extract the bubble for events[event_index] from the snapshot file's
/// nearest-in-time record; writes bubble.ndjson next to the snapshot.
/// Exit codes: 0 ok, 1 bad arguments, 3 stale event.
int cmd_bubble(const std::string& snapshot_path, int event_index, std::ostream* log = nullptr);

}  // namespace plateau::cli
