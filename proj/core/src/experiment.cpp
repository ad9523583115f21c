#include "plateau/experiment.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "plateau/curve_target.hpp"
#include "plateau/diagnostics.hpp"
#include "plateau/mobius.hpp"
#include "plateau/spectral.hpp"

namespace plateau::cli {

namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string& key, const std::string& what)
    : std::runtime_error("config key '" + key + "': " + what), key_(key) {}

std::string format_double17(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::uint64_t DeterministicRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double DeterministicRng::uniform(double lo, double hi) {
  const double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

namespace {

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError(key, "expected a decimal number, got '" + text + "'");
  return value;
}

long parse_long(const std::string& key, const std::string& text) {
  long value = 0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  throw ConfigError(key, "expected on/off, got '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    kv[key] = value;
  }
  return kv;
}

ExperimentConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "target") cfg.target = value;
    else if (key == "initial") cfg.initial = value;
    else if (key == "max_mode") cfg.max_mode = static_cast<int>(parse_long(key, value));
    else if (key == "grid_size") cfg.grid_size = static_cast<int>(parse_long(key, value));
    else if (key == "scheme") cfg.scheme = value;
    else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
    else if (key == "dt_policy") cfg.dt_policy = value;
    else if (key == "dt") cfg.dt = parse_double(key, value);
    else if (key == "safety") cfg.safety = parse_double(key, value);
    else if (key == "c_stab") cfg.c_stab = parse_double(key, value);
    else if (key == "t_max") cfg.t_max = parse_double(key, value);
    else if (key == "residual_tol") cfg.residual_tol = parse_double(key, value);
    else if (key == "snapshot_interval") cfg.snapshot_interval = parse_double(key, value);
    else if (key == "delta_conc") cfg.delta_conc = parse_double(key, value);
    else if (key == "ladder_top") cfg.ladder_top = parse_double(key, value);
    else if (key == "ladder_levels") cfg.ladder_levels = static_cast<int>(parse_long(key, value));
    else if (key == "lattice_size") cfg.lattice_size = static_cast<int>(parse_long(key, value));
    else if (key == "reprojection") cfg.reprojection = parse_bool(key, value);
    else if (key == "output") cfg.output = value;
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(key, value));
    else throw ConfigError(key, "unknown config key");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_key_values(read_key_values(path));
}

flow::FlowConfig ExperimentConfig::flow_config() const {
  flow::FlowConfig fc;
  fc.max_mode = max_mode;
  fc.grid_size = grid_size;
  fc.scheme = flow::scheme_from_string(scheme);
  fc.epsilon = epsilon;
  if (dt_policy == "adaptive") {
    fc.dt_policy.adaptive = true;
  } else if (dt_policy == "fixed") {
    fc.dt_policy.adaptive = false;
    fc.dt_policy.dt = dt;
  } else {
    throw ConfigError("dt_policy", "expected adaptive or fixed, got '" + dt_policy + "'");
  }
  fc.dt_policy.safety = safety;
  fc.dt_policy.c_stab = c_stab;
  fc.t_max = t_max;
  fc.residual_tol = residual_tol;
  fc.snapshot_interval = snapshot_interval;
  fc.delta_conc = delta_conc;
  fc.ladder_top = ladder_top;
  fc.ladder_levels = ladder_levels;
  fc.lattice_size = lattice_size;
  fc.reprojection = reprojection;
  return fc;
}

std::unique_ptr<targets::TargetManifold> make_target(const ExperimentConfig& cfg) {
  const auto colon = cfg.target.find(':');
  const std::string kind = cfg.target.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : cfg.target.substr(colon + 1);
  if (kind == "sphere") {
    const int n = arg.empty() ? 2 : static_cast<int>(parse_long("target", arg));
    return std::make_unique<targets::SphereTarget>(n);
  }
  if (kind == "curve") {
    if (arg.empty()) throw ConfigError("target", "curve target needs a CSV path: curve:<path>");
    auto curve = std::make_unique<targets::CurveTarget>(targets::build_curve(targets::load_curve_csv(arg)));
    return curve;
  }
  throw ConfigError("target", "unknown target '" + cfg.target + "'");
}

namespace {

// Degree-k wrap of the target's distinguished closed loop: e^{ik phi} on a
// sphere's first two coordinates, the uniform-speed parametrization for
// curves.
GridSamples loop_samples(const targets::TargetManifold& target, int wind, int grid_size) {
  const int n = target.ambient_dim();
  GridSamples s(n, grid_size);
  if (const auto* curve = dynamic_cast<const targets::CurveTarget*>(&target)) {
    const double L = curve->length();
    for (int m = 0; m < grid_size; ++m) {
      const double phi = GridSamples::angle(m, grid_size);
      s.values.col(m) = curve->point_at(L * wind * phi / (2.0 * std::numbers::pi));
    }
    return s;
  }
  for (int m = 0; m < grid_size; ++m) {
    const double phi = GridSamples::angle(m, grid_size);
    s.values(0, m) = std::cos(wind * phi);
    s.values(1, m) = std::sin(wind * phi);
  }
  return s;
}

BoundaryField field_from_snapshot_json(const nlohmann::json& record);

}  // namespace

BoundaryField make_initial(const ExperimentConfig& cfg, const targets::TargetManifold& target) {
  const int K = cfg.max_mode;
  const int M = std::max(3 * K + 1, 64);
  const auto colon = cfg.initial.find(':');
  const std::string kind = cfg.initial.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : cfg.initial.substr(colon + 1);

  if (kind == "identity") return spectral::analyze(loop_samples(target, 1, M), K);
  if (kind == "mode") {
    const int k = arg.empty() ? 1 : static_cast<int>(parse_long("initial", arg));
    if (k == 0) throw ConfigError("initial", "mode preset needs a nonzero winding");
    return spectral::analyze(loop_samples(target, k, M), K);
  }
  if (kind == "perturbed") {
    const double amp = arg.empty() ? 0.3 : parse_double("initial", arg);
    GridSamples s = loop_samples(target, 1, M);
    s.values.row(0).array() += amp;
    for (int m = 0; m < M; ++m) s.values.col(m) = target.project(s.values.col(m));
    return spectral::analyze(s, K);
  }
  if (kind == "mobius-concentrated") {
    const double a = arg.empty() ? 0.9 : parse_double("initial", arg);
    if (!(std::abs(a) < 1.0)) throw ConfigError("initial", "|a| must be < 1");
    const BoundaryField base = spectral::analyze(loop_samples(target, 1, M), K);
    return spectral::compose_with_mobius(base, MobiusParams{Complex(a, 0.0), 0.0}, K);
  }
  if (kind == "file") {
    if (arg.empty()) throw ConfigError("initial", "file preset needs a path: file:<ndjson>");
    std::ifstream in(arg);
    if (!in) throw ConfigError("initial", "cannot open coefficient file: " + arg);
    std::string line, last;
    while (std::getline(in, line))
      if (!trim(line).empty()) last = line;
    if (last.empty()) throw ConfigError("initial", "coefficient file is empty");
    try {
      return field_from_snapshot_json(nlohmann::json::parse(last));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("initial", std::string("cannot parse coefficient file: ") + e.what());
    }
  }
  throw ConfigError("initial", "unknown preset '" + cfg.initial + "'");
}

namespace {

std::string json_complex_array(const BoundaryField& u) {
  std::string out = "[";
  for (int j = 0; j < u.n_components(); ++j) {
    if (j) out += ',';
    out += '[';
    for (int k = -u.max_mode(); k <= u.max_mode(); ++k) {
      if (k > -u.max_mode()) out += ',';
      const Complex c = u.coeff(j, k);
      out += '[' + format_double17(c.real()) + ',' + format_double17(c.imag()) + ']';
    }
    out += ']';
  }
  out += ']';
  return out;
}

BoundaryField field_from_snapshot_json(const nlohmann::json& record) {
  const int n = record.at("n").get<int>();
  const int K = record.at("max_mode").get<int>();
  const auto& coeffs = record.at("coeffs");
  Eigen::MatrixXcd table(n, 2 * K + 1);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k <= 2 * K; ++k) {
      const auto& pair = coeffs.at(j).at(k);
      table(j, k) = Complex(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
  return BoundaryField::from_modes(table);
}

std::string snapshot_line(const flow::FlowState& state, const targets::TargetManifold& target) {
  const double energy = spectral::dirichlet_energy(state.field);
  const double energy_half = spectral::half_energy(state.field);
  const double res = diag::residual(state.field, target);
  std::string out = "{\"t\":" + format_double17(state.t);
  out += ",\"n\":" + std::to_string(state.field.n_components());
  out += ",\"max_mode\":" + std::to_string(state.field.max_mode());
  out += ",\"energy\":" + format_double17(energy);
  out += ",\"energy_half\":" + format_double17(energy_half);
  out += ",\"residual\":" + format_double17(res);
  out += ",\"on_manifold_defect\":" + format_double17(state.on_manifold_defect);
  out += ",\"coeffs\":" + json_complex_array(state.field);
  out += "}";
  return out;
}

std::string event_line(const diag::ConcentrationEvent& e) {
  return "{\"time\":" + format_double17(e.time) + ",\"center\":[" +
         format_double17(e.center.real()) + ',' + format_double17(e.center.imag()) +
         "],\"radius\":" + format_double17(e.radius) +
         ",\"local_energy\":" + format_double17(e.local_energy) + "}";
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string series_csv(const flow::Trajectory& traj) {
  std::string out = "t,E,E_half,dissipation,residual,max_local_energy,degree\n";
  for (const flow::SeriesRow& row : traj.series) {
    out += format_double17(row.t) + ',' + format_double17(row.energy) + ',' +
           format_double17(row.energy_half) + ',' + format_double17(row.dissipation) + ',' +
           format_double17(row.residual) + ',';
    if (row.max_local_energy) out += format_double17(*row.max_local_energy);
    out += ',';
    if (row.degree) out += std::to_string(*row.degree);
    out += '\n';
  }
  return out;
}

int exit_code_for(flow::Termination t) {
  switch (t) {
    case flow::Termination::Converged:
    case flow::Termination::TMaxReached: return 0;
    case flow::Termination::ConcentrationDetected: return 3;
    case flow::Termination::StepRejectedFloor: return 4;
  }
  return 2;
}

}  // namespace

int cmd_run(const std::string& config_path, const RunOptions& options, std::ostream* log) {
  std::ostream& err = log ? *log : std::cerr;
  ExperimentConfig cfg;
  std::unique_ptr<targets::TargetManifold> target;
  BoundaryField u0;
  flow::FlowConfig fc;
  try {
    cfg = load_config(config_path);
    if (!options.output_override.empty()) cfg.output = options.output_override;
    if (options.seed_override) cfg.seed = *options.seed_override;
    fc = cfg.flow_config();
    fc.validate();
    target = make_target(cfg);
    u0 = make_initial(cfg, *target);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  flow::Trajectory traj;
  try {
    traj = flow::run(u0, fc, *target);
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return 2;
  }

  try {
    fs::create_directories(cfg.output);
    write_text(fs::path(cfg.output) / "series.csv", series_csv(traj));

    std::string snaps;
    for (const flow::FlowState& s : traj.snapshots) snaps += snapshot_line(s, *target) + "\n";
    write_text(fs::path(cfg.output) / "snapshots.ndjson", snaps);

    std::string events;
    for (const diag::ConcentrationEvent& e : traj.events) events += event_line(e) + "\n";
    write_text(fs::path(cfg.output) / "events.ndjson", events);

    const flow::SeriesRow& last = traj.series.back();
    std::string summary = "{\n";
    summary += "  \"termination\": \"" + flow::termination_to_string(traj.termination) + "\",\n";
    summary += "  \"steps\": " + std::to_string(traj.snapshots.back().step_count) + ",\n";
    summary += "  \"final_time\": " + format_double17(last.t) + ",\n";
    summary += "  \"final_energy\": " + format_double17(last.energy) + ",\n";
    summary += "  \"final_residual\": " + format_double17(last.residual) + ",\n";
    summary += "  \"snapshots\": " + std::to_string(traj.snapshots.size()) + ",\n";
    summary += "  \"events\": " + std::to_string(traj.events.size()) + ",\n";
    summary += "  \"target\": \"" + cfg.target + "\",\n";
    summary += "  \"initial\": \"" + cfg.initial + "\",\n";
    summary += "  \"max_mode\": " + std::to_string(cfg.max_mode) + ",\n";
    summary += "  \"delta_conc\": " + format_double17(cfg.delta_conc) + ",\n";
    summary += "  \"ladder_top\": " + format_double17(cfg.ladder_top) + ",\n";
    summary += "  \"ladder_levels\": " + std::to_string(cfg.ladder_levels) + ",\n";
    summary += "  \"seed\": " + std::to_string(cfg.seed) + "\n";
    summary += "}\n";
    write_text(fs::path(cfg.output) / "summary.json", summary);
  } catch (const std::exception& e) {
    err << "output failure: " << e.what() << "\n";
    return 2;
  }
  return exit_code_for(traj.termination);
}

int cmd_run_sweep(const std::string& config_path, const std::string& sweep_key,
                  const std::vector<std::string>& values, const RunOptions& options,
                  std::ostream* log) {
  std::ostream& err = log ? *log : std::cerr;
  std::map<std::string, std::string> kv;
  ExperimentConfig base;
  try {
    kv = read_key_values(config_path);
    base = config_from_key_values(kv);  // validates all keys up front
    if (!options.output_override.empty()) base.output = options.output_override;
    // the swept key must itself be valid
    std::map<std::string, std::string> probe = kv;
    probe[sweep_key] = values.empty() ? "" : values.front();
    config_from_key_values(probe);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  if (values.empty()) {
    err << "config error: sweep needs at least one value\n";
    return 1;
  }
  int worst = 0;
  for (const std::string& value : values) {
    std::map<std::string, std::string> run_kv = kv;
    run_kv[sweep_key] = value;
    const fs::path out_dir = fs::path(base.output) / (sweep_key + "=" + value);
    run_kv["output"] = out_dir.string();
    try {
      const ExperimentConfig cfg = config_from_key_values(run_kv);
      // write the resolved config for reproducibility, then reuse cmd_run
      fs::create_directories(out_dir);
      std::string text;
      for (const auto& [k, v] : run_kv) text += k + " = " + v + "\n";
      const fs::path cfg_path = out_dir / "config.txt";
      write_text(cfg_path, text);
      worst = std::max(worst, cmd_run(cfg_path.string(), RunOptions{}, log));
    } catch (const std::exception& e) {
      err << "sweep value '" << value << "': " << e.what() << "\n";
      worst = std::max(worst, 1);
    }
  }
  return worst;
}

int cmd_bubble(const std::string& snapshot_path, int event_index, std::ostream* log) {
  std::ostream& err = log ? *log : std::cerr;
  try {
    const fs::path dir = fs::path(snapshot_path).parent_path();
    std::ifstream summary_in(dir / "summary.json");
    if (!summary_in) {
      err << "bubble: missing summary.json next to the snapshot file\n";
      return 1;
    }
    nlohmann::json summary;
    summary_in >> summary;

    std::ifstream events_in(dir / "events.ndjson");
    if (!events_in) {
      err << "bubble: missing events.ndjson next to the snapshot file\n";
      return 1;
    }
    std::vector<nlohmann::json> events;
    std::string line;
    while (std::getline(events_in, line))
      if (!trim(line).empty()) events.push_back(nlohmann::json::parse(line));
    if (event_index < 0 || event_index >= static_cast<int>(events.size())) {
      err << "bubble: event index " << event_index << " out of range (have " << events.size()
          << ")\n";
      return 1;
    }
    diag::ConcentrationEvent event;
    event.time = events[event_index].at("time").get<double>();
    event.center = Complex(events[event_index].at("center").at(0).get<double>(),
                           events[event_index].at("center").at(1).get<double>());
    event.radius = events[event_index].at("radius").get<double>();
    event.local_energy = events[event_index].at("local_energy").get<double>();

    std::ifstream snaps_in(snapshot_path);
    if (!snaps_in) {
      err << "bubble: cannot open snapshot file " << snapshot_path << "\n";
      return 1;
    }
    std::optional<nlohmann::json> best;
    double best_gap = std::numeric_limits<double>::infinity();
    while (std::getline(snaps_in, line)) {
      if (trim(line).empty()) continue;
      nlohmann::json rec = nlohmann::json::parse(line);
      const double gap = std::abs(rec.at("t").get<double>() - event.time);
      if (gap < best_gap) {
        best_gap = gap;
        best = std::move(rec);
      }
    }
    if (!best) {
      err << "bubble: snapshot file has no records\n";
      return 1;
    }

    flow::FlowState state;
    state.t = best->at("t").get<double>();
    state.field = field_from_snapshot_json(*best);

    ExperimentConfig target_cfg;
    target_cfg.target = summary.at("target").get<std::string>();
    auto target = make_target(target_cfg);

    diag::ExtractionOptions opts;
    opts.delta_conc = summary.value("delta_conc", 0.0);
    const double top = summary.value("ladder_top", 0.0);
    const int levels = summary.value("ladder_levels", 0);
    for (int j = 0; j < levels; ++j) opts.ladder.push_back(top * std::pow(2.0, -j));

    const diag::BubbleExtract bubble = diag::extract_bubble(state, event, *target, opts);

    std::string out = "{\"center\":[" + format_double17(bubble.center.real()) + ',' +
                      format_double17(bubble.center.imag()) + "]";
    out += ",\"scale\":" + format_double17(bubble.scale);
    out += ",\"energy\":" + format_double17(bubble.energy);
    out += ",\"residual\":" + format_double17(bubble.residual);
    out += ",\"conformality_defect\":" + format_double17(bubble.conformality_defect);
    out += ",\"n\":" + std::to_string(bubble.field.n_components());
    out += ",\"max_mode\":" + std::to_string(bubble.field.max_mode());
    out += ",\"coeffs\":" + json_complex_array(bubble.field);
    out += "}\n";
    write_text(dir / "bubble.ndjson", out);
    return 0;
  } catch (const diag::StaleEventError& e) {
    err << "bubble: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "bubble: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace plateau::cli
