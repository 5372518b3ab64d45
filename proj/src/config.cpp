#include "dumbbell/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "dumbbell/error.hpp"

namespace dumbbell {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void config_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::ConfigError, "'" + path + "': " + msg);
}

const json& require_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) config_error(join(path, key), "unknown key");
  }
  return j;
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string p = join(path, key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) config_error(p, "expected a boolean");
    out = it->template get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) config_error(p, "expected a string");
    out = it->template get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) config_error(p, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (it->is_number_unsigned()) {
        out = it->template get<T>();
      } else {
        const auto v = it->template get<std::int64_t>();
        if (v < 0) config_error(p, "expected a non-negative integer");
        out = static_cast<T>(v);
      }
    } else {
      out = it->template get<T>();
    }
  } else {
    if (!it->is_number()) config_error(p, "expected a number");
    out = it->template get<T>();
  }
}

std::vector<double> read_list(const json& obj, const std::string& path, const char* key, std::vector<double> fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const std::string p = join(path, key);
  if (!it->is_array()) config_error(p, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_number()) config_error(p + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back((*it)[i].get<double>());
  }
  return out;
}

// Re-raise component validation failures as ConfigError tagged with the section.
template <typename F>
void validate_section(const std::string& path, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    config_error(path, e.what());
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json profile_to_json(const ProfileSpec& p) {
  json j;
  switch (p.kind()) {
    case ProfileKind::Constant:
      j["kind"] = "constant";
      j["value"] = p.coefficients().at(0);
      break;
    case ProfileKind::Polynomial:
      j["kind"] = "polynomial";
      j["coefficients"] = p.coefficients();
      break;
    case ProfileKind::CosineBump:
      j["kind"] = "cosine_bump";
      j["a"] = p.coefficients().at(0);
      j["b"] = p.coefficients().at(1);
      break;
  }
  j["delta"] = p.delta();
  return j;
}

ProfileSpec profile_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  std::string kind = "constant";
  read(j, path, "kind", kind);
  double delta = 0.25;
  read(j, path, "delta", delta);
  if (kind == "constant") {
    require_object(j, path, {"kind", "value", "delta"});
    double value = 1.0;
    read(j, path, "value", value);
    return ProfileSpec::constant(value, delta);
  }
  if (kind == "polynomial") {
    require_object(j, path, {"kind", "coefficients", "delta"});
    auto coeffs = read_list(j, path, "coefficients", {});
    if (coeffs.empty()) config_error(join(path, "coefficients"), "polynomial profile needs coefficients");
    return ProfileSpec::polynomial(std::move(coeffs), delta);
  }
  if (kind == "cosine_bump") {
    require_object(j, path, {"kind", "a", "b", "delta"});
    double a = 1.0;
    double b = 0.0;
    read(j, path, "a", a);
    read(j, path, "b", b);
    return ProfileSpec::cosine_bump(a, b, delta);
  }
  config_error(join(path, "kind"), "unknown profile kind '" + kind + "'");
  return ProfileSpec::constant(1.0);
}

RunConfig RunConfig::from_json(const nlohmann::json& root) {
  require_object(root, "", {"geometry", "params", "discretization", "solver", "sweep", "thresholds", "output", "decompose_inputs"});
  RunConfig c;
  if (const auto it = root.find("geometry"); it != root.end()) {
    const json& g = require_object(*it, "geometry", {"left_length", "right_length", "epsilon", "profile"});
    read(g, "geometry", "left_length", c.geometry.left_length);
    read(g, "geometry", "right_length", c.geometry.right_length);
    read(g, "geometry", "epsilon", c.geometry.epsilon);
    if (const auto p = g.find("profile"); p != g.end()) {
      validate_section("geometry.profile", [&] { c.geometry.profile = profile_from_json(*p, "geometry.profile"); });
    }
  }
  if (const auto it = root.find("params"); it != root.end()) {
    const json& p = require_object(*it, "params", {"sigma", "tau"});
    read(p, "params", "sigma", c.params.sigma);
    read(p, "params", "tau", c.params.tau);
  }
  if (const auto it = root.find("discretization"); it != root.end()) {
    const json& d = require_object(*it, "discretization",
                                   {"h_target", "channel_rows", "aspect_cap", "grading", "nx", "ny", "n_elems_1d"});
    read(d, "discretization", "h_target", c.discretization.h_target);
    read(d, "discretization", "channel_rows", c.discretization.channel_rows);
    read(d, "discretization", "aspect_cap", c.discretization.aspect_cap);
    read(d, "discretization", "grading", c.discretization.grading);
    read(d, "discretization", "nx", c.discretization.nx);
    read(d, "discretization", "ny", c.discretization.ny);
    read(d, "discretization", "n_elems_1d", c.discretization.n_elems_1d);
  }
  if (const auto it = root.find("solver"); it != root.end()) {
    const json& s = require_object(*it, "solver", {"k", "tol", "max_iters", "seed", "block_size"});
    read(s, "solver", "k", c.solver.k);
    read(s, "solver", "tol", c.solver.tol);
    read(s, "solver", "max_iters", c.solver.max_iters);
    read(s, "solver", "seed", c.solver.seed);
    read(s, "solver", "block_size", c.solver.block_size);
  }
  if (const auto it = root.find("sweep"); it != root.end()) {
    const json& s = require_object(*it, "sweep",
                                   {"epsilons", "channel_modes", "decomposition_modes", "dirichlet_modes", "channel",
                                    "decomposition", "dirichlet", "projection", "gap_rel"});
    c.sweep.epsilons = read_list(s, "sweep", "epsilons", c.sweep.epsilons);
    read(s, "sweep", "channel_modes", c.sweep.channel_modes);
    read(s, "sweep", "decomposition_modes", c.sweep.decomposition_modes);
    read(s, "sweep", "dirichlet_modes", c.sweep.dirichlet_modes);
    read(s, "sweep", "channel", c.sweep.channel);
    read(s, "sweep", "decomposition", c.sweep.decomposition);
    read(s, "sweep", "dirichlet", c.sweep.dirichlet);
    read(s, "sweep", "projection", c.sweep.projection);
    read(s, "sweep", "gap_rel", c.sweep.gap_rel);
  }
  if (const auto it = root.find("thresholds"); it != root.end()) {
    const json& t = require_object(*it, "thresholds", {"decomposition", "localization"});
    read(t, "thresholds", "decomposition", c.thresholds.decomposition);
    read(t, "thresholds", "localization", c.thresholds.localization);
  }
  if (const auto it = root.find("output"); it != root.end()) {
    const json& o = require_object(*it, "output", {"dir"});
    read(o, "output", "dir", c.output_dir);
  }
  if (const auto it = root.find("decompose_inputs"); it != root.end()) {
    const json& d = require_object(*it, "decompose_inputs", {"dumbbell", "omega", "theta", "n"});
    DecomposeInputs in;
    in.dumbbell = read_list(d, "decompose_inputs", "dumbbell", {});
    in.omega = read_list(d, "decompose_inputs", "omega", {});
    in.theta = read_list(d, "decompose_inputs", "theta", {});
    in.n = static_cast<int>(in.dumbbell.size());
    read(d, "decompose_inputs", "n", in.n);
    c.decompose_inputs = std::move(in);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("'<root>': malformed JSON: ") + e.what());
  }
  return from_json(j);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

nlohmann::json RunConfig::to_json() const {
  json j;
  j["geometry"] = {{"left_length", geometry.left_length},
                   {"right_length", geometry.right_length},
                   {"epsilon", geometry.epsilon},
                   {"profile", profile_to_json(geometry.profile)}};
  j["params"] = {{"sigma", params.sigma}, {"tau", params.tau}};
  j["discretization"] = {{"h_target", discretization.h_target}, {"channel_rows", discretization.channel_rows},
                         {"aspect_cap", discretization.aspect_cap}, {"grading", discretization.grading},
                         {"nx", discretization.nx},               {"ny", discretization.ny},
                         {"n_elems_1d", discretization.n_elems_1d}};
  j["solver"] = {{"k", solver.k},
                 {"tol", solver.tol},
                 {"max_iters", solver.max_iters},
                 {"seed", solver.seed},
                 {"block_size", solver.block_size}};
  j["sweep"] = {{"epsilons", sweep.epsilons},
                {"channel_modes", sweep.channel_modes},
                {"decomposition_modes", sweep.decomposition_modes},
                {"dirichlet_modes", sweep.dirichlet_modes},
                {"channel", sweep.channel},
                {"decomposition", sweep.decomposition},
                {"dirichlet", sweep.dirichlet},
                {"projection", sweep.projection},
                {"gap_rel", sweep.gap_rel}};
  j["thresholds"] = {{"decomposition", thresholds.decomposition}, {"localization", thresholds.localization}};
  j["output"] = {{"dir", output_dir}};
  if (decompose_inputs) {
    j["decompose_inputs"] = {{"dumbbell", decompose_inputs->dumbbell},
                             {"omega", decompose_inputs->omega},
                             {"theta", decompose_inputs->theta},
                             {"n", decompose_inputs->n}};
  }
  return j;
}

void RunConfig::validate() const {
  validate_section("params", [&] { params.validate(); });
  validate_section("geometry", [&] {
    if (!(geometry.left_length > 0.0) || !(geometry.right_length > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "box lengths must be positive");
    }
    if (!(geometry.epsilon > 0.0)) throw Error(ErrorKind::InvalidEpsilon, "epsilon must be positive");
    if (!(geometry.profile.min_value() > 0.0)) throw Error(ErrorKind::NonPositiveProfile, "profile must be positive on [0, 1]");
  });
  const auto& d = discretization;
  if (!(d.h_target > 0.0)) config_error("discretization.h_target", "must be positive");
  if (d.channel_rows < 0) config_error("discretization.channel_rows", "must be >= 0");
  if (!(d.aspect_cap >= 1.0)) config_error("discretization.aspect_cap", "must be >= 1");
  if (!(d.grading >= 1.0)) config_error("discretization.grading", "must be >= 1");
  if (d.nx < 1) config_error("discretization.nx", "must be >= 1");
  if (d.ny < 1) config_error("discretization.ny", "must be >= 1");
  if (d.n_elems_1d < 4) config_error("discretization.n_elems_1d", "must be >= 4");
  if (solver.k < 1) config_error("solver.k", "must be >= 1");
  if (!(solver.tol > 0.0)) config_error("solver.tol", "must be positive");
  if (solver.max_iters < 0) config_error("solver.max_iters", "must be >= 0");
  if (solver.block_size < 1) config_error("solver.block_size", "must be >= 1");
  if (sweep.epsilons.empty()) config_error("sweep.epsilons", "must not be empty");
  for (double e : sweep.epsilons) {
    if (!(e > 0.0)) config_error("sweep.epsilons", "entries must be positive");
  }
  if (sweep.channel_modes < 1) config_error("sweep.channel_modes", "must be >= 1");
  if (sweep.decomposition_modes < 1) config_error("sweep.decomposition_modes", "must be >= 1");
  if (sweep.dirichlet_modes < 1) config_error("sweep.dirichlet_modes", "must be >= 1");
  if (!(sweep.gap_rel > 0.0 && sweep.gap_rel < 1.0)) config_error("sweep.gap_rel", "must lie in (0, 1)");
  if (!(thresholds.decomposition > 0.0)) config_error("thresholds.decomposition", "must be positive");
  if (!(thresholds.localization > 0.0 && thresholds.localization <= 1.0)) {
    config_error("thresholds.localization", "must lie in (0, 1]");
  }
  if (output_dir.empty()) config_error("output.dir", "must not be empty");
  if (decompose_inputs) {
    if (decompose_inputs->n < 0) config_error("decompose_inputs.n", "must be >= 0");
  }
}

DumbbellMeshOptions RunConfig::mesh_options() const {
  DumbbellMeshOptions o;
  o.h_target = discretization.h_target;
  o.channel_rows = discretization.channel_rows;
  o.aspect_cap = discretization.aspect_cap;
  o.grading = discretization.grading;
  return o;
}

SweepSettings RunConfig::sweep_settings(int jobs) const {
  SweepSettings s;
  s.geometry = geometry;
  s.params = params;
  s.mesh = mesh_options();
  s.channel_nx = discretization.nx;
  s.channel_ny = discretization.ny;
  s.n_elems_1d = discretization.n_elems_1d;
  s.solver = solver;
  s.epsilons = sweep.epsilons;
  s.channel_modes = sweep.channel_modes;
  s.decomposition_modes = sweep.decomposition_modes;
  s.dirichlet_modes = sweep.dirichlet_modes;
  s.channel = sweep.channel;
  s.decomposition = sweep.decomposition;
  s.dirichlet = sweep.dirichlet;
  s.projection = sweep.projection;
  s.gap_rel = sweep.gap_rel;
  s.jobs = jobs;
  return s;
}

}  // namespace dumbbell
