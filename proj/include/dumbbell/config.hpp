#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dumbbell/eigensolve.hpp"
#include "dumbbell/geometry.hpp"
#include "dumbbell/mesh.hpp"
#include "dumbbell/spectra.hpp"

namespace dumbbell {

struct Discretization {
  double h_target = 0.05;
  int channel_rows = 0;
  double aspect_cap = 50.0;
  double grading = 1.0;
  int nx = 64;  // channel reference mesh
  int ny = 4;
  int n_elems_1d = 256;
};

struct SweepConfig {
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05, 0.025};
  int channel_modes = 3;
  int decomposition_modes = 10;
  int dirichlet_modes = 5;
  bool channel = true;
  bool decomposition = true;
  bool dirichlet = true;
  bool projection = false;
  double gap_rel = 0.02;
};

struct Thresholds {
  double decomposition = 0.05;
  double localization = 0.85;
};

/// Eigenvalue lists standing in for solver output (decompose fixtures).
struct DecomposeInputs {
  std::vector<double> dumbbell;
  std::vector<double> omega;
  std::vector<double> theta;
  int n = 0;
};

struct RunConfig {
  DumbbellSpec geometry;
  MaterialParams params;
  Discretization discretization;
  SolverOptions solver;
  SweepConfig sweep;
  Thresholds thresholds;
  std::string output_dir = ".";
  std::optional<DecomposeInputs> decompose_inputs;

  /// Strict parse: unknown keys and wrong types raise ConfigError naming the
  /// offending key; component invariants are re-validated.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
  void validate() const;

  DumbbellMeshOptions mesh_options() const;
  SweepSettings sweep_settings(int jobs) const;
};

nlohmann::json profile_to_json(const ProfileSpec& p);
ProfileSpec profile_from_json(const nlohmann::json& j, const std::string& path);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace dumbbell
