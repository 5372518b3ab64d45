#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "dumbbell/eigensolve.hpp"
#include "dumbbell/femcore.hpp"
#include "dumbbell/geometry.hpp"
#include "dumbbell/limit1d.hpp"
#include "dumbbell/mesh.hpp"

namespace dumbbell {

enum class ModeSource { Omega, Channel };

struct ModeTag {
  ModeSource source = ModeSource::Omega;
  std::size_t index = 0;  // position in the originating list
  bool operator==(const ModeTag&) const = default;
};

std::string to_string(ModeSource source);

struct MergedSpectrum {
  std::vector<double> values;
  std::vector<ModeTag> tags;
  std::size_t size() const { return values.size(); }
};

/// Ascending union with multiplicity; Omega entries precede channel entries
/// at exact ties. Throws UnsortedInput when an input is not ascending.
MergedSpectrum merge(const std::vector<double>& omega, const std::vector<double>& theta);

/// Sorted merge of two plain lists (used to join the two boxes of Omega).
std::vector<double> merge_values(const std::vector<double>& a, const std::vector<double>& b);

/// Largest relative deviation |a_i - b_i| / |b_i| after optimal assignment
/// of the first n entries of each list (sorted matching is optimal on the line).
double multiset_distance(std::vector<double> a, std::vector<double> b, std::size_t n);

struct Localization {
  double mass_omega = 0.0;
  double mass_channel = 0.0;
};

/// L2 mass fractions of a field over the Omega and channel elements.
/// Throws MissingTags when the mesh carries no region tags.
Localization localize(const DiscreteField& field);
Localization localize(const QuadMesh& mesh, const DofMap& dofmap, const Vector& free);

struct DecompositionRow {
  std::size_t n = 0;  // 1-based
  double lambda = 0.0;
  double merged = 0.0;
  ModeTag tag;
  double deviation = 0.0;
  Localization localization;
  bool has_localization = false;
};

struct Divider {
  double x = 0.0;
  std::size_t count = 0;  // #{lambda_i <= x}
};

struct DecompositionReport {
  std::vector<DecompositionRow> rows;
  double max_deviation = 0.0;
  double multiset_deviation = 0.0;
  Divider divider_used;
};

/// Compares the first N dumbbell eigenvalues with the merged list of the
/// Omega values (both boxes already merged) and the channel values. When
/// `localizations` is non-empty it must hold one entry per row. The divider
/// reported is the first one (relative gap `gap_rel`) covering N entries.
DecompositionReport decompose(const Spectrum& dumbbell, const Spectrum& omega, const Spectrum& theta, std::size_t N,
                              const std::vector<Localization>& localizations = {}, double gap_rel = 0.02);

/// Midpoints of gaps with (hi - lo) / hi >= gap_rel, with the number of
/// merged entries below each.
std::vector<Divider> find_divider(const MergedSpectrum& merged, double gap_rel);

/// ||t - sum_i (t, b_i)_M b_i||_M. Throws NonOrthonormalBasis when the Gram
/// matrix deviates from the identity by more than 1e-8.
double projection_deficiency(const Vector& target, const std::vector<Vector>& basis, const SparseSym& M);
double projection_deficiency(const DiscreteField& target, const std::vector<DiscreteField>& basis, const SparseSym& M);

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

struct ChannelResolution {
  int nx = 0;
  int ny = 0;
};

/// Element columns along the channel and element rows across it.
ChannelResolution channel_resolution(const QuadMesh& dumbbell_mesh);

struct DumbbellRun {
  std::shared_ptr<const QuadMesh> mesh;
  DofMap dofmap;
  Spectrum spectrum;
  std::vector<Localization> localization;
};

/// Free plate (or fully clamped when `dirichlet`) on the dumbbell.
DumbbellRun run_dumbbell(const DumbbellSpec& spec, const MaterialParams& params, const DumbbellMeshOptions& mesh_options,
                         const SolverOptions& solver, bool dirichlet = false);

struct BoxRun {
  std::shared_ptr<const QuadMesh> mesh;  // sub-mesh with parent indices
  DofMap dofmap;
  Spectrum spectrum;
};

struct OmegaRun {
  BoxRun left;
  BoxRun right;
  Spectrum merged;                    // values only, both boxes
  std::vector<int> side;              // per merged entry: 0 left, 1 right
  std::vector<std::size_t> box_index;  // per merged entry: index in that box
};

/// Spectra of the two boxes cut out of a dumbbell mesh (same grid). Box
/// boundaries are free, or clamped when `dirichlet`.
OmegaRun run_omega(const QuadMesh& dumbbell_mesh, const MaterialParams& params, const SolverOptions& solver,
                   bool dirichlet = false);

struct ChannelRun {
  std::shared_ptr<const QuadMesh> mesh;
  DofMap dofmap;
  Spectrum spectrum;
};

/// Pulled-back channel problem on the reference square, clamped at x = 0, 1.
ChannelRun run_channel(const ProfileSpec& profile, const MaterialParams& params, double epsilon, int nx, int ny,
                       const SolverOptions& solver);

/// Comparison functions on the dumbbell in broken form: zero-extended box
/// modes and eps^{-1/2} E h_l limit modes, in merged order (first `count`).
std::vector<Vector> comparison_basis(const QuadMesh& dumbbell_mesh, double epsilon, const OmegaRun& omega,
                                     const LimitSolution& limit, const MergedSpectrum& merged, std::size_t count);

// ---------------------------------------------------------------------------
// Epsilon sweeps
// ---------------------------------------------------------------------------

struct SweepSettings {
  DumbbellSpec geometry;  // epsilon is overridden per grid point
  MaterialParams params;
  DumbbellMeshOptions mesh;
  int channel_nx = 64;
  int channel_ny = 4;
  int n_elems_1d = 256;
  SolverOptions solver;
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05, 0.025};
  int channel_modes = 3;
  int decomposition_modes = 10;
  int dirichlet_modes = 5;
  bool channel = true;
  bool decomposition = true;
  bool dirichlet = true;
  bool projection = false;
  double gap_rel = 0.02;
  int jobs = 0;  // 0: hardware concurrency
};

struct ConvergenceRow {
  double epsilon = 0.0;
  int index = 0;  // 1-based
  double value = 0.0;
  double reference = 0.0;
  double rel_error = 0.0;
  std::string tag;  // "channel", "decomposition", "dirichlet" or "projection"
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// Rows with the given tag and index, ordered by decreasing epsilon.
  std::vector<ConvergenceRow> series(const std::string& tag, int index) const;
  /// Per-epsilon maximum of rel_error over rows with `tag` and index <= n,
  /// ordered by decreasing epsilon.
  std::vector<std::pair<double, double>> max_error(const std::string& tag, int n) const;
  std::string to_csv() const;
};

ConvergenceTable epsilon_sweep(const SweepSettings& settings);

}  // namespace dumbbell
