#pragma once

#include <array>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "dumbbell/geometry.hpp"
#include "dumbbell/mesh.hpp"
#include "dumbbell/sparse.hpp"

namespace dumbbell {

// ---------------------------------------------------------------------------
// Bilinear forms
// ---------------------------------------------------------------------------

/// (1-s) D2u:D2v + s Lap(u) Lap(v) + t grad u . grad v + u v on the physical mesh.
struct PlateForm {
  MaterialParams params;
};

/// Plate form on the channel pulled back to the reference square: the thin
/// direction is rescaled by 1/eps and the profile map (x, s) -> (x, g(x) s)
/// is folded into the quadrature.
struct ChannelEpsForm {
  MaterialParams params;
  double epsilon = 1.0;
  ProfileSpec profile = ProfileSpec::constant(1.0);
};

struct MassForm {};

/// Mass weighted by the profile: the reference-channel mass in 2D, the
/// L2_g mass in 1D.
struct WeightedMassForm {
  ProfileSpec profile = ProfileSpec::constant(1.0);
};

/// (1 - s^2) g h'' v'' + t g h' v' + g h v on (0, 1).
struct Limit1DForm {
  MaterialParams params;
  ProfileSpec profile = ProfileSpec::constant(1.0);
};

using FormKind = std::variant<PlateForm, ChannelEpsForm, MassForm, WeightedMassForm, Limit1DForm>;

// ---------------------------------------------------------------------------
// Element kernels
// ---------------------------------------------------------------------------

/// Gauss-Legendre rule mapped to [0, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre_unit(int n);

using ElementMatrix16 = std::array<double, 256>;  // row-major
using ElementMatrix4 = std::array<double, 16>;

/// Element [x0, x0 + hx] x [y0, y0 + hy]; (x0, y0) only matters for forms with
/// position-dependent coefficients. Local DOFs: corners counterclockwise from
/// the lower-left, each carrying (u, u_x, u_y, u_xy).
struct ElementGeometry {
  double x0 = 0.0;
  double y0 = 0.0;
  double hx = 1.0;
  double hy = 1.0;
};

/// Bogner-Fox-Schmit element matrix. `quad_points` = 0 integrates constant
/// coefficient forms exactly (tensor products of rational 1D moments) and
/// otherwise uses 6 Gauss points per direction.
ElementMatrix16 bfs_element_matrix(const ElementGeometry& geo, const FormKind& kind, int quad_points = 0);

/// Cubic Hermite element on [x0, x0 + h]; local DOFs (u0, u0', u1, u1').
/// Accepts Limit1DForm or WeightedMassForm. `quad_points` = 0 integrates
/// exactly for constant profiles and uses 6 Gauss points otherwise.
ElementMatrix4 hermite1d_element(double x0, double h, const FormKind& kind, int quad_points = 0);

// ---------------------------------------------------------------------------
// Degrees of freedom
// ---------------------------------------------------------------------------

/// Node-major DOF layout (4 per node in 2D, 2 per node in 1D) with a
/// constrained-DOF mask; free DOFs are numbered in global order.
class DofMap {
 public:
  DofMap() = default;
  DofMap(std::size_t num_nodes, int dofs_per_node);

  static DofMap for_mesh(const QuadMesh& mesh) { return DofMap(mesh.num_nodes(), 4); }
  /// Interval DOFs with both endpoint DOFs eliminated (clamped ends).
  static DofMap for_interval(const IntervalMesh& mesh);

  int dofs_per_node() const { return dofs_per_node_; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t total_dofs() const { return constrained_.size(); }
  int num_free() const { return num_free_; }
  std::size_t num_constrained() const { return total_dofs() - static_cast<std::size_t>(num_free_); }

  bool is_constrained(std::size_t global) const { return constrained_[global] != 0; }
  int free_index(std::size_t global) const { return free_index_[global]; }

  void constrain_node(std::size_t node);

  /// Free vector -> full nodal vector (constrained entries zero).
  Vector expand(const Vector& free) const;
  /// Full nodal vector -> free vector.
  Vector restrict_to_free(const Vector& full) const;

 private:
  void renumber();

  int dofs_per_node_ = 4;
  std::size_t num_nodes_ = 0;
  std::vector<char> constrained_;
  std::vector<int> free_index_;
  int num_free_ = 0;
};

enum class ClampWhere { ChannelEnds, AllBoundary };

/// Zeroes all four DOFs at every clamped node: ClampedSegment nodes for
/// ChannelEnds, every non-interior node for AllBoundary.
DofMap apply_clamped_constraints(const QuadMesh& mesh, const DofMap& dofmap, ClampWhere where);

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

SparseSym assemble(const QuadMesh& mesh, const DofMap& dofmap, const FormKind& kind);
SparseSym assemble_1d(const IntervalMesh& mesh, const DofMap& dofmap, const FormKind& kind);

/// Gram matrix a(z_i, z_j) (k x k, row-major) evaluated from field derivatives
/// at quadrature points, without cancellation in the assembled matrix.
std::vector<double> energy_gram(const QuadMesh& mesh, const DofMap& dofmap, const FormKind& kind, const std::vector<Vector>& z);
std::vector<double> energy_gram_1d(const IntervalMesh& mesh, const DofMap& dofmap, const FormKind& kind, const std::vector<Vector>& z);

/// DOF vector of the constant function 1 (value DOFs 1, derivatives 0).
Vector constant_field(const DofMap& dofmap);

// ---------------------------------------------------------------------------
// Fields and the averaging / extension pair
// ---------------------------------------------------------------------------

struct FieldMeta {
  std::string domain_kind;
  double epsilon = 0.0;
};

struct DiscreteField {
  Vector dofs;  // free DOFs of `dofmap`
  DofMap dofmap;
  std::shared_ptr<const QuadMesh> mesh;
  FieldMeta meta;
};

/// Function of x given at stations by value and slope (a 1D Hermite field).
struct SampledFunction {
  std::vector<double> x;
  std::vector<double> value;
  std::vector<double> slope;
};

/// Vertical average over the reference channel cross-section at every x
/// station, integrating the Hermite interpolant exactly. The slope entry is
/// the average of u_x.
SampledFunction average_M(const DiscreteField& field);

/// y-independent extension: u = v, u_x = v', u_y = u_xy = 0 at every node.
/// Stations must coincide with the mesh x lines (StationMismatch otherwise);
/// entries at constrained DOFs are dropped.
DiscreteField extend_E(const SampledFunction& v, std::shared_ptr<const QuadMesh> mesh, const DofMap& dofmap);

/// Nodal Hermite data of a 1D free vector on an interval mesh.
SampledFunction interval_function(const IntervalMesh& mesh, const DofMap& dofmap, const Vector& free);

// ---------------------------------------------------------------------------
// Element-wise (broken) representation, used for L2 inner products between
// fields that are not globally conforming (zero extensions).
// ---------------------------------------------------------------------------

/// Block-diagonal mass over 16 local DOFs per element.
SparseSym broken_mass(const QuadMesh& mesh);

/// Gathers a conforming field into per-element local DOF blocks. Elements in
/// `keep` (when non-empty, indexed by element) that are false get zeros.
Vector to_broken(const QuadMesh& mesh, const DofMap& dofmap, const Vector& free,
                 const std::vector<bool>& keep = {});

/// Integral of u^2 over the elements carrying `region`.
double region_mass(const QuadMesh& mesh, const DofMap& dofmap, const Vector& free, Region region);

}  // namespace dumbbell
