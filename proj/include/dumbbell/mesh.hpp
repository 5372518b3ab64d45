#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dumbbell/geometry.hpp"

namespace dumbbell {

enum class BoundaryTag : std::uint8_t { Interior, FreeBoundary, ClampedSegment };
enum class Region : std::uint8_t { OmegaLeft, OmegaRight, Channel };
enum class MeshKind : std::uint8_t { Dumbbell, ChannelReference, Box, Rectangle };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct ElemSize {
  double hx = 0.0;
  double hy = 0.0;
};

/// Structured, axis-aligned quadrilateral mesh. Element nodes are listed
/// counterclockwise starting from the lower-left corner.
struct QuadMesh {
  MeshKind kind = MeshKind::Rectangle;
  std::vector<Point> nodes;
  std::vector<std::array<int, 4>> elems;
  std::vector<ElemSize> elem_size;
  std::vector<BoundaryTag> boundary_tags;
  std::vector<Region> region_tags;
  // Tensor grid lines the mesh was cut from.
  std::vector<double> x_lines;
  std::vector<double> y_lines;
  // Populated by extract_region: index of each node/element in the parent mesh.
  std::vector<int> parent_node;
  std::vector<int> parent_elem;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_elems() const { return elems.size(); }
  Point origin(std::size_t e) const { return nodes[static_cast<std::size_t>(elems[e][0])]; }
  double area() const;
  double region_area(Region region) const;
  bool has_region_tags() const { return region_tags.size() == elems.size() && !elems.empty(); }
};

/// 1D uniform mesh of [0, 1] with Hermite (u, u') nodes.
struct IntervalMesh {
  std::vector<double> nodes;
  std::vector<bool> clamped;
  double h = 0.0;

  std::size_t num_elems() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

struct DumbbellMeshOptions {
  double h_target = 0.05;
  // Element rows across the channel; 0 derives the count from h_target.
  int channel_rows = 0;
  double aspect_cap = 50.0;
  // Geometric grading ratio towards the junction corners (1 = uniform).
  double grading = 1.0;
};

QuadMesh build_dumbbell_mesh(const DumbbellSpec& spec, const DumbbellMeshOptions& options);

/// Tensor mesh of the mapped reference channel (0,1) x (0,1); the x = 0 and
/// x = 1 sides (images of the channel ends) are tagged ClampedSegment.
QuadMesh build_channel_reference_mesh(int nx, int ny, const ProfileSpec& profile);

/// Plain tensor mesh of [x0, x0 + wx] x [y0, y0 + wy]; boundary nodes FreeBoundary.
QuadMesh build_rectangle_mesh(double x0, double y0, double wx, double wy, int nx, int ny);

IntervalMesh build_interval_mesh(int n);

/// Sub-mesh made of the elements carrying `region`, with boundary tags
/// recomputed for the sub-domain and parent indices recorded.
QuadMesh extract_region(const QuadMesh& mesh, Region region);

/// Conformity: positive element sizes, element corners consistent with sizes,
/// and no two nodes within 1e-14 of each other.
bool check_conformity(const QuadMesh& mesh);

std::string to_string(BoundaryTag tag);
std::string to_string(Region region);

/// JSON dump: {"kind", "nodes": [[x,y],...], "elems": [[n0,n1,n2,n3],...],
/// "elem_size": [[hx,hy],...], "boundary_tags": [...], "region_tags": [...]}.
std::string mesh_to_json(const QuadMesh& mesh);

}  // namespace dumbbell
