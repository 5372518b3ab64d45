#include "dumbbell/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include "json.hpp"

#include "dumbbell/error.hpp"

namespace dumbbell {

namespace {

constexpr double kSnap = 1e-12;

int intervals_for(double length, double h) {
  return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9)));
}

// Points a = p_0 < ... < p_n = b. With ratio > 1 the spacing shrinks
// geometrically towards `a` (fine_at_a) or `b`.
std::vector<double> graded_points(double a, double b, int n, double ratio, bool fine_at_a) {
  std::vector<double> sizes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) sizes[static_cast<std::size_t>(i)] = std::pow(ratio, fine_at_a ? i : n - 1 - i);
  const double total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  std::vector<double> pts(static_cast<std::size_t>(n) + 1);
  pts[0] = a;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += sizes[static_cast<std::size_t>(i)];
    pts[static_cast<std::size_t>(i) + 1] = a + (b - a) * acc / total;
  }
  pts.back() = b;
  return pts;
}

void append_points(std::vector<double>& lines, const std::vector<double>& pts) {
  for (double p : pts) {
    if (lines.empty() || p > lines.back() + kSnap) lines.push_back(p);
  }
}

// Cuts the tensor grid (x_lines x y_lines) down to the cells accepted by
// `inside(cx, cy)`; node numbering follows row-major order of used nodes.
template <typename Inside, typename RegionOf>
QuadMesh cut_tensor_grid(MeshKind kind, std::vector<double> xs, std::vector<double> ys, Inside inside,
                         RegionOf region_of) {
  QuadMesh mesh;
  mesh.kind = kind;
  const std::size_t nx = xs.size() - 1;
  const std::size_t ny = ys.size() - 1;
  std::vector<int> node_id((nx + 1) * (ny + 1), -1);
  std::vector<char> cell_used(nx * ny, 0);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double cx = 0.5 * (xs[i] + xs[i + 1]);
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      if (!inside(cx, cy)) continue;
      cell_used[j * nx + i] = 1;
      node_id[j * (nx + 1) + i] = 0;
      node_id[j * (nx + 1) + i + 1] = 0;
      node_id[(j + 1) * (nx + 1) + i] = 0;
      node_id[(j + 1) * (nx + 1) + i + 1] = 0;
    }
  }
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      int& id = node_id[j * (nx + 1) + i];
      if (id < 0) continue;
      id = static_cast<int>(mesh.nodes.size());
      mesh.nodes.push_back({xs[i], ys[j]});
    }
  }
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      if (!cell_used[j * nx + i]) continue;
      mesh.elems.push_back({node_id[j * (nx + 1) + i], node_id[j * (nx + 1) + i + 1],
                            node_id[(j + 1) * (nx + 1) + i + 1], node_id[(j + 1) * (nx + 1) + i]});
      mesh.elem_size.push_back({xs[i + 1] - xs[i], ys[j + 1] - ys[j]});
      mesh.region_tags.push_back(region_of(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])));
    }
  }
  mesh.x_lines = std::move(xs);
  mesh.y_lines = std::move(ys);
  return mesh;
}

// A node of a structured quad mesh is interior iff four elements meet at it.
void tag_boundary_by_valence(QuadMesh& mesh) {
  std::vector<int> valence(mesh.nodes.size(), 0);
  for (const auto& e : mesh.elems) {
    for (int n : e) ++valence[static_cast<std::size_t>(n)];
  }
  mesh.boundary_tags.assign(mesh.nodes.size(), BoundaryTag::Interior);
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    if (valence[n] < 4) mesh.boundary_tags[n] = BoundaryTag::FreeBoundary;
  }
}

}  // namespace

double QuadMesh::area() const {
  double a = 0.0;
  for (const auto& s : elem_size) a += s.hx * s.hy;
  return a;
}

double QuadMesh::region_area(Region region) const {
  double a = 0.0;
  for (std::size_t e = 0; e < elems.size(); ++e) {
    if (e < region_tags.size() && region_tags[e] == region) a += elem_size[e].hx * elem_size[e].hy;
  }
  return a;
}

QuadMesh build_dumbbell_mesh(const DumbbellSpec& spec, const DumbbellMeshOptions& options) {
  spec.validate();
  if (!(options.h_target > 0.0)) throw Error(ErrorKind::InvalidArgument, "h_target must be positive");
  if (!(options.aspect_cap >= 1.0)) throw Error(ErrorKind::InvalidArgument, "aspect_cap must be >= 1");
  if (!(options.grading >= 1.0)) throw Error(ErrorKind::InvalidArgument, "grading must be >= 1");
  if (!spec.profile.is_constant()) {
    throw Error(ErrorKind::UnsupportedProfile, "full dumbbell meshes require a constant channel profile");
  }
  const double h = options.h_target;
  const double top = spec.epsilon * spec.profile.constant_value();

  int rows = options.channel_rows;
  if (rows <= 0) rows = static_cast<int>(std::floor(top / h + 1e-9));
  if (rows < 2) {
    throw Error(ErrorKind::EmptyChannelResolution,
                "channel of height " + std::to_string(top) + " holds fewer than 2 element rows at h = " +
                    std::to_string(h));
  }
  const double hy_channel = top / rows;
  const double hx_max = std::min(h, options.aspect_cap * hy_channel);

  const double l = spec.left_length;
  const double r = spec.right_length;
  const double g = options.grading;

  std::vector<double> xs;
  append_points(xs, graded_points(-l, 0.0, intervals_for(l, hx_max), g, false));
  append_points(xs, graded_points(0.0, 1.0, intervals_for(1.0, hx_max), 1.0, true));
  append_points(xs, graded_points(1.0, 1.0 + r, intervals_for(r, hx_max), g, true));

  std::vector<double> ys;
  append_points(ys, graded_points(-1.0, 0.0, intervals_for(1.0, h), g, false));
  append_points(ys, graded_points(0.0, top, rows, 1.0, true));
  append_points(ys, graded_points(top, 1.0, intervals_for(1.0 - top, h), g, true));

  auto inside = [&](double cx, double cy) {
    if (cx < 0.0 || cx > 1.0) return true;  // boxes span the full height
    return cy > 0.0 && cy < top;
  };
  auto region_of = [&](double cx, double) {
    if (cx < 0.0) return Region::OmegaLeft;
    if (cx > 1.0) return Region::OmegaRight;
    return Region::Channel;
  };
  QuadMesh mesh = cut_tensor_grid(MeshKind::Dumbbell, std::move(xs), std::move(ys), inside, region_of);
  tag_boundary_by_valence(mesh);
  return mesh;
}

QuadMesh build_channel_reference_mesh(int nx, int ny, const ProfileSpec& profile) {
  if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidArgument, "channel reference mesh needs nx, ny >= 2");
  if (!(profile.min_value() > 0.0)) throw Error(ErrorKind::NonPositiveProfile, "channel profile must be positive");
  QuadMesh mesh = cut_tensor_grid(
      MeshKind::ChannelReference, graded_points(0.0, 1.0, nx, 1.0, true), graded_points(0.0, 1.0, ny, 1.0, true),
      [](double, double) { return true; }, [](double, double) { return Region::Channel; });
  tag_boundary_by_valence(mesh);
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const double x = mesh.nodes[n].x;
    if (x == 0.0 || x == 1.0) mesh.boundary_tags[n] = BoundaryTag::ClampedSegment;
  }
  return mesh;
}

QuadMesh build_rectangle_mesh(double x0, double y0, double wx, double wy, int nx, int ny) {
  if (nx < 1 || ny < 1 || !(wx > 0.0) || !(wy > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "rectangle mesh needs positive sizes and counts");
  }
  QuadMesh mesh = cut_tensor_grid(
      MeshKind::Rectangle, graded_points(x0, x0 + wx, nx, 1.0, true), graded_points(y0, y0 + wy, ny, 1.0, true),
      [](double, double) { return true; }, [](double, double) { return Region::OmegaLeft; });
  tag_boundary_by_valence(mesh);
  return mesh;
}

IntervalMesh build_interval_mesh(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "interval mesh needs n >= 2");
  IntervalMesh mesh;
  mesh.h = 1.0 / n;
  mesh.nodes.resize(static_cast<std::size_t>(n) + 1);
  mesh.clamped.assign(static_cast<std::size_t>(n) + 1, false);
  for (int i = 0; i <= n; ++i) mesh.nodes[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
  mesh.clamped.front() = true;
  mesh.clamped.back() = true;
  return mesh;
}

QuadMesh extract_region(const QuadMesh& mesh, Region region) {
  if (!mesh.has_region_tags()) throw Error(ErrorKind::MissingTags, "mesh carries no region tags");
  QuadMesh sub;
  sub.kind = MeshKind::Box;
  std::vector<int> remap(mesh.nodes.size(), -1);
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    if (mesh.region_tags[e] != region) continue;
    for (int n : mesh.elems[e]) remap[static_cast<std::size_t>(n)] = 0;
  }
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    if (remap[n] < 0) continue;
    remap[n] = static_cast<int>(sub.nodes.size());
    sub.nodes.push_back(mesh.nodes[n]);
    sub.parent_node.push_back(static_cast<int>(n));
  }
  if (sub.nodes.empty()) throw Error(ErrorKind::MissingTags, "no elements carry region " + to_string(region));
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    if (mesh.region_tags[e] != region) continue;
    std::array<int, 4> local{};
    for (int k = 0; k < 4; ++k) local[static_cast<std::size_t>(k)] = remap[static_cast<std::size_t>(mesh.elems[e][static_cast<std::size_t>(k)])];
    sub.elems.push_back(local);
    sub.elem_size.push_back(mesh.elem_size[e]);
    sub.region_tags.push_back(region);
    sub.parent_elem.push_back(static_cast<int>(e));
  }
  for (double x : mesh.x_lines) {
    bool used = false;
    for (const auto& p : sub.nodes) used = used || p.x == x;
    if (used) sub.x_lines.push_back(x);
  }
  for (double y : mesh.y_lines) {
    bool used = false;
    for (const auto& p : sub.nodes) used = used || p.y == y;
    if (used) sub.y_lines.push_back(y);
  }
  tag_boundary_by_valence(sub);
  return sub;
}

bool check_conformity(const QuadMesh& mesh) {
  for (std::size_t e = 0; e < mesh.elems.size(); ++e) {
    const auto& s = mesh.elem_size[e];
    if (!(s.hx > 0.0) || !(s.hy > 0.0)) return false;
    const auto& en = mesh.elems[e];
    const Point p0 = mesh.nodes[static_cast<std::size_t>(en[0])];
    const Point expect[4] = {p0, {p0.x + s.hx, p0.y}, {p0.x + s.hx, p0.y + s.hy}, {p0.x, p0.y + s.hy}};
    for (int k = 0; k < 4; ++k) {
      const Point q = mesh.nodes[static_cast<std::size_t>(en[static_cast<std::size_t>(k)])];
      if (std::abs(q.x - expect[k].x) > 1e-12 || std::abs(q.y - expect[k].y) > 1e-12) return false;
    }
  }
  std::vector<Point> sorted = mesh.nodes;
  std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    // Nodes sharing an x line are compared along y; x lines differ by far more than 1e-14.
    if (std::abs(sorted[i].x - sorted[i - 1].x) <= 1e-14 && std::abs(sorted[i].y - sorted[i - 1].y) <= 1e-14) {
      return false;
    }
  }
  return true;
}

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Interior: return "Interior";
    case BoundaryTag::FreeBoundary: return "FreeBoundary";
    case BoundaryTag::ClampedSegment: return "ClampedSegment";
  }
  return "?";
}

std::string to_string(Region region) {
  switch (region) {
    case Region::OmegaLeft: return "OmegaLeft";
    case Region::OmegaRight: return "OmegaRight";
    case Region::Channel: return "Channel";
  }
  return "?";
}

std::string mesh_to_json(const QuadMesh& mesh) {
  nlohmann::json j;
  const char* kinds[] = {"dumbbell", "channel_reference", "box", "rectangle"};
  j["kind"] = kinds[static_cast<int>(mesh.kind)];
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& p : mesh.nodes) nodes.push_back({p.x, p.y});
  auto& elems = j["elems"] = nlohmann::json::array();
  for (const auto& e : mesh.elems) elems.push_back({e[0], e[1], e[2], e[3]});
  auto& sizes = j["elem_size"] = nlohmann::json::array();
  for (const auto& s : mesh.elem_size) sizes.push_back({s.hx, s.hy});
  auto& btags = j["boundary_tags"] = nlohmann::json::array();
  for (auto t : mesh.boundary_tags) btags.push_back(to_string(t));
  auto& rtags = j["region_tags"] = nlohmann::json::array();
  for (auto t : mesh.region_tags) rtags.push_back(to_string(t));
  return j.dump();
}

}  // namespace dumbbell
