#include "dumbbell/femcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>
#include <utility>

#include "dumbbell/error.hpp"
#include "dumbbell/simd/kernels.hpp"

namespace dumbbell {

namespace {

// Derivative rows of the feature matrix.
enum Feature { kU = 0, kUx, kUy, kUxx, kUxy, kUyy, kNumFeatures };

using Coeff6 = std::array<double, kNumFeatures * kNumFeatures>;

struct Hermite1D {
  // Value and first/second derivative (w.r.t. t in [0, 1]) of the four
  // cubic Hermite shape functions: value-at-0, slope-at-0, value-at-1, slope-at-1.
  std::array<double, 4> v, d1, d2;
};

Hermite1D hermite_at(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  Hermite1D h;
  h.v = {1.0 - 3.0 * t2 + 2.0 * t3, t - 2.0 * t2 + t3, 3.0 * t2 - 2.0 * t3, -t2 + t3};
  h.d1 = {-6.0 * t + 6.0 * t2, 1.0 - 4.0 * t + 3.0 * t2, 6.0 * t - 6.0 * t2, -2.0 * t + 3.0 * t2};
  h.d2 = {-6.0 + 12.0 * t, -4.0 + 6.0 * t, 6.0 - 12.0 * t, -2.0 + 6.0 * t};
  return h;
}

const MaterialParams* params_of(const FormKind& kind) {
  if (auto* p = std::get_if<PlateForm>(&kind)) return &p->params;
  if (auto* c = std::get_if<ChannelEpsForm>(&kind)) return &c->params;
  if (auto* l = std::get_if<Limit1DForm>(&kind)) return &l->params;
  return nullptr;
}

const ProfileSpec* profile_of(const FormKind& kind) {
  if (auto* c = std::get_if<ChannelEpsForm>(&kind)) return &c->profile;
  if (auto* w = std::get_if<WeightedMassForm>(&kind)) return &w->profile;
  if (auto* l = std::get_if<Limit1DForm>(&kind)) return &l->profile;
  return nullptr;
}

void validate_form(const FormKind& kind) {
  if (const auto* p = params_of(kind)) p->validate();
  if (const auto* c = std::get_if<ChannelEpsForm>(&kind)) {
    if (!(c->epsilon > 0.0)) throw Error(ErrorKind::InvalidEpsilon, "channel form needs epsilon > 0");
  }
}

// Physical-space coefficient matrix of the plate energy with the thin
// direction scaled by 1/eps (eps = 1 gives the plain plate form).
Coeff6 plate_coefficients(const MaterialParams& p, double eps) {
  Coeff6 c{};
  const double e2 = 1.0 / (eps * eps);
  const double e4 = e2 * e2;
  c[kU * kNumFeatures + kU] = 1.0;
  c[kUx * kNumFeatures + kUx] = p.tau;
  c[kUy * kNumFeatures + kUy] = p.tau * e2;
  c[kUxx * kNumFeatures + kUxx] = 1.0;
  c[kUyy * kNumFeatures + kUyy] = e4;
  c[kUxy * kNumFeatures + kUxy] = 2.0 * (1.0 - p.sigma) * e2;
  c[kUxx * kNumFeatures + kUyy] = p.sigma * e2;
  c[kUyy * kNumFeatures + kUxx] = p.sigma * e2;
  return c;
}

// Chain rule for u(x, y) = U(x, y / g(x)): rows give physical derivatives
// (u, u_x, u_y, u_xx, u_xy, u_yy) as combinations of reference derivatives
// (U, U_x, U_s, U_xx, U_xs, U_ss).
Coeff6 profile_jacobian(double s, double g, double g1, double g2) {
  Coeff6 t{};
  const double sx = -s * g1 / g;
  const double sxx = s * (2.0 * g1 * g1 - g * g2) / (g * g);
  auto at = [&](int r, int c) -> double& { return t[static_cast<std::size_t>(r * kNumFeatures + c)]; };
  at(kU, kU) = 1.0;
  at(kUx, kUx) = 1.0;
  at(kUx, kUy) = sx;
  at(kUy, kUy) = 1.0 / g;
  at(kUxx, kUxx) = 1.0;
  at(kUxx, kUxy) = 2.0 * sx;
  at(kUxx, kUyy) = sx * sx;
  at(kUxx, kUy) = sxx;
  at(kUxy, kUxy) = 1.0 / g;
  at(kUxy, kUyy) = sx / g;
  at(kUxy, kUy) = -g1 / (g * g);
  at(kUyy, kUyy) = 1.0 / (g * g);
  return t;
}

// C_ref = w * T^T C T
Coeff6 congruence(const Coeff6& c, const Coeff6& t, double w) {
  Coeff6 ct{};
  for (int i = 0; i < kNumFeatures; ++i)
    for (int j = 0; j < kNumFeatures; ++j) {
      double acc = 0.0;
      for (int k = 0; k < kNumFeatures; ++k) acc += c[static_cast<std::size_t>(i * kNumFeatures + k)] * t[static_cast<std::size_t>(k * kNumFeatures + j)];
      ct[static_cast<std::size_t>(i * kNumFeatures + j)] = acc;
    }
  Coeff6 out{};
  for (int i = 0; i < kNumFeatures; ++i)
    for (int j = 0; j < kNumFeatures; ++j) {
      double acc = 0.0;
      for (int k = 0; k < kNumFeatures; ++k) acc += t[static_cast<std::size_t>(k * kNumFeatures + i)] * ct[static_cast<std::size_t>(k * kNumFeatures + j)];
      out[static_cast<std::size_t>(i * kNumFeatures + j)] = w * acc;
    }
  return out;
}

// Coefficient matrix (in the element's own coordinates) at a quadrature point.
Coeff6 coefficients_at(const FormKind& kind, double x, double y) {
  if (const auto* p = std::get_if<PlateForm>(&kind)) return plate_coefficients(p->params, 1.0);
  if (std::holds_alternative<MassForm>(kind)) {
    Coeff6 c{};
    c[kU * kNumFeatures + kU] = 1.0;
    return c;
  }
  const ProfileSpec& prof = *profile_of(kind);
  const double g = prof.value(x);
  if (!(g > 0.0)) {
    throw Error(ErrorKind::SingularElement, "non-positive profile value " + std::to_string(g) + " at x = " + std::to_string(x));
  }
  if (std::holds_alternative<WeightedMassForm>(kind)) {
    Coeff6 c{};
    c[kU * kNumFeatures + kU] = g;
    return c;
  }
  const auto& ch = std::get<ChannelEpsForm>(kind);
  const Coeff6 phys = plate_coefficients(ch.params, ch.epsilon);
  return congruence(phys, profile_jacobian(y, g, prof.d1(x), prof.d2(x)), g);
}

int default_quad_points(const FormKind& kind) {
  const ProfileSpec* prof = profile_of(kind);
  return (prof != nullptr && !prof->is_constant()) ? 6 : 4;
}

// Feature matrix D[r * 16 + i]: derivative r of local shape function i.
void bfs_features(double xi, double eta, double hx, double hy, std::array<double, kNumFeatures * 16>& d) {
  static constexpr int kCornerX[4] = {0, 1, 1, 0};
  static constexpr int kCornerY[4] = {0, 0, 1, 1};
  const Hermite1D hxs = hermite_at(xi);
  const Hermite1D hys = hermite_at(eta);
  for (int a = 0; a < 4; ++a) {
    const int cx = kCornerX[a];
    const int cy = kCornerY[a];
    for (int k = 0; k < 4; ++k) {
      // k: 0 value, 1 d/dx, 2 d/dy, 3 d2/dxdy DOF
      const bool xs = (k == 1 || k == 3);
      const bool ys = (k == 2 || k == 3);
      const int fx = 2 * cx + (xs ? 1 : 0);
      const int fy = 2 * cy + (ys ? 1 : 0);
      const double sx = xs ? hx : 1.0;
      const double sy = ys ? hy : 1.0;
      const double X = sx * hxs.v[static_cast<std::size_t>(fx)];
      const double X1 = sx * hxs.d1[static_cast<std::size_t>(fx)] / hx;
      const double X2 = sx * hxs.d2[static_cast<std::size_t>(fx)] / (hx * hx);
      const double Y = sy * hys.v[static_cast<std::size_t>(fy)];
      const double Y1 = sy * hys.d1[static_cast<std::size_t>(fy)] / hy;
      const double Y2 = sy * hys.d2[static_cast<std::size_t>(fy)] / (hy * hy);
      const auto i = static_cast<std::size_t>(4 * a + k);
      d[kU * 16 + i] = X * Y;
      d[kUx * 16 + i] = X1 * Y;
      d[kUy * 16 + i] = X * Y1;
      d[kUxx * 16 + i] = X2 * Y;
      d[kUxy * 16 + i] = X1 * Y1;
      d[kUyy * 16 + i] = X * Y2;
    }
  }
}

// Ascending monomial coefficients of the reference Hermite cubics on [0, 1].
constexpr long long kHermiteCoeff[4][4] = {{1, 0, -3, 2}, {0, 1, -2, 1}, {0, 0, 3, -2}, {0, 0, -1, 1}};

// M[i][j] = integral over [0, h] of D^p phi_i * D^q phi_j, slope functions
// scaled by h. The reference integrals are evaluated exactly as n / 420.
std::array<double, 16> hermite_moment(int p, int q, double h) {
  std::array<double, 16> out{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      long long a[4] = {};
      long long b[4] = {};
      for (int k = 0; k < 4; ++k) {
        a[k] = kHermiteCoeff[i][k];
        b[k] = kHermiteCoeff[j][k];
      }
      for (int d = 0; d < p; ++d)
        for (int k = 0; k < 4; ++k) a[k] = (k + 1 < 4) ? (k + 1) * a[k + 1] : 0;
      for (int d = 0; d < q; ++d)
        for (int k = 0; k < 4; ++k) b[k] = (k + 1 < 4) ? (k + 1) * b[k + 1] : 0;
      long long num = 0;
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) num += a[k] * b[l] * (420 / (k + l + 1));
      const int e = 1 - p - q + (i % 2) + (j % 2);
      out[static_cast<std::size_t>(i * 4 + j)] = (static_cast<double>(num) / 420.0) * std::pow(h, e);
    }
  }
  return out;
}

bool position_independent(const FormKind& kind) {
  const ProfileSpec* prof = profile_of(kind);
  return prof == nullptr || prof->is_constant();
}

// Tensor-product element matrix for a constant coefficient matrix.
ElementMatrix16 bfs_exact(const ElementGeometry& geo, const Coeff6& c) {
  static constexpr int kOrderX[kNumFeatures] = {0, 1, 0, 2, 1, 0};
  static constexpr int kOrderY[kNumFeatures] = {0, 0, 1, 0, 1, 2};
  static constexpr int kCornerX[4] = {0, 1, 1, 0};
  static constexpr int kCornerY[4] = {0, 0, 1, 1};
  ElementMatrix16 k{};
  for (int r = 0; r < kNumFeatures; ++r) {
    for (int s = 0; s < kNumFeatures; ++s) {
      const double crs = c[static_cast<std::size_t>(r * kNumFeatures + s)];
      if (crs == 0.0) continue;
      const auto mx = hermite_moment(kOrderX[r], kOrderX[s], geo.hx);
      const auto my = hermite_moment(kOrderY[r], kOrderY[s], geo.hy);
      for (int a = 0; a < 4; ++a)
        for (int ka = 0; ka < 4; ++ka) {
          const int fxa = 2 * kCornerX[a] + ((ka == 1 || ka == 3) ? 1 : 0);
          const int fya = 2 * kCornerY[a] + ((ka == 2 || ka == 3) ? 1 : 0);
          for (int b = 0; b < 4; ++b)
            for (int kb = 0; kb < 4; ++kb) {
              const int fxb = 2 * kCornerX[b] + ((kb == 1 || kb == 3) ? 1 : 0);
              const int fyb = 2 * kCornerY[b] + ((kb == 2 || kb == 3) ? 1 : 0);
              k[static_cast<std::size_t>((4 * a + ka) * 16 + 4 * b + kb)] +=
                  crs * mx[static_cast<std::size_t>(fxa * 4 + fxb)] * my[static_cast<std::size_t>(fya * 4 + fyb)];
            }
        }
    }
  }
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = i + 1; j < 16; ++j) {
      const double v = 0.5 * (k[i * 16 + j] + k[j * 16 + i]);
      k[i * 16 + j] = v;
      k[j * 16 + i] = v;
    }
  }
  return k;
}

}  // namespace

QuadratureRule gauss_legendre_unit(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "quadrature needs at least one point");
  QuadratureRule rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const auto ui = static_cast<std::size_t>(n - 1 - i);
    rule.points[ui] = 0.5 * (x + 1.0);
    rule.weights[ui] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)p'^2) scaled by 1/2
  }
  return rule;
}

ElementMatrix16 bfs_element_matrix(const ElementGeometry& geo, const FormKind& kind, int quad_points) {
  if (!(geo.hx > 0.0) || !(geo.hy > 0.0)) throw Error(ErrorKind::InvalidArgument, "element sizes must be positive");
  if (std::holds_alternative<Limit1DForm>(kind)) {
    throw Error(ErrorKind::IncompatibleMesh, "the 1D limit form has no 2D element");
  }
  validate_form(kind);
  if (quad_points == 0 && position_independent(kind)) {
    return bfs_exact(geo, coefficients_at(kind, geo.x0, geo.y0));
  }
  const int nq = quad_points > 0 ? quad_points : default_quad_points(kind);
  const QuadratureRule rule = gauss_legendre_unit(nq);
  const auto& kernels = simd::active();

  ElementMatrix16 k{};
  std::array<double, kNumFeatures * 16> d{};
  std::array<double, kNumFeatures * 16> cd{};
  const double jac = geo.hx * geo.hy;
  for (int qx = 0; qx < nq; ++qx) {
    for (int qy = 0; qy < nq; ++qy) {
      const double xi = rule.points[static_cast<std::size_t>(qx)];
      const double eta = rule.points[static_cast<std::size_t>(qy)];
      const double w = rule.weights[static_cast<std::size_t>(qx)] * rule.weights[static_cast<std::size_t>(qy)] * jac;
      bfs_features(xi, eta, geo.hx, geo.hy, d);
      const Coeff6 c = coefficients_at(kind, geo.x0 + xi * geo.hx, geo.y0 + eta * geo.hy);
      for (int r = 0; r < kNumFeatures; ++r) {
        for (int i = 0; i < 16; ++i) {
          double acc = 0.0;
          for (int s = 0; s < kNumFeatures; ++s) acc += c[static_cast<std::size_t>(r * kNumFeatures + s)] * d[static_cast<std::size_t>(s * 16 + i)];
          cd[static_cast<std::size_t>(r * 16 + i)] = acc;
        }
      }
      kernels.outer_accumulate16(d.data(), cd.data(), kNumFeatures, w, k.data());
    }
  }
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = i + 1; j < 16; ++j) {
      const double s = 0.5 * (k[i * 16 + j] + k[j * 16 + i]);
      k[i * 16 + j] = s;
      k[j * 16 + i] = s;
    }
  }
  return k;
}

ElementMatrix4 hermite1d_element(double x0, double h, const FormKind& kind, int quad_points) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "element length must be positive");
  double bend = 0.0;
  double stretch = 0.0;
  const ProfileSpec* prof = nullptr;
  if (const auto* l = std::get_if<Limit1DForm>(&kind)) {
    l->params.validate();
    bend = 1.0 - l->params.sigma * l->params.sigma;
    stretch = l->params.tau;
    prof = &l->profile;
  } else if (const auto* w = std::get_if<WeightedMassForm>(&kind)) {
    prof = &w->profile;
  } else {
    throw Error(ErrorKind::IncompatibleMesh, "1D elements accept only Limit1DForm or WeightedMassForm");
  }
  if (quad_points == 0 && prof->is_constant()) {
    const double g = prof->constant_value();
    if (!(g > 0.0)) throw Error(ErrorKind::NonPositiveWeight, "profile weight " + std::to_string(g) + " is not positive");
    const auto m0 = hermite_moment(0, 0, h);
    const auto m1 = hermite_moment(1, 1, h);
    const auto m2 = hermite_moment(2, 2, h);
    ElementMatrix4 k{};
    for (std::size_t i = 0; i < 16; ++i) k[i] = g * (bend * m2[i] + stretch * m1[i] + m0[i]);
    return k;
  }
  const QuadratureRule rule = gauss_legendre_unit(quad_points > 0 ? quad_points : 6);
  ElementMatrix4 k{};
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double t = rule.points[q];
    const double g = prof->value(x0 + t * h);
    if (!(g > 0.0)) throw Error(ErrorKind::NonPositiveWeight, "profile weight " + std::to_string(g) + " is not positive");
    const Hermite1D b = hermite_at(t);
    std::array<double, 4> v{}, d1{}, d2{};
    for (std::size_t i = 0; i < 4; ++i) {
      const double scale = (i % 2 == 1) ? h : 1.0;
      v[i] = scale * b.v[i];
      d1[i] = scale * b.d1[i] / h;
      d2[i] = scale * b.d2[i] / (h * h);
    }
    const double w = rule.weights[q] * h * g;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) k[i * 4 + j] += w * (bend * d2[i] * d2[j] + stretch * d1[i] * d1[j] + v[i] * v[j]);
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      const double s = 0.5 * (k[i * 4 + j] + k[j * 4 + i]);
      k[i * 4 + j] = s;
      k[j * 4 + i] = s;
    }
  return k;
}

DofMap::DofMap(std::size_t num_nodes, int dofs_per_node)
    : dofs_per_node_(dofs_per_node),
      num_nodes_(num_nodes),
      constrained_(num_nodes * static_cast<std::size_t>(dofs_per_node), 0) {
  renumber();
}

DofMap DofMap::for_interval(const IntervalMesh& mesh) {
  DofMap map(mesh.nodes.size(), 2);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (mesh.clamped[i]) map.constrain_node(i);
  }
  return map;
}

void DofMap::constrain_node(std::size_t node) {
  const auto dpn = static_cast<std::size_t>(dofs_per_node_);
  for (std::size_t k = 0; k < dpn; ++k) constrained_[node * dpn + k] = 1;
  renumber();
}

void DofMap::renumber() {
  free_index_.assign(constrained_.size(), -1);
  num_free_ = 0;
  for (std::size_t i = 0; i < constrained_.size(); ++i) {
    if (!constrained_[i]) free_index_[i] = num_free_++;
  }
}

Vector DofMap::expand(const Vector& free) const {
  if (free.size() != static_cast<std::size_t>(num_free_)) throw Error(ErrorKind::DimensionMismatch, "free vector length mismatch");
  Vector full(constrained_.size(), 0.0);
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (free_index_[i] >= 0) full[i] = free[static_cast<std::size_t>(free_index_[i])];
  }
  return full;
}

Vector DofMap::restrict_to_free(const Vector& full) const {
  if (full.size() != constrained_.size()) throw Error(ErrorKind::DimensionMismatch, "full vector length mismatch");
  Vector free(static_cast<std::size_t>(num_free_));
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (free_index_[i] >= 0) free[static_cast<std::size_t>(free_index_[i])] = full[i];
  }
  return free;
}

DofMap apply_clamped_constraints(const QuadMesh& mesh, const DofMap& dofmap, ClampWhere where) {
  if (mesh.boundary_tags.size() != mesh.nodes.size()) throw Error(ErrorKind::MissingTags, "mesh has no boundary tags");
  DofMap out = dofmap;
  std::size_t count = 0;
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const BoundaryTag t = mesh.boundary_tags[n];
    const bool clamp = (where == ClampWhere::ChannelEnds) ? t == BoundaryTag::ClampedSegment : t != BoundaryTag::Interior;
    if (clamp) {
      out.constrain_node(n);
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::NoTaggedNodes, "no nodes carry the requested clamp tag");
  return out;
}

SparseSym assemble(const QuadMesh& mesh, const DofMap& dofmap, const FormKind& kind) {
  if (std::holds_alternative<Limit1DForm>(kind)) throw Error(ErrorKind::IncompatibleMesh, "Limit1DForm needs an interval mesh");
  const bool needs_reference = std::holds_alternative<ChannelEpsForm>(kind) || std::holds_alternative<WeightedMassForm>(kind);
  if (needs_reference && mesh.kind != MeshKind::ChannelReference) {
    throw Error(ErrorKind::IncompatibleMesh, "channel forms require the channel reference mesh");
  }
  if (dofmap.num_nodes() != mesh.num_nodes() || dofmap.dofs_per_node() != 4) {
    throw Error(ErrorKind::IncompatibleMesh, "DOF map does not match the mesh");
  }
  validate_form(kind);

  const ProfileSpec* prof = profile_of(kind);
  const bool position_dependent = prof != nullptr && !prof->is_constant();
  std::map<std::pair<double, double>, ElementMatrix16> cache;

  std::vector<Triplet> triplets;
  triplets.reserve(mesh.num_elems() * 136);
  for (std::size_t e = 0; e < mesh.num_elems(); ++e) {
    const auto& en = mesh.elems[e];
    const ElemSize s = mesh.elem_size[e];
    const Point p0 = mesh.origin(e);
    const ElementMatrix16* ke = nullptr;
    ElementMatrix16 local;
    if (position_dependent) {
      local = bfs_element_matrix({p0.x, p0.y, s.hx, s.hy}, kind);
      ke = &local;
    } else {
      auto key = std::make_pair(s.hx, s.hy);
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, bfs_element_matrix({p0.x, p0.y, s.hx, s.hy}, kind)).first;
      ke = &it->second;
    }
    std::array<int, 16> gdof{};
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t k = 0; k < 4; ++k) {
        gdof[4 * a + k] = dofmap.free_index(static_cast<std::size_t>(en[a]) * 4 + k);
      }
    for (std::size_t i = 0; i < 16; ++i) {
      if (gdof[i] < 0) continue;
      for (std::size_t j = 0; j < 16; ++j) {
        if (gdof[j] < gdof[i]) continue;
        triplets.push_back({gdof[i], gdof[j], (*ke)[i * 16 + j]});
      }
    }
  }
  return SparseSym::from_triplets(dofmap.num_free(), std::move(triplets));
}

SparseSym assemble_1d(const IntervalMesh& mesh, const DofMap& dofmap, const FormKind& kind) {
  if (dofmap.num_nodes() != mesh.nodes.size() || dofmap.dofs_per_node() != 2) {
    throw Error(ErrorKind::IncompatibleMesh, "DOF map does not match the interval mesh");
  }
  std::vector<Triplet> triplets;
  for (std::size_t e = 0; e + 1 < mesh.nodes.size(); ++e) {
    const double x0 = mesh.nodes[e];
    const ElementMatrix4 ke = hermite1d_element(x0, mesh.nodes[e + 1] - x0, kind);
    std::array<int, 4> gdof{};
    for (std::size_t k = 0; k < 4; ++k) gdof[k] = dofmap.free_index(2 * e + k);
    for (std::size_t i = 0; i < 4; ++i) {
      if (gdof[i] < 0) continue;
      for (std::size_t j = 0; j < 4; ++j) {
        if (gdof[j] < gdof[i]) continue;
        triplets.push_back({gdof[i], gdof[j], ke[i * 4 + j]});
      }
    }
  }
  return SparseSym::from_triplets(dofmap.num_free(), std::move(triplets));
}

std::vector<double> energy_gram(const QuadMesh& mesh, const DofMap& dofmap, const FormKind& kind, const std::vector<Vector>& z) {
  if (std::holds_alternative<Limit1DForm>(kind)) throw Error(ErrorKind::IncompatibleMesh, "Limit1DForm needs an interval mesh");
  if (dofmap.num_nodes() != mesh.num_nodes() || dofmap.dofs_per_node() != 4) {
    throw Error(ErrorKind::IncompatibleMesh, "DOF map does not match the mesh");
  }
  validate_form(kind);
  const std::size_t k = z.size();
  for (const auto& v : z) {
    if (v.size() != static_cast<std::size_t>(dofmap.num_free())) throw Error(ErrorKind::DimensionMismatch, "vector length differs from free DOFs");
  }
  const int nq = default_quad_points(kind);
  const QuadratureRule rule = gauss_legendre_unit(nq);
  std::vector<double> gram(k * k, 0.0);
  std::vector<double> local(k * 16);
  std::vector<double> feat(k * kNumFeatures);
  std::vector<double> cfeat(k * kNumFeatures);
  std::array<double, kNumFeatures * 16> d{};
  for (std::size_t e = 0; e < mesh.num_elems(); ++e) {
    const auto& en = mesh.elems[e];
    const ElemSize sz = mesh.elem_size[e];
    const Point p0 = mesh.origin(e);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t m = 0; m < 4; ++m) {
        const int g = dofmap.free_index(static_cast<std::size_t>(en[a]) * 4 + m);
        for (std::size_t i = 0; i < k; ++i) local[i * 16 + 4 * a + m] = g < 0 ? 0.0 : z[i][static_cast<std::size_t>(g)];
      }
    for (int qx = 0; qx < nq; ++qx) {
      for (int qy = 0; qy < nq; ++qy) {
        const double xi = rule.points[static_cast<std::size_t>(qx)];
        const double eta = rule.points[static_cast<std::size_t>(qy)];
        const double w = rule.weights[static_cast<std::size_t>(qx)] * rule.weights[static_cast<std::size_t>(qy)] * sz.hx * sz.hy;
        bfs_features(xi, eta, sz.hx, sz.hy, d);
        const Coeff6 c = coefficients_at(kind, p0.x + xi * sz.hx, p0.y + eta * sz.hy);
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t r = 0; r < kNumFeatures; ++r) {
            double acc = 0.0;
            for (std::size_t l = 0; l < 16; ++l) acc += d[r * 16 + l] * local[i * 16 + l];
            feat[i * kNumFeatures + r] = acc;
          }
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t r = 0; r < kNumFeatures; ++r) {
            double acc = 0.0;
            for (std::size_t s2 = 0; s2 < kNumFeatures; ++s2) acc += c[r * kNumFeatures + s2] * feat[i * kNumFeatures + s2];
            cfeat[i * kNumFeatures + r] = acc;
          }
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < kNumFeatures; ++r) acc += feat[i * kNumFeatures + r] * cfeat[j * kNumFeatures + r];
            gram[i * k + j] += w * acc;
          }
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) gram[j * k + i] = gram[i * k + j];
  return gram;
}

std::vector<double> energy_gram_1d(const IntervalMesh& mesh, const DofMap& dofmap, const FormKind& kind, const std::vector<Vector>& z) {
  if (dofmap.num_nodes() != mesh.nodes.size() || dofmap.dofs_per_node() != 2) {
    throw Error(ErrorKind::IncompatibleMesh, "DOF map does not match the interval mesh");
  }
  double bend = 0.0;
  double stretch = 0.0;
  const ProfileSpec* prof = nullptr;
  if (const auto* l = std::get_if<Limit1DForm>(&kind)) {
    l->params.validate();
    bend = 1.0 - l->params.sigma * l->params.sigma;
    stretch = l->params.tau;
    prof = &l->profile;
  } else if (const auto* wm = std::get_if<WeightedMassForm>(&kind)) {
    prof = &wm->profile;
  } else {
    throw Error(ErrorKind::IncompatibleMesh, "1D elements accept only Limit1DForm or WeightedMassForm");
  }
  const std::size_t k = z.size();
  const QuadratureRule rule = gauss_legendre_unit(prof->is_constant() ? 4 : 6);
  std::vector<double> gram(k * k, 0.0);
  std::vector<double> local(k * 4);
  std::vector<double> v(k), d1(k), d2(k);
  for (std::size_t e = 0; e + 1 < mesh.nodes.size(); ++e) {
    const double x0 = mesh.nodes[e];
    const double h = mesh.nodes[e + 1] - x0;
    for (std::size_t m = 0; m < 4; ++m) {
      const int g = dofmap.free_index(2 * e + m);
      for (std::size_t i = 0; i < k; ++i) local[i * 4 + m] = g < 0 ? 0.0 : z[i][static_cast<std::size_t>(g)];
    }
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = rule.points[q];
      const double g = prof->value(x0 + t * h);
      if (!(g > 0.0)) throw Error(ErrorKind::NonPositiveWeight, "profile weight " + std::to_string(g) + " is not positive");
      const Hermite1D b = hermite_at(t);
      for (std::size_t i = 0; i < k; ++i) {
        double a0 = 0.0, a1 = 0.0, a2 = 0.0;
        for (std::size_t m = 0; m < 4; ++m) {
          const double u = local[i * 4 + m] * ((m % 2 == 1) ? h : 1.0);
          a0 += b.v[m] * u;
          a1 += b.d1[m] * u;
          a2 += b.d2[m] * u;
        }
        v[i] = a0;
        d1[i] = a1 / h;
        d2[i] = a2 / (h * h);
      }
      const double w = rule.weights[q] * h * g;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j <= i; ++j) gram[i * k + j] += w * (bend * d2[i] * d2[j] + stretch * d1[i] * d1[j] + v[i] * v[j]);
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) gram[j * k + i] = gram[i * k + j];
  return gram;
}

Vector constant_field(const DofMap& dofmap) {
  Vector full(dofmap.total_dofs(), 0.0);
  const auto dpn = static_cast<std::size_t>(dofmap.dofs_per_node());
  for (std::size_t n = 0; n < dofmap.num_nodes(); ++n) full[n * dpn] = 1.0;
  return dofmap.restrict_to_free(full);
}

SampledFunction average_M(const DiscreteField& field) {
  if (!field.mesh || field.mesh->kind != MeshKind::ChannelReference) {
    throw Error(ErrorKind::IncompatibleMesh, "averaging needs a field on the channel reference mesh");
  }
  const QuadMesh& mesh = *field.mesh;
  const Vector full = field.dofmap.expand(field.dofs);
  SampledFunction out;
  out.x = mesh.x_lines;
  out.value.assign(out.x.size(), 0.0);
  out.slope.assign(out.x.size(), 0.0);

  // Nodes of each vertical line ordered by s.
  std::vector<std::vector<std::size_t>> columns(out.x.size());
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const auto it = std::lower_bound(out.x.begin(), out.x.end(), mesh.nodes[n].x - 1e-14);
    columns[static_cast<std::size_t>(it - out.x.begin())].push_back(n);
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto& col = columns[c];
    std::sort(col.begin(), col.end(), [&](std::size_t a, std::size_t b) { return mesh.nodes[a].y < mesh.nodes[b].y; });
    double v = 0.0;
    double sl = 0.0;
    for (std::size_t k = 0; k + 1 < col.size(); ++k) {
      const double h = mesh.nodes[col[k + 1]].y - mesh.nodes[col[k]].y;
      const double* a = &full[col[k] * 4];
      const double* b = &full[col[k + 1] * 4];
      // Exact integral of a cubic Hermite segment: h(u0+u1)/2 + h^2(u0'-u1')/12.
      v += 0.5 * h * (a[0] + b[0]) + h * h * (a[2] - b[2]) / 12.0;
      sl += 0.5 * h * (a[1] + b[1]) + h * h * (a[3] - b[3]) / 12.0;
    }
    out.value[c] = v;
    out.slope[c] = sl;
  }
  return out;
}

DiscreteField extend_E(const SampledFunction& v, std::shared_ptr<const QuadMesh> mesh, const DofMap& dofmap) {
  if (!mesh) throw Error(ErrorKind::InvalidArgument, "extension needs a mesh");
  if (v.x.size() != mesh->x_lines.size() || v.value.size() != v.x.size() || v.slope.size() != v.x.size()) {
    throw Error(ErrorKind::StationMismatch, "station count does not match the mesh x lines");
  }
  for (std::size_t i = 0; i < v.x.size(); ++i) {
    if (std::abs(v.x[i] - mesh->x_lines[i]) > 1e-12) {
      throw Error(ErrorKind::StationMismatch, "station " + std::to_string(i) + " is not a mesh x line");
    }
  }
  Vector full(mesh->num_nodes() * 4, 0.0);
  for (std::size_t n = 0; n < mesh->num_nodes(); ++n) {
    const auto it = std::lower_bound(mesh->x_lines.begin(), mesh->x_lines.end(), mesh->nodes[n].x - 1e-14);
    const auto c = static_cast<std::size_t>(it - mesh->x_lines.begin());
    full[n * 4] = v.value[c];
    full[n * 4 + 1] = v.slope[c];
  }
  DiscreteField out;
  out.dofmap = dofmap;
  out.dofs = dofmap.restrict_to_free(full);
  out.mesh = std::move(mesh);
  out.meta.domain_kind = "extension";
  return out;
}

SampledFunction interval_function(const IntervalMesh& mesh, const DofMap& dofmap, const Vector& free) {
  const Vector full = dofmap.expand(free);
  SampledFunction f;
  f.x = mesh.nodes;
  f.value.resize(mesh.nodes.size());
  f.slope.resize(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    f.value[i] = full[2 * i];
    f.slope[i] = full[2 * i + 1];
  }
  return f;
}

SparseSym broken_mass(const QuadMesh& mesh) {
  std::map<std::pair<double, double>, ElementMatrix16> cache;
  std::vector<std::vector<double>> blocks;
  blocks.reserve(mesh.num_elems());
  for (std::size_t e = 0; e < mesh.num_elems(); ++e) {
    const ElemSize s = mesh.elem_size[e];
    auto key = std::make_pair(s.hx, s.hy);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, bfs_element_matrix({0.0, 0.0, s.hx, s.hy}, MassForm{})).first;
    blocks.emplace_back(it->second.begin(), it->second.end());
  }
  return SparseSym::block_diagonal(blocks, 16);
}

Vector to_broken(const QuadMesh& mesh, const DofMap& dofmap, const Vector& free, const std::vector<bool>& keep) {
  const Vector full = dofmap.expand(free);
  Vector out(mesh.num_elems() * 16, 0.0);
  for (std::size_t e = 0; e < mesh.num_elems(); ++e) {
    if (!keep.empty() && !keep[e]) continue;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t k = 0; k < 4; ++k) out[e * 16 + 4 * a + k] = full[static_cast<std::size_t>(mesh.elems[e][a]) * 4 + k];
  }
  return out;
}

double region_mass(const QuadMesh& mesh, const DofMap& dofmap, const Vector& free, Region region) {
  if (!mesh.has_region_tags()) throw Error(ErrorKind::MissingTags, "mesh carries no region tags");
  const Vector full = dofmap.expand(free);
  std::map<std::pair<double, double>, ElementMatrix16> cache;
  double total = 0.0;
  std::array<double, 16> u{};
  for (std::size_t e = 0; e < mesh.num_elems(); ++e) {
    if (mesh.region_tags[e] != region) continue;
    const ElemSize s = mesh.elem_size[e];
    auto key = std::make_pair(s.hx, s.hy);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, bfs_element_matrix({0.0, 0.0, s.hx, s.hy}, MassForm{})).first;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t k = 0; k < 4; ++k) u[4 * a + k] = full[static_cast<std::size_t>(mesh.elems[e][a]) * 4 + k];
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j) total += u[i] * it->second[i * 16 + j] * u[j];
  }
  return total;
}

}  // namespace dumbbell
