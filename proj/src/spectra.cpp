#include "dumbbell/spectra.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "dumbbell/error.hpp"

namespace dumbbell {

namespace {

void require_ascending(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1] || std::isnan(v[i])) {
      throw Error(ErrorKind::UnsortedInput, std::string(what) + " is not ascending at position " + std::to_string(i));
    }
  }
}

Spectrum values_only(std::vector<double> values) {
  Spectrum s;
  s.values = std::move(values);
  return s;
}

std::size_t box_k(const DofMap& dm, int k) {
  return static_cast<std::size_t>(std::min(k, dm.num_free() - 1));
}

}  // namespace

std::string to_string(ModeSource source) { return source == ModeSource::Omega ? "omega" : "channel"; }

MergedSpectrum merge(const std::vector<double>& omega, const std::vector<double>& theta) {
  require_ascending(omega, "omega spectrum");
  require_ascending(theta, "channel spectrum");
  MergedSpectrum out;
  out.values.reserve(omega.size() + theta.size());
  out.tags.reserve(omega.size() + theta.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < omega.size() || j < theta.size()) {
    if (j == theta.size() || (i < omega.size() && omega[i] <= theta[j])) {
      out.values.push_back(omega[i]);
      out.tags.push_back({ModeSource::Omega, i++});
    } else {
      out.values.push_back(theta[j]);
      out.tags.push_back({ModeSource::Channel, j++});
    }
  }
  return out;
}

std::vector<double> merge_values(const std::vector<double>& a, const std::vector<double>& b) {
  return merge(a, b).values;
}

double multiset_distance(std::vector<double> a, std::vector<double> b, std::size_t n) {
  if (a.size() < n || b.size() < n) throw Error(ErrorKind::InsufficientEigenpairs, "multiset distance needs n entries in both lists");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::abs(b[i]));
  return worst;
}

Localization localize(const QuadMesh& mesh, const DofMap& dofmap, const Vector& free) {
  if (!mesh.has_region_tags()) throw Error(ErrorKind::MissingTags, "localization needs region tags");
  const double channel = region_mass(mesh, dofmap, free, Region::Channel);
  const double omega =
      region_mass(mesh, dofmap, free, Region::OmegaLeft) + region_mass(mesh, dofmap, free, Region::OmegaRight);
  const double total = channel + omega;
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "cannot localize a zero field");
  Localization loc;
  loc.mass_channel = channel / total;
  loc.mass_omega = 1.0 - loc.mass_channel;
  return loc;
}

Localization localize(const DiscreteField& field) {
  if (!field.mesh) throw Error(ErrorKind::MissingTags, "field has no mesh");
  return localize(*field.mesh, field.dofmap, field.dofs);
}

std::vector<Divider> find_divider(const MergedSpectrum& merged, double gap_rel) {
  std::vector<Divider> out;
  for (std::size_t i = 0; i + 1 < merged.values.size(); ++i) {
    const double lo = merged.values[i];
    const double hi = merged.values[i + 1];
    if (hi > 0.0 && (hi - lo) / hi >= gap_rel) out.push_back({0.5 * (lo + hi), i + 1});
  }
  return out;
}

DecompositionReport decompose(const Spectrum& dumbbell, const Spectrum& omega, const Spectrum& theta, std::size_t N,
                              const std::vector<Localization>& localizations, double gap_rel) {
  const MergedSpectrum merged = merge(omega.values, theta.values);
  if (N > dumbbell.size() || N > merged.size()) {
    throw Error(ErrorKind::InsufficientEigenpairs, "decomposition of " + std::to_string(N) + " modes needs " +
                                                       std::to_string(N) + " dumbbell and merged eigenvalues");
  }
  if (!localizations.empty() && localizations.size() < N) {
    throw Error(ErrorKind::InsufficientEigenpairs, "fewer localizations than compared modes");
  }
  DecompositionReport report;
  for (std::size_t n = 0; n < N; ++n) {
    DecompositionRow row;
    row.n = n + 1;
    row.lambda = dumbbell.values[n];
    row.merged = merged.values[n];
    row.tag = merged.tags[n];
    row.deviation = std::abs(row.lambda - row.merged) / std::abs(row.merged);
    if (!localizations.empty()) {
      row.localization = localizations[n];
      row.has_localization = true;
    }
    report.max_deviation = std::max(report.max_deviation, row.deviation);
    report.rows.push_back(row);
  }
  if (N > 0) {
    report.multiset_deviation = multiset_distance(
        std::vector<double>(dumbbell.values.begin(), dumbbell.values.begin() + static_cast<std::ptrdiff_t>(N)),
        std::vector<double>(merged.values.begin(), merged.values.begin() + static_cast<std::ptrdiff_t>(N)), N);
  }
  for (const Divider& d : find_divider(merged, gap_rel)) {
    if (d.count >= N) {
      report.divider_used = d;
      break;
    }
  }
  return report;
}

double projection_deficiency(const Vector& target, const std::vector<Vector>& basis, const SparseSym& M) {
  const std::size_t n = target.size();
  std::vector<Vector> mb;
  mb.reserve(basis.size());
  for (const Vector& b : basis) {
    if (b.size() != n) throw Error(ErrorKind::DimensionMismatch, "basis vector length differs from target");
    mb.push_back(M.multiply(b));
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = dot(basis[i], mb[j]);
      const double expect = i == j ? 1.0 : 0.0;
      if (std::abs(g - expect) > 1e-8) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "Gram entry (%zu, %zu) = %.3e", i, j, g);
        throw Error(ErrorKind::NonOrthonormalBasis, buf);
      }
    }
  }
  Vector r = target;
  for (std::size_t i = 0; i < basis.size(); ++i) axpy(-dot(target, mb[i]), basis[i], r);
  return std::sqrt(std::max(0.0, M.bilinear(r, r)));
}

double projection_deficiency(const DiscreteField& target, const std::vector<DiscreteField>& basis, const SparseSym& M) {
  std::vector<Vector> b;
  b.reserve(basis.size());
  for (const auto& f : basis) b.push_back(f.dofs);
  return projection_deficiency(target.dofs, b, M);
}

ChannelResolution channel_resolution(const QuadMesh& mesh) {
  if (!mesh.has_region_tags()) throw Error(ErrorKind::MissingTags, "channel resolution needs region tags");
  std::size_t count = 0;
  double y_min = 0.0;
  bool first = true;
  for (std::size_t e = 0; e < mesh.num_elems(); ++e) {
    if (mesh.region_tags[e] != Region::Channel) continue;
    ++count;
    const double y = mesh.origin(e).y;
    if (first || y < y_min) y_min = y;
    first = false;
  }
  if (count == 0) throw Error(ErrorKind::EmptyChannelResolution, "mesh has no channel elements");
  int nx = 0;
  for (std::size_t e = 0; e < mesh.num_elems(); ++e) {
    if (mesh.region_tags[e] == Region::Channel && mesh.origin(e).y == y_min) ++nx;
  }
  return {nx, static_cast<int>(count) / nx};
}

DumbbellRun run_dumbbell(const DumbbellSpec& spec, const MaterialParams& params, const DumbbellMeshOptions& mesh_options,
                         const SolverOptions& solver, bool dirichlet) {
  DumbbellRun run;
  auto mesh = std::make_shared<QuadMesh>(build_dumbbell_mesh(spec, mesh_options));
  run.dofmap = DofMap::for_mesh(*mesh);
  if (dirichlet) run.dofmap = apply_clamped_constraints(*mesh, run.dofmap, ClampWhere::AllBoundary);
  const SparseSym K = assemble(*mesh, run.dofmap, PlateForm{params});
  const SparseSym M = assemble(*mesh, run.dofmap, MassForm{});
  SolverOptions opt = solver;
  opt.stiffness_gram = [&](const std::vector<Vector>& z) { return energy_gram(*mesh, run.dofmap, PlateForm{params}, z); };
  run.spectrum = solve_smallest(K, M, opt);
  run.spectrum.meta.domain_kind = dirichlet ? "dumbbell-clamped" : "dumbbell";
  run.spectrum.meta.epsilon = spec.epsilon;
  run.spectrum.meta.params = params;
  const ChannelResolution cr = channel_resolution(*mesh);
  run.spectrum.meta.resolution = "elems=" + std::to_string(mesh->num_elems()) + " dofs=" +
                                 std::to_string(run.dofmap.num_free()) + " channel=" + std::to_string(cr.nx) + "x" +
                                 std::to_string(cr.ny);
  for (const Vector& v : run.spectrum.vectors) run.localization.push_back(localize(*mesh, run.dofmap, v));
  run.mesh = std::move(mesh);
  return run;
}

OmegaRun run_omega(const QuadMesh& dumbbell_mesh, const MaterialParams& params, const SolverOptions& solver,
                   bool dirichlet) {
  OmegaRun run;
  auto solve_box = [&](Region region) {
    BoxRun box;
    auto mesh = std::make_shared<QuadMesh>(extract_region(dumbbell_mesh, region));
    box.dofmap = DofMap::for_mesh(*mesh);
    if (dirichlet) box.dofmap = apply_clamped_constraints(*mesh, box.dofmap, ClampWhere::AllBoundary);
    SolverOptions opt = solver;
    opt.k = static_cast<int>(box_k(box.dofmap, solver.k));
    opt.stiffness_gram = [&](const std::vector<Vector>& z) { return energy_gram(*mesh, box.dofmap, PlateForm{params}, z); };
    box.spectrum = solve_smallest(assemble(*mesh, box.dofmap, PlateForm{params}), assemble(*mesh, box.dofmap, MassForm{}), opt);
    box.spectrum.meta.domain_kind = dirichlet ? "box-clamped" : "box";
    box.spectrum.meta.params = params;
    box.spectrum.meta.resolution = "elems=" + std::to_string(mesh->num_elems());
    box.mesh = std::move(mesh);
    return box;
  };
  run.left = solve_box(Region::OmegaLeft);
  run.right = solve_box(Region::OmegaRight);
  const MergedSpectrum m = merge(run.left.spectrum.values, run.right.spectrum.values);
  run.merged = values_only(m.values);
  run.merged.meta = run.left.spectrum.meta;
  run.merged.meta.domain_kind = dirichlet ? "omega-clamped" : "omega";
  for (const ModeTag& t : m.tags) {
    run.side.push_back(t.source == ModeSource::Omega ? 0 : 1);
    run.box_index.push_back(t.index);
  }
  return run;
}

ChannelRun run_channel(const ProfileSpec& profile, const MaterialParams& params, double epsilon, int nx, int ny,
                       const SolverOptions& solver) {
  ChannelRun run;
  auto mesh = std::make_shared<QuadMesh>(build_channel_reference_mesh(nx, ny, profile));
  run.dofmap = apply_clamped_constraints(*mesh, DofMap::for_mesh(*mesh), ClampWhere::ChannelEnds);
  const SparseSym K = assemble(*mesh, run.dofmap, ChannelEpsForm{params, epsilon, profile});
  const SparseSym M = assemble(*mesh, run.dofmap, WeightedMassForm{profile});
  SolverOptions opt = solver;
  opt.k = static_cast<int>(box_k(run.dofmap, solver.k));
  opt.stiffness_gram = [&](const std::vector<Vector>& z) {
    return energy_gram(*mesh, run.dofmap, ChannelEpsForm{params, epsilon, profile}, z);
  };
  run.spectrum = solve_smallest(K, M, opt);
  run.spectrum.meta.domain_kind = "channel";
  run.spectrum.meta.epsilon = epsilon;
  run.spectrum.meta.params = params;
  run.spectrum.meta.resolution = std::to_string(nx) + "x" + std::to_string(ny);
  run.mesh = std::move(mesh);
  return run;
}

std::vector<Vector> comparison_basis(const QuadMesh& mesh, double epsilon, const OmegaRun& omega,
                                     const LimitSolution& limit, const MergedSpectrum& merged, std::size_t count) {
  if (!mesh.has_region_tags()) throw Error(ErrorKind::MissingTags, "comparison basis needs region tags");
  if (count > merged.size()) throw Error(ErrorKind::InsufficientEigenpairs, "merged list shorter than requested basis");
  const double scale = 1.0 / std::sqrt(epsilon);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector b(mesh.num_elems() * 16, 0.0);
    const ModeTag tag = merged.tags[i];
    if (tag.source == ModeSource::Omega) {
      const BoxRun& box = omega.side.at(tag.index) == 0 ? omega.left : omega.right;
      const std::size_t j = omega.box_index.at(tag.index);
      const Vector local = to_broken(*box.mesh, box.dofmap, box.spectrum.vectors.at(j));
      for (std::size_t e = 0; e < box.mesh->num_elems(); ++e) {
        const auto pe = static_cast<std::size_t>(box.mesh->parent_elem[e]);
        std::copy_n(local.begin() + static_cast<std::ptrdiff_t>(e * 16), 16, b.begin() + static_cast<std::ptrdiff_t>(pe * 16));
      }
    } else {
      const SampledFunction h = limit.mode(tag.index);
      auto lookup = [&](double x) -> std::pair<double, double> {
        const auto it = std::lower_bound(h.x.begin(), h.x.end(), x - 1e-12);
        if (it == h.x.end() || std::abs(*it - x) > 1e-10) {
          throw Error(ErrorKind::StationMismatch, "channel node x = " + std::to_string(x) + " is not a limit-mesh station");
        }
        const auto k = static_cast<std::size_t>(it - h.x.begin());
        return {h.value[k], h.slope[k]};
      };
      for (std::size_t e = 0; e < mesh.num_elems(); ++e) {
        if (mesh.region_tags[e] != Region::Channel) continue;
        for (std::size_t a = 0; a < 4; ++a) {
          const Point p = mesh.nodes[static_cast<std::size_t>(mesh.elems[e][a])];
          const auto [v, dv] = lookup(p.x);
          b[e * 16 + 4 * a] = scale * v;
          b[e * 16 + 4 * a + 1] = scale * dv;
        }
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<ConvergenceRow> ConvergenceTable::series(const std::string& tag, int index) const {
  std::vector<ConvergenceRow> out;
  for (const auto& r : rows) {
    if (r.tag == tag && r.index == index) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.epsilon > b.epsilon; });
  return out;
}

std::vector<std::pair<double, double>> ConvergenceTable::max_error(const std::string& tag, int n) const {
  std::map<double, double, std::greater<>> worst;
  for (const auto& r : rows) {
    if (r.tag != tag || r.index > n) continue;
    auto [it, inserted] = worst.emplace(r.epsilon, r.rel_error);
    if (!inserted) it->second = std::max(it->second, r.rel_error);
  }
  return {worst.begin(), worst.end()};
}

std::string ConvergenceTable::to_csv() const {
  std::string out = "epsilon,index,value,reference,rel_error,tag\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.16e,%d,%.16e,%.16e,%.16e,%s\n", r.epsilon, r.index, r.value, r.reference,
                  r.rel_error, r.tag.c_str());
    out += buf;
  }
  return out;
}

namespace {

double rel(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

std::vector<ConvergenceRow> channel_rows(const SweepSettings& s, double eps, const std::vector<double>& theta0) {
  SolverOptions opt = s.solver;
  opt.k = s.channel_modes;
  const ChannelRun run = run_channel(s.geometry.profile, s.params, eps, s.channel_nx, s.channel_ny, opt);
  std::vector<ConvergenceRow> rows;
  for (int l = 0; l < s.channel_modes; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const double v = run.spectrum.values.at(ul);
    rows.push_back({eps, l + 1, v, theta0.at(ul), rel(v, theta0.at(ul)), "channel"});
  }
  return rows;
}

std::vector<ConvergenceRow> decomposition_rows(const SweepSettings& s, double eps) {
  DumbbellSpec spec = s.geometry;
  spec.epsilon = eps;
  SolverOptions opt = s.solver;
  opt.k = s.decomposition_modes;
  const DumbbellRun db = run_dumbbell(spec, s.params, s.mesh, opt);
  const OmegaRun om = run_omega(*db.mesh, s.params, opt);
  const ChannelResolution cr = channel_resolution(*db.mesh);
  const ChannelRun ch = run_channel(spec.profile, s.params, eps, cr.nx, cr.ny, opt);
  const DecompositionReport rep =
      decompose(db.spectrum, om.merged, ch.spectrum, static_cast<std::size_t>(s.decomposition_modes), db.localization, s.gap_rel);
  std::vector<ConvergenceRow> rows;
  for (const auto& r : rep.rows) rows.push_back({eps, static_cast<int>(r.n), r.lambda, r.merged, r.deviation, "decomposition"});

  if (s.projection) {
    LimitProblem lp{spec.profile, s.params, cr.nx};
    const LimitSolution limit = solve_limit(lp, s.decomposition_modes, s.solver);
    const MergedSpectrum m0 = merge(om.merged.values, limit.spectrum.values);
    std::size_t count = static_cast<std::size_t>(s.decomposition_modes);
    for (const Divider& d : find_divider(m0, s.gap_rel)) {
      if (d.count >= count) {
        count = d.count;
        break;
      }
    }
    count = std::min(count, m0.size());
    const std::vector<Vector> basis = comparison_basis(*db.mesh, eps, om, limit, m0, count);
    const SparseSym bm = broken_mass(*db.mesh);
    for (int n = 0; n < s.decomposition_modes; ++n) {
      const Vector t = to_broken(*db.mesh, db.dofmap, db.spectrum.vectors.at(static_cast<std::size_t>(n)));
      const double d = projection_deficiency(t, basis, bm);
      rows.push_back({eps, n + 1, d, 0.0, d, "projection"});
    }
  }
  return rows;
}

std::vector<ConvergenceRow> dirichlet_rows(const SweepSettings& s, double eps) {
  DumbbellSpec spec = s.geometry;
  spec.epsilon = eps;
  SolverOptions opt = s.solver;
  opt.k = s.dirichlet_modes;
  const DumbbellRun db = run_dumbbell(spec, s.params, s.mesh, opt, true);
  const OmegaRun om = run_omega(*db.mesh, s.params, opt, true);
  std::vector<ConvergenceRow> rows;
  for (int n = 0; n < s.dirichlet_modes; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const double v = db.spectrum.values.at(un);
    const double r = om.merged.values.at(un);
    rows.push_back({eps, n + 1, v, r, rel(v, r), "dirichlet"});
  }
  return rows;
}

}  // namespace

ConvergenceTable epsilon_sweep(const SweepSettings& s) {
  s.params.validate();
  if (s.epsilons.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one epsilon");
  for (double e : s.epsilons) {
    if (!(e > 0.0)) throw Error(ErrorKind::InvalidEpsilon, "sweep epsilon must be positive");
  }

  std::vector<double> theta0;
  if (s.channel) {
    const LimitSolution limit = solve_limit({s.geometry.profile, s.params, s.n_elems_1d}, s.channel_modes, s.solver);
    theta0 = limit.spectrum.values;
  }

  std::vector<std::function<std::vector<ConvergenceRow>()>> tasks;
  for (double eps : s.epsilons) {
    if (s.channel) tasks.emplace_back([&s, eps, &theta0] { return channel_rows(s, eps, theta0); });
    if (s.decomposition) tasks.emplace_back([&s, eps] { return decomposition_rows(s, eps); });
    if (s.dirichlet) tasks.emplace_back([&s, eps] { return dirichlet_rows(s, eps); });
  }

  std::vector<std::vector<ConvergenceRow>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t jobs = std::min<std::size_t>(tasks.size(), s.jobs > 0 ? static_cast<std::size_t>(s.jobs) : hw);
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ConvergenceTable table;
  static const std::map<std::string, int> order{{"channel", 0}, {"decomposition", 1}, {"projection", 2}, {"dirichlet", 3}};
  for (auto& r : results) table.rows.insert(table.rows.end(), r.begin(), r.end());
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const ConvergenceRow& a, const ConvergenceRow& b) {
    const int ta = order.at(a.tag);
    const int tb = order.at(b.tag);
    if (ta != tb) return ta < tb;
    if (a.epsilon != b.epsilon) return a.epsilon > b.epsilon;
    return a.index < b.index;
  });
  return table;
}

}  // namespace dumbbell
