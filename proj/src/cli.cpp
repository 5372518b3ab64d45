#include "dumbbell/cli.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dumbbell/config.hpp"
#include "dumbbell/error.hpp"
#include "dumbbell/limit1d.hpp"
#include "dumbbell/simd/kernels.hpp"
#include "dumbbell/spectra.hpp"

namespace dumbbell {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string config;
  std::string out;
  int jobs = 0;
  bool dirichlet = false;
  bool dump_matrices = false;
  bool dump_mesh = false;
};

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot write '" + p.string() + "'");
    f << body;
    if (!f) throw Error(ErrorKind::IoError, "write failed for '" + p.string() + "'");
    files_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string spectrum_csv(const Spectrum& s, const std::vector<Localization>& loc, double default_omega,
                         double default_channel) {
  std::string out = "index,eigenvalue,residual,mass_omega,mass_channel\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double mo = i < loc.size() ? loc[i].mass_omega : default_omega;
    const double mc = i < loc.size() ? loc[i].mass_channel : default_channel;
    const double r = i < s.residuals.size() ? s.residuals[i] : 0.0;
    out += std::to_string(i + 1) + "," + fmt(s.values[i]) + "," + fmt(r) + "," + fmt(mo) + "," + fmt(mc) + "\n";
  }
  return out;
}

json spectrum_json(const Spectrum& s) {
  json p = {{"sigma", s.meta.params.sigma}, {"tau", s.meta.params.tau}};
  return {{"domain_kind", s.meta.domain_kind}, {"epsilon", s.meta.epsilon},       {"params", p},
          {"resolution", s.meta.resolution},   {"solver", s.meta.solver},         {"eigenvalues", s.values},
          {"residuals", s.residuals}};
}

json decomposition_json(const DecompositionReport& r, const Thresholds& t) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr = {{"n", row.n},
               {"lambda", row.lambda},
               {"merged", row.merged},
               {"source", to_string(row.tag.source)},
               {"source_index", row.tag.index + 1},
               {"deviation", row.deviation}};
    if (row.has_localization) {
      jr["mass_omega"] = row.localization.mass_omega;
      jr["mass_channel"] = row.localization.mass_channel;
    }
    rows.push_back(jr);
  }
  return {{"rows", rows},
          {"max_deviation", r.max_deviation},
          {"multiset_deviation", r.multiset_deviation},
          {"divider", {{"x", r.divider_used.x}, {"count", r.divider_used.count}}},
          {"threshold", t.decomposition},
          {"within_threshold", r.max_deviation <= t.decomposition}};
}

std::string decomposition_csv(const DecompositionReport& r) {
  std::string out = "n,lambda,merged,source,deviation,mass_omega,mass_channel\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.n) + "," + fmt(row.lambda) + "," + fmt(row.merged) + "," + to_string(row.tag.source) + "," +
           fmt(row.deviation) + "," + (row.has_localization ? fmt(row.localization.mass_omega) : "") + "," +
           (row.has_localization ? fmt(row.localization.mass_channel) : "") + "\n";
  }
  return out;
}

int cmd_validate_profile(const RunConfig& cfg, Outputs& out, std::ostream& os) {
  const MPReport rep = validate_profile(cfg.geometry.profile);
  json v = json::array();
  for (const auto& [x, slope] : rep.violations) v.push_back({{"x", x}, {"slope", slope}});
  out.write_json("report.json", {{"holds", rep.holds},
                                 {"delta_used", rep.delta_used},
                                 {"violations", v},
                                 {"profile", profile_to_json(cfg.geometry.profile)}});
  os << "(MP) " << (rep.holds ? "holds" : "violated") << " (delta = " << rep.delta_used << ", "
     << rep.violations.size() << " violations)\n";
  const std::size_t shown = std::min<std::size_t>(rep.violations.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) {
    os << "  x = " << rep.violations[i].first << "  g'(x) = " << rep.violations[i].second << "\n";
  }
  if (shown < rep.violations.size()) os << "  ... (full list in report.json)\n";
  return rep.holds ? 0 : 1;
}

int cmd_solve_limit(const RunConfig& cfg, Outputs& out, std::ostream& os) {
  const LimitProblem problem{cfg.geometry.profile, cfg.params, cfg.discretization.n_elems_1d};
  const LimitSolution sol = solve_limit(problem, cfg.solver.k, cfg.solver);
  out.write("spectrum.csv", spectrum_csv(sol.spectrum, {}, 0.0, 1.0));
  out.write_json("report.json", spectrum_json(sol.spectrum));
  if (!sol.spectrum.values.empty()) os << "theta_1 = " << fmt(sol.spectrum.values[0]) << "\n";
  return 0;
}

int cmd_solve_channel(const RunConfig& cfg, Outputs& out, std::ostream& os, const Flags& flags) {
  const ChannelRun run = run_channel(cfg.geometry.profile, cfg.params, cfg.geometry.epsilon, cfg.discretization.nx,
                                     cfg.discretization.ny, cfg.solver);
  out.write("spectrum.csv", spectrum_csv(run.spectrum, {}, 0.0, 1.0));
  out.write_json("report.json", spectrum_json(run.spectrum));
  if (flags.dump_mesh) out.write("mesh.json", mesh_to_json(*run.mesh));
  if (flags.dump_matrices) {
    out.write("K.mtx", assemble(*run.mesh, run.dofmap,
                                ChannelEpsForm{cfg.params, cfg.geometry.epsilon, cfg.geometry.profile})
                           .to_matrix_market());
    out.write("M.mtx", assemble(*run.mesh, run.dofmap, WeightedMassForm{cfg.geometry.profile}).to_matrix_market());
  }
  if (!run.spectrum.values.empty()) os << "theta_1^eps = " << fmt(run.spectrum.values[0]) << "\n";
  return 0;
}

int cmd_solve_dumbbell(const RunConfig& cfg, Outputs& out, std::ostream& os, const Flags& flags) {
  const DumbbellRun run = run_dumbbell(cfg.geometry, cfg.params, cfg.mesh_options(), cfg.solver, flags.dirichlet);
  out.write("spectrum.csv", spectrum_csv(run.spectrum, run.localization, 1.0, 0.0));
  json rep = spectrum_json(run.spectrum);
  rep["dirichlet"] = flags.dirichlet;
  out.write_json("report.json", rep);
  if (flags.dump_mesh) out.write("mesh.json", mesh_to_json(*run.mesh));
  if (flags.dump_matrices) {
    out.write("K.mtx", assemble(*run.mesh, run.dofmap, PlateForm{cfg.params}).to_matrix_market());
    out.write("M.mtx", assemble(*run.mesh, run.dofmap, MassForm{}).to_matrix_market());
  }
  if (!run.spectrum.values.empty()) os << "lambda_1 = " << fmt(run.spectrum.values[0]) << "\n";
  return 0;
}

int cmd_decompose(const RunConfig& cfg, Outputs& out, std::ostream& os) {
  DecompositionReport rep;
  if (cfg.decompose_inputs) {
    const DecomposeInputs& in = *cfg.decompose_inputs;
    Spectrum db;
    db.values = in.dumbbell;
    Spectrum om;
    om.values = in.omega;
    Spectrum th;
    th.values = in.theta;
    rep = decompose(db, om, th, static_cast<std::size_t>(in.n), {}, cfg.sweep.gap_rel);
  } else {
    SolverOptions opt = cfg.solver;
    opt.k = cfg.sweep.decomposition_modes;
    const DumbbellRun db = run_dumbbell(cfg.geometry, cfg.params, cfg.mesh_options(), opt);
    const OmegaRun om = run_omega(*db.mesh, cfg.params, opt);
    const ChannelResolution cr = channel_resolution(*db.mesh);
    const ChannelRun ch = run_channel(cfg.geometry.profile, cfg.params, cfg.geometry.epsilon, cr.nx, cr.ny, opt);
    rep = decompose(db.spectrum, om.merged, ch.spectrum, static_cast<std::size_t>(cfg.sweep.decomposition_modes),
                    db.localization, cfg.sweep.gap_rel);
  }
  out.write_json("report.json", decomposition_json(rep, cfg.thresholds));
  out.write("decomposition.csv", decomposition_csv(rep));
  os << "max deviation = " << fmt(rep.max_deviation) << " (threshold " << cfg.thresholds.decomposition << ")\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, Outputs& out, std::ostream& os, const Flags& flags) {
  const ConvergenceTable table = epsilon_sweep(cfg.sweep_settings(flags.jobs));
  out.write("sweep.csv", table.to_csv());
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"epsilon", r.epsilon},
                    {"index", r.index},
                    {"value", r.value},
                    {"reference", r.reference},
                    {"rel_error", r.rel_error},
                    {"tag", r.tag}});
  }
  json summary = json::object();
  for (const char* tag : {"channel", "decomposition", "dirichlet", "projection"}) {
    const auto worst = table.max_error(tag, 1 << 30);
    if (worst.empty()) continue;
    json s = json::array();
    for (const auto& [eps, err] : worst) s.push_back({{"epsilon", eps}, {"max_rel_error", err}});
    summary[tag] = s;
  }
  out.write_json("report.json", {{"rows", rows}, {"summary", summary}});
  os << table.rows.size() << " sweep rows written\n";
  return 0;
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral analysis of thin-channel dumbbell plates", "dumbbell"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Flags flags;
  struct Command {
    const char* name;
    const char* help;
    bool dirichlet;
  };
  const std::vector<Command> commands = {
      {"validate-profile", "Check the end-monotonicity condition (MP) of the channel profile", false},
      {"solve-limit", "Eigenvalues of the 1D clamped limit problem", false},
      {"solve-channel", "Eigenvalues of the pulled-back channel problem at geometry.epsilon", false},
      {"solve-dumbbell", "Eigenpairs of the free (or clamped) plate on the dumbbell", true},
      {"decompose", "Compare the dumbbell spectrum with the merged Omega/channel spectrum", false},
      {"sweep", "Epsilon sweep: channel convergence, decomposition and Dirichlet contrast", false},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", flags.config, "JSON run configuration")->required();
    sub->add_option("--out", flags.out, "Output directory (overrides output.dir)");
    sub->add_option("--jobs", flags.jobs, "Parallel solves in sweeps (default: logical cores)")->check(CLI::NonNegativeNumber);
    if (c.dirichlet) sub->add_flag("--dirichlet", flags.dirichlet, "Clamp the whole boundary");
    sub->add_flag("--dump-matrices", flags.dump_matrices, "Write K.mtx and M.mtx");
    sub->add_flag("--dump-mesh", flags.dump_mesh, "Write mesh.json");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const RunConfig cfg = RunConfig::load(flags.config);
    Outputs outputs(flags.out.empty() ? fs::path(cfg.output_dir) : fs::path(flags.out));
    int code = 0;
    if (command == "validate-profile") code = cmd_validate_profile(cfg, outputs, out);
    else if (command == "solve-limit") code = cmd_solve_limit(cfg, outputs, out);
    else if (command == "solve-channel") code = cmd_solve_channel(cfg, outputs, out, flags);
    else if (command == "solve-dumbbell") code = cmd_solve_dumbbell(cfg, outputs, out, flags);
    else if (command == "decompose") code = cmd_decompose(cfg, outputs, out);
    else if (command == "sweep") code = cmd_sweep(cfg, outputs, out, flags);

    const std::string canonical = cfg.to_json().dump();
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {
        {"command", command},
        {"config_path", flags.config},
        {"config_hash", std::string("fnv1a64:") + hash},
        {"config", cfg.to_json()},
        {"versions",
         {{"dumbbell", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"cli11", CLI11_VERSION},
          {"compiler", __VERSION__}}},
        {"simd", std::string(simd::active().name)},
        {"outputs", outputs.files()},
        {"exit_code", code},
        {"timings", {{"total_seconds", seconds}}},
        {"created_utc", utc_timestamp()},
    };
    outputs.write_json("manifest.json", manifest);
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dumbbell
