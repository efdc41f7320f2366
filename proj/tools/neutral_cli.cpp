// Command-line front end: design, pt, compare, check-geometry, verify.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "neutral/bem.hpp"
#include "neutral/config.hpp"
#include "neutral/disk_spectral.hpp"
#include "neutral/parallel.hpp"
#include "neutral/suite.hpp"
#include "neutral/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace neutral;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string shape;
  std::string mode;
  std::optional<int> n;
  std::optional<int> N;
  std::string grid;
  std::string surface;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.shape.empty()) c.shape = parse_shape_arg(o.shape);
  if (!o.mode.empty()) c.mode = parse_mode(o.mode);
  if (o.n) c.n = *o.n;
  if (o.N) c.N = *o.N;
  if (!o.grid.empty()) c.grid = parse_grid(o.grid);
  if (!o.out.empty()) c.out = o.out;
  return c;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json pt_record(const PolarizationTensor& t) {
  return {{"T11", t(0, 0)},
          {"T12", t(0, 1)},
          {"T21", t(1, 0)},
          {"T22", t(1, 1)},
          {"provenance", to_string(t.provenance)},
          {"resolution", t.resolution}};
}

json decay_record(const DecayFit& f) {
  json j = {{"radii", f.radii}, {"max_perturbation", f.max_perturbation}, {"below_floor", f.below_floor}};
  if (!f.below_floor) {
    j["slope"] = f.slope;
    j["slope_halfwidth"] = f.slope_halfwidth;
  }
  return j;
}

json modes_json(const ModeVector& m) {
  json a = json::array();
  for (const Complex& c : m.coefficients()) a.push_back({c.real(), c.imag()});
  return a;
}

Grading grading_for(const ConformalMap& map) {
  return map.has_corners() ? Grading::corner_graded : Grading::none;
}

void print_admissibility(const ConformalMap& map) {
  const Admissibility adm = admissibility(map);
  std::printf("shape: %s\n", map.describe().c_str());
  std::printf("b_1 = %.17g %+.17gi  |b_1| = %.17g  phase = %.17g\n", adm.b.real(), adm.b.imag(), adm.abs_b,
              adm.phase);
  std::printf("closed-form bound 2 - sqrt(3) = %.17g: %s\n", kMaxAdmissibleB,
              adm.theorem_ok ? "admissible" : "exceeded");
}

// ---------------------------------------------------------------------------

int cmd_design(const RunConfig& cfg) {
  validate(cfg);
  const ConformalMap map = cfg.shape.build();
  print_admissibility(map);
  if (cfg.mode == InterfaceMode::closed_form && !admissibility(map).theorem_ok) {
    throw Error("|b_1| exceeds 2 - sqrt(3): the closed form does not apply; try --mode calibrated");
  }
  const InterfaceParameter p = design_parameter(cfg, map);
  const Admissibility adm = admissibility(map);

  fs::create_directories(cfg.out);
  json g = {{"b_re", adm.b.real()},
            {"b_im", adm.b.imag()},
            {"gamma0", p.gamma0()},
            {"gamma2", p.gamma2()},
            {"phase", p.phase()},
            {"provenance", to_string(p.provenance())},
            {"N", p.truncation() > 0 ? json(p.truncation()) : json(nullptr)}};
  if (p.is_constant_beta()) g["beta0"] = p.beta_constant();
  write_file(fs::path(cfg.out) / "gamma.json", g.dump(2) + "\n");

  std::ostringstream csv;
  csv << "theta,beta\n";
  constexpr int kSamples = 720;
  for (int k = 0; k < kSamples; ++k) {
    const double th = 2.0 * kPi * (k + 0.5) / kSamples;
    csv << fmt(th) << "," << fmt(p.beta(th)) << "\n";
  }
  write_file(fs::path(cfg.out) / "beta.csv", csv.str());
  std::printf("gamma0 = %.17g  gamma2 = %.17g  (%s)\n", p.gamma0(), p.gamma2(), to_string(p.provenance()).c_str());
  std::printf("wrote %s/gamma.json and %s/beta.csv\n", cfg.out.c_str(), cfg.out.c_str());
  return 0;
}

int cmd_pt(const RunConfig& cfg) {
  validate(cfg);
  const ConformalMap map = cfg.shape.build();
  const BoundaryMesh mesh = discretize(map, cfg.n, grading_for(map));
  fs::create_directories(cfg.out);

  std::ostringstream csv;
  csv << "theta,x,y,nu1,nu2,w\n";
  for (int q = 0; q < mesh.size(); ++q) {
    csv << fmt(mesh.theta[q]) << "," << fmt(mesh.nodes[q].real()) << "," << fmt(mesh.nodes[q].imag()) << ","
        << fmt(mesh.normals[q].real()) << "," << fmt(mesh.normals[q].imag()) << "," << fmt(mesh.weights[q]) << "\n";
  }
  write_file(fs::path(cfg.out) / "mesh.csv", csv.str());

  json report;
  report["shape"] = cfg.shape.describe();
  report["mode"] = to_string(cfg.mode);
  const PolarizationTensor perfect = PerfectSolver(mesh).polarization();
  report["perfect"] = pt_record(perfect);

  if (cfg.mode != InterfaceMode::perfect) {
    const InterfaceParameter p = design_parameter(cfg, map);
    const FourierDensity density = solve_disk(p.modes(), cfg.N);
    const PolarizationTensor disk = polarization(density);

    // The pulled-back problem differs from the disk problem by the shape term
    // 2 pi [[b', b''], [b'', -b']].
    const Complex b = map.b1();
    PolarizationTensor spectral = disk;
    spectral.entries = disk.entries - Mat2{{{2.0 * kPi * b.real(), 2.0 * kPi * b.imag()},
                                            {2.0 * kPi * b.imag(), -2.0 * kPi * b.real()}}};
    const PolarizationTensor bem = polarization_general(mesh, beta_at_nodes(mesh, p));

    report["disk"] = pt_record(disk);
    report["spectral"] = pt_record(spectral);
    report["bem"] = pt_record(bem);
    report["difference"] = norm(bem.entries - spectral.entries);
    report["ratio"] = bem.norm() / perfect.norm();

    json d = {{"N", density.truncation},
              {"gamma_modes", modes_json(density.gamma)},
              {"phi1_modes", modes_json(density.phi1)},
              {"phi2_modes", modes_json(density.phi2)}};
    write_file(fs::path(cfg.out) / "density.json", d.dump() + "\n");

    std::printf("T(disk, gamma)     = [%.6e %.6e; %.6e %.6e]\n", disk(0, 0), disk(0, 1), disk(1, 0), disk(1, 1));
    std::printf("T(Omega) spectral  = [%.6e %.6e; %.6e %.6e]\n", spectral(0, 0), spectral(0, 1), spectral(1, 0),
                spectral(1, 1));
    std::printf("T(Omega) bem       = [%.6e %.6e; %.6e %.6e]\n", bem(0, 0), bem(0, 1), bem(1, 0), bem(1, 1));
    std::printf("|bem - spectral| = %.3e   |T_weak| / |T_perfect| = %.3e\n", report["difference"].get<double>(),
                report["ratio"].get<double>());
  }
  std::printf("T(Omega) perfect   = [%.6e %.6e; %.6e %.6e]\n", perfect(0, 0), perfect(0, 1), perfect(1, 0),
              perfect(1, 1));
  write_file(fs::path(cfg.out) / "pt.json", report.dump(2) + "\n");
  std::printf("wrote %s/pt.json\n", cfg.out.c_str());
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  validate(cfg);
  const ConformalMap map = cfg.shape.build();
  const BoundaryMesh mesh = discretize(map, cfg.n, grading_for(map));
  const InterfaceParameter p = design_parameter(cfg, map);
  const ImperfectSolver weak(mesh, beta_at_nodes(mesh, p));
  const PerfectSolver perfect(mesh);
  fs::create_directories(cfg.out);

  const GridSpec& g = cfg.grid;
  const int res = g.resolution;
  const double guard = 2.0 * mesh.max_spacing();
  std::vector<char> masked(static_cast<std::size_t>(res) * res);
  std::vector<Complex> points(masked.size());
  for (int iy = 0; iy < res; ++iy) {
    for (int ix = 0; ix < res; ++ix) {
      const Complex x(g.xmin + ix * (g.xmax - g.xmin) / (res - 1), g.ymin + iy * (g.ymax - g.ymin) / (res - 1));
      const std::size_t i = static_cast<std::size_t>(iy) * res + ix;
      points[i] = x;
      masked[i] = mesh.contains(x) || mesh.distance_to_boundary(x) < guard;
    }
  }

  const double radii[] = {5.0, 10.0, 20.0, 40.0};
  json report;
  report["shape"] = cfg.shape.describe();
  report["mode"] = to_string(cfg.mode);
  report["masked_cells"] = std::count(masked.begin(), masked.end(), 1);
  if (map.has_corners()) {
    json corners = json::array();
    for (double c : map.corner_angles()) {
      const Complex z = map.boundary(c);
      corners.push_back({{"theta", c}, {"x", z.real()}, {"y", z.imag()}});
    }
    report["corners"] = corners;
    report["corner_note"] = "values near a corner carry the graded-mesh error; treat them as indicative";
  }
  json fields = json::object();

  const Complex dirs[2] = {{1.0, 0.0}, {0.0, 1.0}};
  for (int kind = 0; kind < 2; ++kind) {
    for (int j = 0; j < 2; ++j) {
      const std::string name = std::string(kind == 0 ? "perfect" : "imperfect") + "_e" + std::to_string(j + 1);
      const Complex a = dirs[j];
      std::function<double(Complex)> u;
      DensitySolution sol;
      if (kind == 0) {
        sol = perfect.solve(a);
        u = [&](Complex x) { return perfect.eval_field(sol, x); };
      } else {
        sol = weak.solve(a);
        u = [&](Complex x) { return weak.eval_field(sol, x); };
      }

      std::vector<double> values(points.size(), 0.0);
      parallel_for(points.size(), [&](std::size_t i) {
        if (!masked[i]) values[i] = u(points[i]);
      });

      std::ostringstream csv;
      csv << "x,y,u,pert,masked\n";
      double edge = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        csv << fmt(points[i].real()) << "," << fmt(points[i].imag()) << ",";
        if (masked[i]) {
          csv << ",,1\n";
          continue;
        }
        const double pert = values[i] - (std::conj(a) * points[i]).real();
        csv << fmt(values[i]) << "," << fmt(pert) << ",0\n";
        const std::size_t ix = i % res, iy = i / res;
        if (ix == 0 || iy == 0 || ix + 1 == static_cast<std::size_t>(res) || iy + 1 == static_cast<std::size_t>(res)) {
          edge = std::max(edge, std::abs(pert));
        }
      }
      write_file(fs::path(cfg.out) / ("field_" + name + ".csv"), csv.str());

      json rec = decay_record(farfield_decay(u, a, radii));
      rec["window_boundary_max_perturbation"] = edge;
      fields[name] = rec;
      std::printf("%-12s window-edge max |u - a.x| = %.3e\n", name.c_str(), edge);
    }
  }
  report["fields"] = fields;
  write_file(fs::path(cfg.out) / "decay.json", report.dump(2) + "\n");
  std::printf("wrote four field grids and %s/decay.json\n", cfg.out.c_str());
  return 0;
}

int cmd_check_geometry(const RunConfig& cfg, const std::string& surface) {
  BestFitResidual fit;
  std::string subject;
  if (!surface.empty()) {
    fit = best_fit_ellipsoid_residual_3d(load_surface(surface));
    subject = surface;
  } else {
    const ConformalMap map = cfg.shape.build();
    fit = best_fit_ellipsoid_residual(curve_samples(map, 2048));
    subject = cfg.shape.describe();
  }
  const GeometryResidual& r = fit.residual;
  constexpr double kVerdictTol = 1e-6;
  const bool yes = r.residual <= kVerdictTol;
  const std::string noun = r.dimension == 3 ? "ellipsoid" : "ellipse";
  const std::string verdict = yes ? noun : "not an " + noun;

  json j = {{"subject", subject},
            {"dimension", r.dimension},
            {"a", json::array({r.a[0], r.a[1], r.a[2]})},
            {"residual", r.residual},
            {"used", r.used},
            {"skipped", r.skipped},
            {"tolerance", kVerdictTol},
            {"verdict", verdict}};
  fs::create_directories(cfg.out);
  write_file(fs::path(cfg.out) / "geometry.json", j.dump(2) + "\n");
  std::printf("%s: residual %.3e with a = (%.6g, %.6g, %.6g) -> %s\n", subject.c_str(), r.residual, r.a[0], r.a[1],
              r.a[2], verdict.c_str());
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  const VerifyReport report = run_verify(cfg);
  fs::create_directories(cfg.out);
  write_file(fs::path(cfg.out) / "verify.json", to_json(report));
  for (const CheckResult& r : report.checks) {
    const char* tag = !r.passed ? "FAIL" : (r.gate == Gate::report ? "INFO" : "PASS");
    std::printf("%s %-14s %-36s %s%s%s\n", tag, r.module.c_str(), r.name.c_str(),
                r.value ? fmt(*r.value).c_str() : "-", r.note.empty() ? "" : "  # ", r.note.c_str());
  }
  std::printf("%d checks, %d failed; report in %s/verify.json\n", static_cast<int>(report.checks.size()),
              report.failures(), cfg.out.c_str());
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly neutral inclusions with imperfect interfaces"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--shape", o.shape, "ellipse:A,B | droplet | laurent:FILE");
  app.add_option("--mode", o.mode, "closed_form | calibrated | perfect | constant");
  app.add_option("--n", o.n, "Boundary nodes");
  app.add_option("--N", o.N, "Spectral truncation");
  app.add_option("--grid", o.grid, "xmin,xmax,ymin,ymax,res");

  auto* design = app.add_subcommand("design", "Design the interface parameter and write gamma/beta files");
  auto* pt = app.add_subcommand("pt", "Polarization tensors from the spectral and boundary-integral solvers");
  auto* compare = app.add_subcommand("compare", "Field grids for perfect and imperfect bonding, with decay fits");
  auto* geometry = app.add_subcommand("check-geometry", "Ellipse/ellipsoid characterization residual");
  geometry->add_option("--surface", o.surface, "Triangulated surface (OBJ subset)")->check(CLI::ExistingFile);
  auto* verify = app.add_subcommand("verify", "Run the full verification suite");
  for (auto* sub : {design, pt, compare, geometry, verify}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve(o);
    if (design->parsed()) return cmd_design(cfg);
    if (pt->parsed()) return cmd_pt(cfg);
    if (compare->parsed()) return cmd_compare(cfg);
    if (geometry->parsed()) return cmd_check_geometry(cfg, o.surface);
    return cmd_verify(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
