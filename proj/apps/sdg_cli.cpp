#include "sdg/harness.hpp"
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sdg;

namespace {

struct Options {
  int case_id = 1;
  std::string mesh;
  int k = 1;
  std::vector<int> ladder = {2, 4, 8, 16, 32};
  double epsilon = 1, alpha = 1, kdiff = 1, kdarcy = 1;
  double dt = 1e-3, tfinal = 0.1;
  std::string out;
  int dump_stride = 1;
  std::vector<std::string> asserts;
};

void add_common(CLI::App* c, Options& o) {
  c->add_option("--case", o.case_id, "built-in case id");
  c->add_option("--mesh", o.mesh, "path to a mesh file (overrides the generated grid)");
  c->add_option("--k", o.k, "polynomial degree")->check(CLI::PositiveNumber);
  c->add_option("--ladder", o.ladder,
                "inverse mesh sizes; non-convergence commands use the first entry")
      ->delimiter(',');
  c->add_option("--epsilon", o.epsilon, "viscosity");
  c->add_option("--alpha", o.alpha, "Brinkman reaction coefficient");
  c->add_option("--kdiff", o.kdiff, "diffusion coefficient");
  c->add_option("--kdarcy", o.kdarcy, "Darcy permeability");
  c->add_option("--dt", o.dt, "time step");
  c->add_option("--tfinal", o.tfinal, "final time");
  c->add_option("--out", o.out, "output file (or directory for demo)");
  c->add_option("--dump-stride", o.dump_stride, "per-step CSV row stride");
  c->add_option("--assert", o.asserts,
                "postcondition, e.g. eoc_uB>=1.75, ledger<=1e-8, energy<=1e-10, "
                "cons<=1e-9, drift_up (repeatable)");
}

ManufacturedCase pick_case(const Options& o) {
  if (o.case_id == 1) return make_case1(o.epsilon, o.alpha, o.kdarcy, o.kdiff);
  if (o.case_id == 2) return make_case2(o.epsilon, o.alpha, o.kdarcy, o.kdiff);
  throw ConfigError("unknown manufactured case " + std::to_string(o.case_id) +
                    " (expected 1 or 2)");
}

StaggeredMesh load_or_build(const Options& o, const Rect& domB, const Rect& domD) {
  PrimalMesh pm;
  if (!o.mesh.empty()) {
    pm = ingest_primal(o.mesh);
  } else {
    if (o.ladder.empty()) throw ConfigError("--ladder needs at least one entry");
    int hi = o.ladder.front();
    int nx = (int)std::lround((domB.x1 - domB.x0) * hi);
    int ny = (int)std::lround((domB.y1 - domB.y0) * hi);
    pm = build_rectangular_primal(domB, domD, nx, ny, CellKind::Quad);
  }
  pm.validate();
  return subdivide(pm);
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open output file " + path);
    f << text;
  }
}

// postcondition checks; returns a failure message or ""
std::string check_assert(const std::string& expr, const ConvergenceResult* conv,
                         const DemoResult* demo) {
  auto fail = [&](double got) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "assert failed: %s (got %.6e)", expr.c_str(), got);
    return std::string(buf);
  };
  if (expr == "drift_up") {
    if (!demo) throw ConfigError("drift_up only applies to demo runs");
    for (size_t i = 1; i < demo->centroid_x.size(); ++i)
      if (demo->centroid_x[i] <= demo->centroid_x[i - 1])
        return fail(demo->centroid_x[i] - demo->centroid_x[i - 1]);
    return "";
  }
  size_t pos = expr.find(">=");
  bool ge = pos != std::string::npos;
  if (!ge) pos = expr.find("<=");
  if (pos == std::string::npos)
    throw ConfigError("cannot parse assert expression: " + expr);
  std::string name = expr.substr(0, pos);
  double bound = std::stod(expr.substr(pos + 2));

  double val;
  if (name.rfind("eoc_", 0) == 0) {
    if (!conv) throw ConfigError(name + " only applies to convergence runs");
    std::string fn = name.substr(4);
    double ErrorSet::*f;
    if (fn == "L") f = &ErrorSet::L;
    else if (fn == "uB") f = &ErrorSet::uB;
    else if (fn == "pB") f = &ErrorSet::pB;
    else if (fn == "uD") f = &ErrorSet::uD;
    else if (fn == "pD") f = &ErrorSet::pD;
    else if (fn == "c") f = &ErrorSet::c;
    else if (fn == "z") f = &ErrorSet::z;
    else throw ConfigError("unknown field in assert: " + name);
    val = conv->eoc(f);
  } else if (name == "cons") {
    double m = 0;
    if (conv)
      for (const LadderRow& r : conv->rows)
        m = std::max({m, r.cons.div_uB_max, r.cons.iface_jump_max,
                      r.cons.g1_residual_max, r.cons.div_uD_residual});
    if (demo)
      m = std::max({m, demo->cons.div_uB_max, demo->cons.iface_jump_max,
                    demo->cons.g1_residual_max, demo->cons.div_uD_residual});
    val = m;
  } else if (name == "ledger") {
    val = 0;
    if (conv)
      for (const LadderRow& r : conv->rows) val = std::max(val, r.max_ledger);
    if (demo) val = std::max(val, demo->max_ledger);
  } else if (name == "energy") {
    val = 0;
    if (conv)
      for (const LadderRow& r : conv->rows) val = std::max(val, r.max_energy);
    if (demo) val = std::max(val, demo->max_energy);
  } else {
    throw ConfigError("unknown assert name: " + name);
  }
  bool ok = ge ? val >= bound : val <= bound;
  return ok ? "" : fail(val);
}

int run_asserts(const std::vector<std::string>& asserts, const ConvergenceResult* conv,
                const DemoResult* demo) {
  int rc = 0;
  for (const std::string& a : asserts) {
    std::string msg = check_assert(a, conv, demo);
    if (!msg.empty()) {
      std::cerr << msg << "\n";
      rc = 5;
    }
  }
  return rc;
}

int cmd_convergence(const Options& o) {
  ManufacturedCase mc = pick_case(o);
  ConvergenceOptions opt;
  opt.k = o.k;
  opt.hinv = o.ladder;
  opt.dt = o.dt;
  opt.tfinal = o.tfinal;
  ConvergenceResult r = run_convergence(mc, opt);
  write_or_print(o.out, convergence_csv(r));
  return run_asserts(o.asserts, &r, nullptr);
}

int cmd_solve_flow(const Options& o) {
  ManufacturedCase mc = pick_case(o);
  StaggeredMesh mesh = load_or_build(o, mc.domB, mc.domD);
  FlowSystem sys = build_flow_system(mesh, o.k, mc.params(), mc.bc);
  FlowSolution sol = solve_flow(sys, mc.sources(), mc.bc);
  ConservationReport cons = verify_conservation(sys, sol, mc.bc, mc.f);
  ErrorSet err = flow_errors(sys, sol, mc);
  std::ostringstream s;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "err_L,err_uB,err_pB,err_uD,err_pD\n%.6e,%.6e,%.6e,%.6e,%.6e\n"
                "div_uB_max,iface_jump_max,g1_residual_max,div_uD_residual\n"
                "%.6e,%.6e,%.6e,%.6e\n",
                err.L, err.uB, err.pB, err.uD, err.pD, cons.div_uB_max,
                cons.iface_jump_max, cons.g1_residual_max, cons.div_uD_residual);
  s << buf;
  write_or_print(o.out, s.str());
  return 0;
}

int cmd_run_transport(const Options& o) {
  ManufacturedCase mc = pick_case(o);
  StaggeredMesh mesh = load_or_build(o, mc.domB, mc.domD);
  FlowSystem sys = build_flow_system(mesh, o.k, mc.params(), mc.bc);
  FlowSolution sol = solve_flow(sys, mc.sources(), mc.bc);
  TransportParams tp;
  tp.K = mc.kdiff * Eigen::Matrix2d::Identity();
  tp.dt = o.dt;
  tp.tfinal = o.tfinal;
  TransportData td;
  td.s = mc.s;
  td.c_in = mc.c;
  td.c_hat = mc.c;
  td.f = mc.f;
  td.c0 = [&](const MatX2& X) { return mc.c(X, 0.0); };
  TransportSolver ts(sys, sol, mc.bc, tp, td);
  ts.run();
  write_or_print(o.out, steps_csv(ts.records(), o.dump_stride));
  return 0;
}

int cmd_demo(const Options& o, bool dt_set, bool tf_set) {
  DemoCase dc;
  StaggeredMesh mesh;
  if (o.case_id == 3) {
    dc = make_case3();
    Options om = o;
    if (om.ladder == std::vector<int>{2, 4, 8, 16, 32}) om.ladder = {16};
    mesh = load_or_build(om, dc.domB, dc.domD);
  } else if (o.case_id == 4) {
    if (o.mesh.empty())
      throw ConfigError("demo case 4 needs --mesh (see make-step-mesh)");
    PrimalMesh pm = ingest_primal(o.mesh);
    pm.validate();
    mesh = subdivide(pm);
    dc = make_case4(mesh.ncells);
  } else {
    throw ConfigError("unknown demo case " + std::to_string(o.case_id) +
                      " (expected 3 or 4)");
  }
  if (dt_set) dc.tprm.dt = o.dt;
  if (tf_set) {
    dc.tprm.tfinal = o.tfinal;
    while (!dc.snapshot_times.empty() && dc.snapshot_times.back() > o.tfinal + 1e-12)
      dc.snapshot_times.pop_back();
    if (dc.snapshot_times.empty() || dc.snapshot_times.back() < o.tfinal - 1e-12)
      dc.snapshot_times.push_back(o.tfinal);
  }
  DemoResult r = run_demo(dc, mesh, o.k, o.out, o.dump_stride);
  std::printf("snapshots:\n");
  for (size_t i = 0; i < r.snapshot_t.size(); ++i)
    std::printf("  t=%-8g mass=%.6e centroid=(%.6f, %.6f)\n", r.snapshot_t[i], r.mass[i],
                r.centroid_x[i], r.centroid_y[i]);
  std::printf("max ledger residual %.3e, max energy residual %.3e\n", r.max_ledger,
              r.max_energy);
  return run_asserts(o.asserts, nullptr, &r);
}

int cmd_check_mesh(const Options& o) {
  if (o.mesh.empty()) throw ConfigError("check-mesh needs --mesh");
  PrimalMesh pm = ingest_primal(o.mesh);
  pm.validate();
  StaggeredMesh m = subdivide(pm);
  int nif = 0, ngb = 0, ngd = 0;
  for (const Edge& e : m.edges) {
    if (e.cls == EdgeClass::Interface) ++nif;
    if (e.tag == BTag::GB) ++ngb;
    if (e.tag == BTag::GD) ++ngd;
  }
  std::printf("cells %d, subtriangles %zu (B %d, D %d), edges %zu\n", m.ncells,
              m.tris.size(), m.ntris_B, m.ntris_D, m.edges.size());
  std::printf("interface edges %d, GB edges %d, GD edges %d\n", nif, ngb, ngd);
  std::printf("h %.6g, min angle %.2f deg\n", m.h, m.min_angle);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"staggered DG solver for coupled Brinkman-Darcy flow and transport"};
  app.require_subcommand(1);
  Options o;
  CLI::App* conv = app.add_subcommand("convergence", "mesh-refinement study on a manufactured case");
  CLI::App* flow = app.add_subcommand("solve-flow", "solve the flow system once");
  CLI::App* tran = app.add_subcommand("run-transport", "solve flow, then run transport");
  CLI::App* demo = app.add_subcommand("demo", "built-in demo configurations (cases 3 and 4)");
  CLI::App* chk = app.add_subcommand("check-mesh", "validate a mesh file and print stats");
  for (CLI::App* c : {conv, flow, tran, demo, chk}) add_common(c, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (conv->parsed()) return cmd_convergence(o);
    if (flow->parsed()) return cmd_solve_flow(o);
    if (tran->parsed()) return cmd_run_transport(o);
    if (demo->parsed())
      return cmd_demo(o, demo->count("--dt") > 0, demo->count("--tfinal") > 0);
    if (chk->parsed()) return cmd_check_mesh(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << "\n";
    return 3;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
