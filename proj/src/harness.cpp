#include "sdg/harness.hpp"
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sdg {

namespace {

// squared L2 distance between an expanded discrete field and a smooth one,
// summed over the active subtriangles of S
double l2err2(const FeSpace& S, const VectorXd& xfree, const VectorXd& xfixed,
              const MultiField& exact, double wcomp = 1.0) {
  const StaggeredMesh& m = *S.mesh;
  QuadratureRule rule = triangle_rule(2 * S.k + 4);
  double acc = 0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    if (!S.active(ti)) continue;
    MappedQuad q = map_to_triangle(rule, m.tri_pts(ti));
    VectorXd coef = S.local_coeffs(ti, xfree, xfixed);
    MatrixXd ex = exact(q.x);
    for (int c = 0; c < S.ncomp(); ++c) {
      VectorXd diff = ex.col(c) - S.eval(ti, coef, q.x, c);
      acc += wcomp * q.w.dot(diff.cwiseAbs2());
    }
  }
  return acc;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

} // namespace

ErrorSet flow_errors(const FlowSystem& sys, const FlowSolution& sol,
                     const ManufacturedCase& mc) {
  ErrorSet e;
  VectorXd z0;
  e.L = std::sqrt(l2err2(sys.WB, sol.wb, VectorXd::Zero(sys.WB.nfixed), mc.L, 1.0 / mc.eps));
  e.uB = std::sqrt(l2err2(sys.HB, sol.hb, z0, mc.uB));
  e.pB = std::sqrt(l2err2(sys.QB, sol.qb, z0, [&](const MatX2& X) {
    return MatrixXd(mc.pB(X));
  }));
  e.uD = std::sqrt(l2err2(sys.HD, sol.hd, sol.hd_fixed, mc.uD));
  e.pD = std::sqrt(l2err2(sys.QD, sol.qd, z0, [&](const MatX2& X) {
    return MatrixXd(mc.pD(X));
  }));
  return e;
}

void transport_errors(const TransportSolver& ts, const ManufacturedCase& mc,
                      ErrorSet& out) {
  const StaggeredMesh& m = *ts.UH().mesh;
  QuadratureRule rule = triangle_rule(2 * ts.UH().k + 4);
  double ec = 0, ez = 0, T = ts.time();
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    MappedQuad q = map_to_triangle(rule, m.tri_pts(ti));
    VectorXd dc = mc.c(q.x, T) - ts.eval_c(ti, q.x);
    ec += q.w.dot(dc.cwiseAbs2());
    MatX2 dz = mc.z(q.x, T) - ts.eval_z(ti, q.x);
    ez += q.w.dot(dz.col(0).cwiseAbs2()) + q.w.dot(dz.col(1).cwiseAbs2());
  }
  out.c = std::sqrt(ec);
  out.z = std::sqrt(ez);
}

double ConvergenceResult::eoc(double ErrorSet::*field) const {
  if (rows.size() < 2) return std::nan("");
  const LadderRow& a = rows[rows.size() - 2];
  const LadderRow& b = rows.back();
  return std::log(a.err.*field / b.err.*field) / std::log(a.h / b.h);
}

ConvergenceResult run_convergence(const ManufacturedCase& mc,
                                  const ConvergenceOptions& opt) {
  ConvergenceResult res;
  for (int hi : opt.hinv) {
    int nx = (int)std::lround((mc.domB.x1 - mc.domB.x0) * hi);
    int ny = (int)std::lround((mc.domB.y1 - mc.domB.y0) * hi);
    PrimalMesh pm = build_rectangular_primal(mc.domB, mc.domD, nx, ny, opt.kind);
    StaggeredMesh mesh = subdivide(pm);

    FlowSystem fsys = build_flow_system(mesh, opt.k, mc.params(), mc.bc);
    FlowSolution fsol = solve_flow(fsys, mc.sources(), mc.bc);

    LadderRow row;
    row.h = 1.0 / hi;
    row.err = flow_errors(fsys, fsol, mc);
    row.cons = verify_conservation(fsys, fsol, mc.bc, mc.f);

    if (opt.transport) {
      TransportParams tp;
      tp.K = mc.kdiff * Eigen::Matrix2d::Identity();
      tp.dt = opt.dt;
      tp.tfinal = opt.tfinal;
      TransportData td;
      td.s = mc.s;
      td.c_in = mc.c;
      td.c_hat = mc.c;
      td.f = mc.f;
      td.c0 = [&](const MatX2& X) { return mc.c(X, 0.0); };
      TransportSolver ts(fsys, fsol, mc.bc, tp, td);
      ts.run();
      transport_errors(ts, mc, row.err);
      row.stab = ts.stability();
      row.max_energy = ts.max_energy_residual();
      row.max_ledger = ts.max_ledger_residual();
    }
    res.rows.push_back(row);
  }
  return res;
}

std::string convergence_csv(const ConvergenceResult& r) {
  std::string out =
      "h,err_L,ord_L,err_uB,ord_uB,err_pB,ord_pB,err_uD,ord_uD,err_pD,ord_pD,"
      "err_c,ord_c,err_z,ord_z,div_uB_max,iface_jump_max,div_uD_residual\n";
  const double ErrorSet::*fields[] = {&ErrorSet::L,  &ErrorSet::uB, &ErrorSet::pB,
                                      &ErrorSet::uD, &ErrorSet::pD, &ErrorSet::c,
                                      &ErrorSet::z};
  for (size_t i = 0; i < r.rows.size(); ++i) {
    const LadderRow& row = r.rows[i];
    out += fmt("%.10g", row.h);
    for (auto f : fields) {
      out += "," + fmt("%.6e", row.err.*f);
      const LadderRow& prev = r.rows[i > 0 ? i - 1 : 0];
      if (i == 0 || prev.err.*f <= 0 || row.err.*f <= 0)
        out += ",NA";
      else {
        double ord = std::log(prev.err.*f / row.err.*f) / std::log(prev.h / row.h);
        out += "," + fmt("%.3f", ord);
      }
    }
    out += "," + fmt("%.6e", row.cons.div_uB_max);
    out += "," + fmt("%.6e", row.cons.iface_jump_max);
    out += "," + fmt("%.6e", row.cons.div_uD_residual);
    out += "\n";
  }
  return out;
}

std::string steps_csv(const std::vector<StepRecord>& recs, int stride) {
  if (stride < 1) stride = 1;
  std::string out = "step,t,cnorm,znorm,influx,outflux,ledger\n";
  for (const StepRecord& r : recs) {
    if (r.step % stride != 0 && r.step != (int)recs.size()) continue;
    out += std::to_string(r.step);
    out += "," + fmt("%.10g", r.t);
    out += "," + fmt("%.8e", r.cnorm);
    out += "," + fmt("%.8e", r.znorm);
    out += "," + fmt("%.8e", r.influx);
    out += "," + fmt("%.8e", r.outflux);
    out += "," + fmt("%.3e", r.ledger);
    out += "\n";
  }
  return out;
}

DemoResult run_demo(const DemoCase& dc, const StaggeredMesh& mesh, int k,
                    const std::string& outdir, int dump_stride) {
  FlowSystem fsys = build_flow_system(mesh, k, dc.fprm, dc.bc);
  FlowSolution fsol = solve_flow(fsys, dc.src, dc.bc);

  DemoResult res;
  res.cons = verify_conservation(fsys, fsol, dc.bc, dc.src.f);

  TransportSolver ts(fsys, fsol, dc.bc, dc.tprm, dc.tdata);

  QuadratureRule vrule = triangle_rule(2 * k + 2);
  auto snapshot = [&](double t) {
    double mass = 0, mx = 0, my = 0;
    std::ofstream csv;
    if (!outdir.empty()) {
      std::string path = outdir + "/" + dc.name + "_c_t" + fmt("%g", t) + ".csv";
      csv.open(path);
      csv << "x,y,c\n";
    }
    for (int ti = 0; ti < (int)mesh.tris.size(); ++ti) {
      MappedQuad q = map_to_triangle(vrule, mesh.tri_pts(ti));
      VectorXd cv = ts.eval_c(ti, q.x);
      mass += q.w.dot(cv);
      mx += q.w.dot(VectorXd(cv.cwiseProduct(q.x.col(0))));
      my += q.w.dot(VectorXd(cv.cwiseProduct(q.x.col(1))));
      if (csv.is_open()) {
        TriPts p = mesh.tri_pts(ti);
        MatX2 cen = (p.row(0) + p.row(1) + p.row(2)) / 3.0;
        VectorXd cc = ts.eval_c(ti, cen);
        csv << fmt("%.8g", cen(0, 0)) << "," << fmt("%.8g", cen(0, 1)) << ","
            << fmt("%.8e", cc[0]) << "\n";
      }
    }
    res.snapshot_t.push_back(t);
    res.mass.push_back(mass);
    res.centroid_x.push_back(mass != 0 ? mx / mass : 0);
    res.centroid_y.push_back(mass != 0 ? my / mass : 0);
  };

  if (!outdir.empty()) {
    // velocity field at subtriangle centroids, fixed over the transport run
    std::ofstream csv(outdir + "/" + dc.name + "_u.csv");
    csv << "x,y,ux,uy\n";
    for (int ti = 0; ti < (int)mesh.tris.size(); ++ti) {
      TriPts p = mesh.tri_pts(ti);
      MatX2 cen = (p.row(0) + p.row(1) + p.row(2)) / 3.0;
      MatX2 u = flow_velocity(fsys, fsol, ti, cen);
      csv << fmt("%.8g", cen(0, 0)) << "," << fmt("%.8g", cen(0, 1)) << ","
          << fmt("%.8e", u(0, 0)) << "," << fmt("%.8e", u(0, 1)) << "\n";
    }
  }

  snapshot(0.0);
  size_t next = 0;
  ts.run([&](int, double t) {
    if (next < dc.snapshot_times.size() &&
        t >= dc.snapshot_times[next] - 0.5 * dc.tprm.dt) {
      snapshot(t);
      ++next;
    }
  });

  res.records = ts.records();
  res.stab = ts.stability();
  res.max_ledger = ts.max_ledger_residual();
  res.max_energy = ts.max_energy_residual();
  if (!outdir.empty()) {
    std::ofstream csv(outdir + "/" + dc.name + "_steps.csv");
    csv << steps_csv(res.records, dump_stride);
  }
  return res;
}

} // namespace sdg
