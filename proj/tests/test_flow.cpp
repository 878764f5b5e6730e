#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdg/harness.hpp"
#include <cmath>

using namespace sdg;

namespace {

StaggeredMesh mesh_for(const ManufacturedCase& mc, int hinv) {
  int nx = (int)std::lround((mc.domB.x1 - mc.domB.x0) * hinv);
  int ny = (int)std::lround((mc.domB.y1 - mc.domB.y0) * hinv);
  return subdivide(build_rectangular_primal(mc.domB, mc.domD, nx, ny, CellKind::Quad));
}

// relative max-norm difference, restricted to the first nr x nc block
double rel_diff(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                int nr = -1, int nc = -1) {
  if (nr < 0) nr = (int)A.rows();
  if (nc < 0) nc = (int)A.cols();
  Eigen::SparseMatrix<double> D = A - Eigen::SparseMatrix<double>(B);
  double na = 0, nd = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      if (it.row() < nr && it.col() < nc) na = std::max(na, std::abs(it.value()));
  for (int k = 0; k < D.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(D, k); it; ++it)
      if (it.row() < nr && it.col() < nc) nd = std::max(nd, std::abs(it.value()));
  return nd / std::max(na, 1e-300);
}

} // namespace

TEST_CASE("discrete adjoint identities") {
  ManufacturedCase mc = make_case1();
  for (int k : {1, 2}) {
    StaggeredMesh m = mesh_for(mc, 4);
    FlowSystem sys = build_flow_system(m, k, mc.params(), mc.bc);
    // restricted to free dofs: rows of constrained boundary traces pick up the
    // extra boundary term of the integration by parts and are dropped anyway
    CHECK(rel_diff(sys.Bstar, sys.Bh.transpose(), sys.WB.nfree, sys.HB.nfree) < 1e-13);
    CHECK(rel_diff(sys.bh, sys.bstar.transpose(), sys.QB.nfree, sys.HB.nfree) < 1e-13);
  }
}

TEST_CASE("manufactured flow solve: accuracy, mean pressure, conservation") {
  ManufacturedCase mc = make_case1();
  StaggeredMesh m = mesh_for(mc, 8);
  FlowSystem sys = build_flow_system(m, 1, mc.params(), mc.bc);
  FlowSolution sol = solve_flow(sys, mc.sources(), mc.bc);
  CHECK(sol.residual < 1e-10);
  CHECK(sys.use_multiplier);
  CHECK(sol.compat >= 0);

  ErrorSet err = flow_errors(sys, sol, mc);
  CHECK(err.uB < 1e-5);
  CHECK(err.uD < 2e-3);
  CHECK(err.pB < 2e-4);

  // zero-mean Brinkman pressure
  double ip = 0, np = 0;
  QuadratureRule vr = triangle_rule(4);
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    if (!sys.QB.active(ti)) continue;
    MappedQuad q = map_to_triangle(vr, m.tri_pts(ti));
    VectorXd p = sys.QB.eval(ti, sys.QB.local_coeffs(ti, sol.qb, VectorXd()), q.x, 0);
    ip += q.w.dot(p);
    np += q.w.dot(p.cwiseAbs());
  }
  CHECK(std::abs(ip) < 1e-10 * std::max(np, 1.0));

  ConservationReport rep = verify_conservation(sys, sol, mc.bc, mc.f);
  CHECK(rep.div_uB_max < 1e-9);
  CHECK(rep.iface_jump_max < 1e-9);
  CHECK(rep.g1_residual_max < 1e-9);
  CHECK(rep.div_uD_residual < 1e-9);
}

TEST_CASE("zero data gives the zero solution") {
  ManufacturedCase mc = make_case1();
  StaggeredMesh m = mesh_for(mc, 4);
  FlowSystem sys = build_flow_system(m, 1, mc.params(), FlowBC{});
  FlowSolution sol = solve_flow(sys, FlowSources{}, FlowBC{});
  for (const VectorXd* v : {&sol.wb, &sol.hb, &sol.qb, &sol.hd, &sol.qd})
    CHECK(v->cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("gradient forcing moves the pressure, not the velocity") {
  ManufacturedCase mc = make_case1();
  StaggeredMesh m = mesh_for(mc, 4);
  FlowSystem sys = build_flow_system(m, 1, mc.params(), mc.bc);
  FlowSolution base = solve_flow(sys, mc.sources(), mc.bc);

  // grad of psi = 1e6 (x^2 + y^2), added to both body forces so the data
  // stays consistent across the interface (a one-sided gradient force is a
  // genuine physical perturbation that drives Darcy flow)
  auto add_grad = [](const MultiField& f0) {
    return MultiField([f0](const MatX2& X) {
      MatrixXd out = f0(X);
      out.col(0) += 2e6 * X.col(0);
      out.col(1) += 2e6 * X.col(1);
      return out;
    });
  };
  FlowSources src = mc.sources();
  src.fB = add_grad(src.fB);
  src.fD = add_grad(src.fD);
  FlowSolution pert = solve_flow(sys, src, mc.bc);
  double dp = (pert.qb - base.qb).norm();
  CHECK(dp > 1e3);  // pressure absorbs the O(1e6) forcing
  // velocity change is roundoff relative to the perturbation that caused it
  CHECK((pert.hb - base.hb).norm() < 1e-8 * dp);
  CHECK((pert.wb - base.wb).norm() < 1e-8 * dp);
  CHECK((pert.hd - base.hd).norm() < 1e-8 * dp);
}

TEST_CASE("incompatible data is rejected when no pressure boundary exists") {
  ManufacturedCase mc = make_case1();
  StaggeredMesh m = mesh_for(mc, 2);
  FlowSystem sys = build_flow_system(m, 1, mc.params(), mc.bc);
  FlowBC bad = mc.bc;
  EdgeScalarField g2 = bad.g2;
  bad.g2 = [g2](const Edge& e, const MatX2& X) {
    return VectorXd(g2(e, X).array() + 1.0);
  };
  CHECK_THROWS_AS(solve_flow(sys, mc.sources(), bad), ConfigError);
}

TEST_CASE("pressure boundary replaces the multiplier") {
  ManufacturedCase mc = make_case1();
  FlowBC bc = mc.bc;
  // Dirichlet pressure on the right wall of the Darcy box
  bc.pressure_edge = [](const Edge& e) { return e.mid.x() > 1 - 1e-12; };
  bc.p_dirichlet = [pD = mc.pD](const Edge&, const MatX2& X) { return pD(X); };
  StaggeredMesh m = mesh_for(mc, 8);
  FlowSystem sys = build_flow_system(m, 1, mc.params(), bc);
  CHECK(!sys.use_multiplier);
  FlowSolution sol = solve_flow(sys, mc.sources(), bc);
  CHECK(sol.compat < 0);  // skipped
  ErrorSet err = flow_errors(sys, sol, mc);
  CHECK(err.uD < 2e-3);
  CHECK(err.pD < 4e-3);
}

TEST_CASE("per-cell permeability override matches the scalar parameter") {
  ManufacturedCase mc = make_case1(1, 1, 0.37);
  StaggeredMesh m = mesh_for(mc, 4);
  FlowSystem a = build_flow_system(m, 1, mc.params(), mc.bc);
  FlowParams prm = mc.params();
  prm.kdarcy = 1.0;
  prm.kdarcy_cell = [](int) { return 0.37; };
  FlowSystem b = build_flow_system(m, 1, prm, mc.bc);
  CHECK(rel_diff(a.MD, b.MD) < 1e-14);
}
