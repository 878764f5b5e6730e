#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "space_checks.hpp"
#include <cmath>

using namespace sdg;
using namespace sdg_checks;

namespace {
const Rect domB{0, 0.5, 0, 1}, domD{0.5, 1, 0, 1};

StaggeredMesh themesh() {
  return subdivide(build_rectangular_primal(domB, domD, 2, 4, CellKind::Quad));
}

const SpaceKind kinds[] = {SpaceKind::HB, SpaceKind::WB, SpaceKind::QB, SpaceKind::HD,
                           SpaceKind::QD, SpaceKind::UH, SpaceKind::WH};
} // namespace

TEST_CASE("dimension counts at k=1") {
  StaggeredMesh m = themesh();
  int nB = m.ntris_B, nD = m.ntris_D;
  FeSpace HD = build_space(SpaceKind::HD, m, 1);
  CHECK(HD.patches.size() == m.tris.size());
  // BDM: 2 normal moments per edge account for the whole local dimension
  CHECK(HD.nloc() == 6);
  FeSpace QD = build_space(SpaceKind::QD, m, 1);
  CHECK(QD.ntot() == nD);  // one constant per subtriangle
  FeSpace WB = build_space(SpaceKind::WB, m, 1);
  CHECK(WB.nloc() == 12);
}

TEST_CASE("unisolvence: interpolation reproduces polynomials of full degree") {
  StaggeredMesh m = themesh();
  for (int k : {1, 2})
    for (SpaceKind kind : kinds) {
      FeSpace S = build_space(kind, m, k);
      CHECK(S.max_local_cond < 1e8);
      for (unsigned seed = 0; seed < 5; ++seed) {
        double r = reproduction_residual(S, 101 + seed);
        INFO("kind ", (int)kind, " k ", k, " seed ", seed);
        CHECK(r < 1e-12);
      }
    }
}

TEST_CASE("trace continuity of random discrete fields") {
  StaggeredMesh m = themesh();
  for (int k : {1, 2})
    for (SpaceKind kind : kinds) {
      FeSpace S = build_space(kind, m, k);
      for (unsigned seed = 0; seed < 5; ++seed) {
        double r = continuity_residual(S, 7 + seed);
        INFO("kind ", (int)kind, " k ", k, " seed ", seed);
        CHECK(r < 1e-12);
      }
    }
}

TEST_CASE("relaxed WB leaves the outer Brinkman boundary unconstrained") {
  StaggeredMesh m = themesh();
  SpaceOptions relax;
  relax.relax_GB = true;
  FeSpace a = build_space(SpaceKind::WB, m, 1);
  FeSpace b = build_space(SpaceKind::WB, m, 1, relax);
  CHECK(b.nfree > a.nfree);
  CHECK(a.nfree + a.nfixed == b.nfree + b.nfixed);
  CHECK(continuity_residual(b, 3) < 1e-12);
}

TEST_CASE("edge projection reproduces polynomials and is orthogonal on sin") {
  StaggeredMesh m = themesh();
  const Edge* pe = nullptr;
  for (const Edge& e : m.edges)
    if (e.cls == EdgeClass::PrimalInterior) { pe = &e; break; }
  REQUIRE(pe != nullptr);

  for (int k : {1, 2, 3}) {
    // degree-k data comes back exactly
    ScalarField poly = [&](const MatX2& X) {
      return VectorXd(X.col(0).array().pow(k) + 0.5 * X.col(1).array());
    };
    VectorXd cm = project_edge(poly, *pe, k);
    QuadratureRule r = edge_rule(2 * k + 6);
    MappedQuad q = map_to_segment(r, pe->p0, pe->p1);
    CHECK((eval_edge_poly(cm, q.s) - poly(q.x)).cwiseAbs().maxCoeff() < 1e-13);
  }

  ScalarField g = [](const MatX2& X) {
    return VectorXd(Eigen::sin(4.0 * X.col(0).array() + X.col(1).array()));
  };
  VectorXd cm = project_edge(g, *pe, 1);
  QuadratureRule r = edge_rule(24);
  MappedQuad q = map_to_segment(r, pe->p0, pe->p1);
  VectorXd resid = g(q.x) - eval_edge_poly(cm, q.s);
  // residual orthogonal to {1, s}
  CHECK(std::abs(q.w.dot(resid)) < 1e-12);
  CHECK(std::abs(q.w.dot(VectorXd(resid.cwiseProduct(q.s)))) < 1e-12);

  // dense Gram oracle on [-1,1]: normal equations with monomials 1, s
  MatrixXd V(q.s.size(), 2);
  V.col(0).setOnes();
  V.col(1) = q.s;
  MatrixXd G = V.transpose() * q.w.asDiagonal() * V;
  VectorXd co = G.ldlt().solve(V.transpose() * q.w.cwiseProduct(g(q.x)));
  CHECK((V * co - eval_edge_poly(cm, q.s)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("cellwise pressure projection matches a dense Gram oracle") {
  StaggeredMesh m = themesh();
  MultiField F = [](const MatX2& X) {
    return MatrixXd(Eigen::exp(X.col(0).array()) * Eigen::cos(2.0 * X.col(1).array()));
  };
  for (int k : {1, 2}) {
    FeSpace QD = build_space(SpaceKind::QD, m, k);
    CHECK(gram_oracle_residual(QD, F) < 1e-11);
  }
}

TEST_CASE("BDM interpolation commutes with the divergence") {
  StaggeredMesh m = themesh();
  MultiField u = [](const MatX2& X) {
    MatrixXd out(X.rows(), 2);
    out.col(0) = Eigen::sin(X.col(0).array()) * Eigen::cos(X.col(1).array());
    out.col(1) = X.col(0).array().pow(3) - X.col(1).array().square();
    return out;
  };
  ScalarField divu = [](const MatX2& X) {
    return VectorXd(Eigen::cos(X.col(0).array()) * Eigen::cos(X.col(1).array()) -
                    2.0 * X.col(1).array());
  };
  for (int k : {1, 2}) {
    FeSpace HD = build_space(SpaceKind::HD, m, k);
    FeSpace QD = build_space(SpaceKind::QD, m, k);
    CHECK(bdm_commutativity_residual(HD, QD, u, divu) < 1e-11);
  }
}

TEST_CASE("interpolation moment conditions hold under independent quadrature") {
  // the velocity interpolant keeps interior moments vs (P^{k-1})^2 and normal
  // moments on dual edges; check both with a fresh high-order rule
  StaggeredMesh m = themesh();
  int k = 2;
  FeSpace HB = build_space(SpaceKind::HB, m, k);
  MultiField u = [](const MatX2& X) {
    MatrixXd out(X.rows(), 2);
    out.col(0) = Eigen::sin(2.0 * X.col(0).array() + X.col(1).array());
    out.col(1) = Eigen::exp(-X.col(0).array() * X.col(1).array());
    return out;
  };
  VectorXd v = dof_values(HB, u);
  VectorXd vfree = v.head(HB.nfree), vfixed = v.tail(HB.nfixed);
  QuadratureRule vr = triangle_rule(2 * k + 10), er = edge_rule(2 * k + 10);
  double worst = 0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    if (!HB.active(ti)) continue;
    MappedQuad q = map_to_triangle(vr, m.tri_pts(ti));
    VectorXd c = HB.local_coeffs(ti, vfree, vfixed);
    MatrixXd mono = HB.bases[ti].monomials(q.x, k - 1);
    MatrixXd ue = u(q.x);
    for (int comp = 0; comp < 2; ++comp) {
      VectorXd diff = ue.col(comp) - HB.eval(ti, c, q.x, comp);
      worst = std::max(worst,
                       (mono.transpose() * q.w.cwiseProduct(diff)).cwiseAbs().maxCoeff());
    }
  }
  for (const Edge& e : m.edges) {
    if (e.cls != EdgeClass::Dual || e.sub != Sub::B) continue;
    MappedQuad q = map_to_segment(er, e.p0, e.p1);
    VectorXd c = HB.local_coeffs(e.tau1, vfree, vfixed);
    MatrixXd ue = u(q.x);
    VectorXd diff = (ue.col(0) - HB.eval(e.tau1, c, q.x, 0)) * e.n.x() +
                    (ue.col(1) - HB.eval(e.tau1, c, q.x, 1)) * e.n.y();
    for (int mm = 0; mm <= k; ++mm)
      worst = std::max(
          worst, std::abs(q.w.dot(VectorXd(diff.cwiseProduct(legendre(mm, q.s))))));
  }
  CHECK(worst < 1e-11);
}
