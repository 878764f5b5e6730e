// Shared property checks for the discrete spaces, used by the unit tests and
// the acceptance suite.
#pragma once
#include "sdg/space.hpp"
#include <random>

namespace sdg_checks {
using namespace sdg;

// worst-case trace mismatch across shared edges for a random free dof vector
// (fixed dofs zero). Which trace is shared depends on the space.
inline double continuity_residual(const FeSpace& S, unsigned seed) {
  const StaggeredMesh& m = *S.mesh;
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  VectorXd xfree(S.nfree), xfixed = VectorXd::Zero(S.nfixed);
  for (int i = 0; i < S.nfree; ++i) xfree[i] = gauss(rng);

  QuadratureRule erule = edge_rule(2 * S.k + 2);
  double worst = 0;
  for (const Edge& e : m.edges) {
    if (e.is_boundary()) continue;
    bool shared = false, vector_normal = false, full_gn = false, gn_t = false;
    switch (S.kind) {
      case SpaceKind::QB:
        shared = e.cls == EdgeClass::PrimalInterior && e.sub == Sub::B;
        break;
      case SpaceKind::UH:
        shared = e.cls == EdgeClass::PrimalInterior || e.cls == EdgeClass::Interface;
        break;
      case SpaceKind::HB:
        shared = e.cls == EdgeClass::Dual && e.sub == Sub::B;
        vector_normal = true;
        break;
      case SpaceKind::WH:
        shared = e.cls == EdgeClass::Dual;
        vector_normal = true;
        break;
      case SpaceKind::HD:
        shared = m.tris[e.tau1].sub == Sub::D && m.tris[e.tau2].sub == Sub::D;
        vector_normal = true;
        break;
      case SpaceKind::WB:
        if (e.sub != Sub::B || e.cls == EdgeClass::Interface) break;
        if (e.cls == EdgeClass::PrimalInterior) { shared = true; full_gn = true; }
        if (e.cls == EdgeClass::Dual) { shared = true; gn_t = true; }
        break;
      case SpaceKind::QD:
        break;
    }
    if (!shared) continue;

    MappedQuad q = map_to_segment(erule, e.p0, e.p1);
    VectorXd c1 = S.local_coeffs(e.tau1, xfree, xfixed);
    VectorXd c2 = S.local_coeffs(e.tau2, xfree, xfixed);
    auto ev = [&](int tau, const VectorXd& c, int comp) { return S.eval(tau, c, q.x, comp); };
    auto jump = [&](const VectorXd& a, const VectorXd& b) {
      double w = (a - b).cwiseAbs().maxCoeff();
      return w;
    };
    if (S.kind == SpaceKind::QB || S.kind == SpaceKind::UH) {
      worst = std::max(worst, jump(ev(e.tau1, c1, 0), ev(e.tau2, c2, 0)));
    } else if (vector_normal) {
      VectorXd un1 = ev(e.tau1, c1, 0) * e.n.x() + ev(e.tau1, c1, 1) * e.n.y();
      VectorXd un2 = ev(e.tau2, c2, 0) * e.n.x() + ev(e.tau2, c2, 1) * e.n.y();
      worst = std::max(worst, jump(un1, un2));
    } else if (full_gn) {
      for (int r = 0; r < 2; ++r) {
        VectorXd a = ev(e.tau1, c1, 2 * r) * e.n.x() + ev(e.tau1, c1, 2 * r + 1) * e.n.y();
        VectorXd b = ev(e.tau2, c2, 2 * r) * e.n.x() + ev(e.tau2, c2, 2 * r + 1) * e.n.y();
        worst = std::max(worst, jump(a, b));
      }
    } else if (gn_t) {
      auto gnt = [&](int tau, const VectorXd& c) {
        VectorXd g0 = ev(tau, c, 0) * e.n.x() + ev(tau, c, 1) * e.n.y();
        VectorXd g1 = ev(tau, c, 2) * e.n.x() + ev(tau, c, 3) * e.n.y();
        return VectorXd(g0 * e.t.x() + g1 * e.t.y());
      };
      worst = std::max(worst, jump(gnt(e.tau1, c1), gnt(e.tau2, c2)));
    }
  }
  // constrained boundary traces must vanish (zero fixed values)
  if (S.kind == SpaceKind::WB) {
    for (const Edge& e : m.edges) {
      bool constrained = e.cls == EdgeClass::Interface ||
                         (e.tag == BTag::GB && !S.opts.relax_GB);
      if (!constrained) continue;
      MappedQuad q = map_to_segment(erule, e.p0, e.p1);
      VectorXd c1 = S.local_coeffs(e.tau1, xfree, xfixed);
      for (int r = 0; r < 2; ++r) {
        VectorXd gn = S.eval(e.tau1, c1, q.x, 2 * r) * e.n.x() +
                      S.eval(e.tau1, c1, q.x, 2 * r + 1) * e.n.y();
        worst = std::max(worst, gn.cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

// interpolate a random global polynomial of the space's degree and return the
// worst pointwise reproduction error (fixed dofs carry their true moments)
inline double reproduction_residual(const FeSpace& S, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  int deg = S.basis_degree(), nm = poly_dim(deg), nc = S.ncomp();
  MatrixXd coef(nm, nc);
  for (int i = 0; i < nm; ++i)
    for (int c = 0; c < nc; ++c) coef(i, c) = gauss(rng);
  auto exps = monomial_exponents(deg);
  MultiField F = [&](const MatX2& X) {
    MatrixXd out = MatrixXd::Zero(X.rows(), nc);
    for (int i = 0; i < nm; ++i) {
      VectorXd mono = X.col(0).array().pow(exps[i].first) *
                      X.col(1).array().pow(exps[i].second);
      for (int c = 0; c < nc; ++c) out.col(c) += coef(i, c) * mono;
    }
    return out;
  };
  VectorXd v = dof_values(S, F);
  VectorXd vfree = v.head(S.nfree), vfixed = v.tail(S.nfixed);
  QuadratureRule rule = triangle_rule(2 * S.k + 4);
  const StaggeredMesh& m = *S.mesh;
  double worst = 0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    if (!S.active(ti)) continue;
    MappedQuad q = map_to_triangle(rule, m.tri_pts(ti));
    VectorXd c = S.local_coeffs(ti, vfree, vfixed);
    MatrixXd ex = F(q.x);
    for (int comp = 0; comp < nc; ++comp)
      worst = std::max(worst,
                       (ex.col(comp) - S.eval(ti, c, q.x, comp)).cwiseAbs().maxCoeff());
  }
  return worst;
}

// cellwise L2 projection residual against a dense Gram-matrix oracle: project
// a smooth field with the space machinery and independently with raw scaled
// monomials, compare pointwise. Only for QD (true cellwise projection).
inline double gram_oracle_residual(const FeSpace& S, const MultiField& F) {
  const StaggeredMesh& m = *S.mesh;
  VectorXd v = dof_values(S, F);
  VectorXd vfree = v.head(S.nfree), vfixed = v.tail(S.nfixed);
  // same rule the dof functionals use, so both sides see identical moments
  QuadratureRule rule = triangle_rule(2 * S.k + 4);
  double worst = 0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    if (!S.active(ti)) continue;
    MappedQuad q = map_to_triangle(rule, m.tri_pts(ti));
    VectorXd c = S.local_coeffs(ti, vfree, vfixed);
    MatrixXd mono = S.bases[ti].monomials(q.x, S.basis_degree());
    MatrixXd G = mono.transpose() * q.w.asDiagonal() * mono;
    VectorXd rhs = mono.transpose() * q.w.cwiseProduct(F(q.x).col(0));
    VectorXd proj = mono * G.ldlt().solve(rhs);
    worst = std::max(worst, (proj - S.eval(ti, c, q.x, 0)).cwiseAbs().maxCoeff());
  }
  return worst;
}

// commutativity div(Pi^BDM u) = p_h(div u), pointwise at volume points
inline double bdm_commutativity_residual(const FeSpace& HD, const FeSpace& QD,
                                         const MultiField& u, const ScalarField& divu) {
  const StaggeredMesh& m = *HD.mesh;
  VectorXd vu = dof_values(HD, u);
  VectorXd du = dof_values(QD, [&](const MatX2& X) { return MatrixXd(divu(X)); });
  QuadratureRule rule = triangle_rule(2 * HD.k + 4);
  double worst = 0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    if (!HD.active(ti)) continue;
    MappedQuad q = map_to_triangle(rule, m.tri_pts(ti));
    VectorXd cu = HD.local_coeffs(ti, vu.head(HD.nfree), vu.tail(HD.nfixed));
    VectorXd cd = QD.local_coeffs(ti, du.head(QD.nfree), du.tail(QD.nfixed));
    std::vector<MatrixXd> gx, gy;
    HD.shape_grads(ti, q.x, gx, gy);
    VectorXd div = (gx[0] + gy[1]) * cu;
    worst = std::max(worst, (div - QD.eval(ti, cd, q.x, 0)).cwiseAbs().maxCoeff());
  }
  return worst;
}

} // namespace sdg_checks
