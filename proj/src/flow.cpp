#include "sdg/flow.hpp"
#include "sdg/assembly.hpp"
#include <Eigen/SparseLU>
#include <vector>

namespace sdg {

FlowSystem build_flow_system(const StaggeredMesh& mesh, int k, const FlowParams& prm,
                             const FlowBC& bc) {
  FlowSystem S;
  S.mesh = &mesh;
  S.k = k;
  S.prm = prm;
  SpaceOptions wbopts;
  wbopts.relax_GB = prm.relax_GB;
  SpaceOptions hdopts;
  if (bc.pressure_edge)
    hdopts.hd_flux_edge = [pe = bc.pressure_edge](const Edge& e) { return !pe(e); };
  S.WB = build_space(SpaceKind::WB, mesh, k, wbopts);
  S.HB = build_space(SpaceKind::HB, mesh, k);
  S.QB = build_space(SpaceKind::QB, mesh, k);
  S.HD = build_space(SpaceKind::HD, mesh, k, hdopts);
  S.QD = build_space(SpaceKind::QD, mesh, k);
  S.use_multiplier = true;
  if (bc.pressure_edge)
    for (const Edge& e : mesh.edges)
      if (e.cls == EdgeClass::PrimalBoundary && e.tag == BTag::GD && bc.pressure_edge(e))
        S.use_multiplier = false;

  BlockBuilder Mwb(S.WB, S.WB), Malpha(S.HB, S.HB), Bstar(S.WB, S.HB), Bh(S.HB, S.WB),
      bstar(S.HB, S.QB), bh(S.QB, S.HB), MD(S.HD, S.HD), Ah(S.HD, S.QD), Ih(S.HD, S.QB);
  S.mult = VectorXd::Zero(S.QB.ntot());

  QuadratureRule vrule = triangle_rule(2 * k + 2);
  QuadratureRule erule = edge_rule(2 * k + 2);

  for (int ti = 0; ti < (int)mesh.tris.size(); ++ti) {
    MappedQuad q = map_to_triangle(vrule, mesh.tri_pts(ti));
    if (mesh.tris[ti].sub == Sub::B) {
      auto Gc = S.WB.shape_values(ti, q.x);
      std::vector<MatrixXd> Ggx, Ggy;
      S.WB.shape_grads(ti, q.x, Ggx, Ggy);
      auto Uc = S.HB.shape_values(ti, q.x);
      std::vector<MatrixXd> Ugx, Ugy;
      S.HB.shape_grads(ti, q.x, Ugx, Ugy);
      MatrixXd Pc = S.QB.shape_values(ti, q.x)[0];
      std::vector<MatrixXd> Pgx, Pgy;
      S.QB.shape_grads(ti, q.x, Pgx, Pgy);

      MatrixXd mg = MatrixXd::Zero(Gc[0].cols(), Gc[0].cols());
      for (int c = 0; c < 4; ++c) mg += wdot(Gc[c], q.w, Gc[c]);
      Mwb.add(ti, ti, mg / prm.eps);

      MatrixXd mu = wdot(Uc[0], q.w, Uc[0]) + wdot(Uc[1], q.w, Uc[1]);
      Malpha.add(ti, ti, prm.alpha * mu);

      // G rows are (G00 G01; G10 G11); row i of div G is dx Gi0 + dy Gi1
      MatrixXd div0 = Ggx[0] + Ggy[1];
      MatrixXd div1 = Ggx[2] + Ggy[3];
      Bstar.add(ti, ti, -(wdot(div0, q.w, Uc[0]) + wdot(div1, q.w, Uc[1])));

      // (G, grad v): grad v rows (dx v0, dy v0; dx v1, dy v1)
      MatrixXd bloc = wdot(Ugx[0], q.w, Gc[0]) + wdot(Ugy[0], q.w, Gc[1]) +
                      wdot(Ugx[1], q.w, Gc[2]) + wdot(Ugy[1], q.w, Gc[3]);
      Bh.add(ti, ti, bloc);

      MatrixXd divv = Ugx[0] + Ugy[1];
      bstar.add(ti, ti, -wdot(divv, q.w, Pc));
      bh.add(ti, ti, wdot(Pgx[0], q.w, Uc[0]) + wdot(Pgy[0], q.w, Uc[1]));

      // zero-mean constraint on p_B
      VectorXd loc = Pc.transpose() * q.w;
      VectorXd g = S.QB.patches[ti].C.transpose() * loc;
      for (size_t i = 0; i < S.QB.patches[ti].dofs.size(); ++i)
        S.mult[S.QB.patches[ti].dofs[i].gid] += g[i];
    } else {
      auto Uc = S.HD.shape_values(ti, q.x);
      std::vector<MatrixXd> Ugx, Ugy;
      S.HD.shape_grads(ti, q.x, Ugx, Ugy);
      MatrixXd Pc = S.QD.shape_values(ti, q.x)[0];
      double kd = prm.kdarcy_cell ? prm.kdarcy_cell(mesh.tris[ti].cell) : prm.kdarcy;
      MD.add(ti, ti, (wdot(Uc[0], q.w, Uc[0]) + wdot(Uc[1], q.w, Uc[1])) / kd);
      MatrixXd divv = Ugx[0] + Ugy[1];
      Ah.add(ti, ti, wdot(divv, q.w, Pc));
    }
  }

  for (const Edge& e : mesh.edges) {
    MappedQuad q = map_to_segment(erule, e.p0, e.p1);
    int t1 = e.tau1, t2 = e.tau2;
    if (e.cls == EdgeClass::Dual && e.sub == Sub::B) {
      // B*: +([Gn].n, u.n); u.n single valued (normal moments shared)
      auto U1 = S.HB.shape_values(t1, q.x);
      MatrixXd un1 = U1[0] * e.n.x() + U1[1] * e.n.y();
      for (auto [tG, sgn] : {std::pair{t1, 1.0}, {t2, -1.0}}) {
        auto Gc = S.WB.shape_values(tG, q.x);
        MatrixXd Gnn = (Gc[0] * e.n.x() + Gc[1] * e.n.y()) * e.n.x() +
                       (Gc[2] * e.n.x() + Gc[3] * e.n.y()) * e.n.y();
        Bstar.add(tG, t1, sgn * wdot(Gnn, q.w, un1));
      }
      // B: -((Gn).t, [v.t]); (Gn).t single valued (tangential moments shared)
      auto G1 = S.WB.shape_values(t1, q.x);
      MatrixXd Gnt = (G1[0] * e.n.x() + G1[1] * e.n.y()) * e.t.x() +
                     (G1[2] * e.n.x() + G1[3] * e.n.y()) * e.t.y();
      for (auto [tv, sgn] : {std::pair{t1, 1.0}, {t2, -1.0}}) {
        auto Uv = S.HB.shape_values(tv, q.x);
        MatrixXd vt = Uv[0] * e.t.x() + Uv[1] * e.t.y();
        Bh.add(tv, t1, -sgn * wdot(vt, q.w, Gnt));
      }
      // b: -(u.n, [q])
      for (auto [tq, sgn] : {std::pair{t1, 1.0}, {t2, -1.0}}) {
        MatrixXd Qv = S.QB.shape_values(tq, q.x)[0];
        bh.add(tq, t1, -sgn * wdot(Qv, q.w, un1));
      }
    } else if (e.cls == EdgeClass::PrimalInterior && e.sub == Sub::B) {
      // B: -(Gn, [v]); Gn single valued (moments shared)
      auto G1 = S.WB.shape_values(t1, q.x);
      MatrixXd Gn0 = G1[0] * e.n.x() + G1[1] * e.n.y();
      MatrixXd Gn1 = G1[2] * e.n.x() + G1[3] * e.n.y();
      MatrixXd Q1 = S.QB.shape_values(t1, q.x)[0];
      for (auto [tv, sgn] : {std::pair{t1, 1.0}, {t2, -1.0}}) {
        auto Uv = S.HB.shape_values(tv, q.x);
        Bh.add(tv, t1, -sgn * (wdot(Uv[0], q.w, Gn0) + wdot(Uv[1], q.w, Gn1)));
        // b*: +([v.n], p); p single valued
        MatrixXd vn = Uv[0] * e.n.x() + Uv[1] * e.n.y();
        bstar.add(tv, t1, sgn * wdot(vn, q.w, Q1));
      }
    } else if (e.cls == EdgeClass::PrimalBoundary && e.tag == BTag::GB) {
      MatrixXd Q1 = S.QB.shape_values(t1, q.x)[0];
      auto Uv = S.HB.shape_values(t1, q.x);
      MatrixXd vn = Uv[0] * e.n.x() + Uv[1] * e.n.y();
      bstar.add(t1, t1, wdot(vn, q.w, Q1));
      if (prm.relax_GB) {
        // natural term picked up when Gn is left free on Gamma_B
        auto G1 = S.WB.shape_values(t1, q.x);
        MatrixXd Gn0 = G1[0] * e.n.x() + G1[1] * e.n.y();
        MatrixXd Gn1 = G1[2] * e.n.x() + G1[3] * e.n.y();
        Bh.add(t1, t1, -(wdot(Uv[0], q.w, Gn0) + wdot(Uv[1], q.w, Gn1)));
      }
    } else if (e.cls == EdgeClass::Interface) {
      // t1 = Brinkman side, n = n_B
      MatrixXd Q1 = S.QB.shape_values(t1, q.x)[0];
      auto Uv = S.HB.shape_values(t1, q.x);
      MatrixXd vn = Uv[0] * e.n.x() + Uv[1] * e.n.y();
      bstar.add(t1, t1, wdot(vn, q.w, Q1));
      auto Ud = S.HD.shape_values(t2, q.x);
      MatrixXd vdn = -(Ud[0] * e.n.x() + Ud[1] * e.n.y());  // n_D = -n
      Ih.add(t2, t1, wdot(vdn, q.w, Q1));
    }
  }

  S.Mwb = Mwb.build();
  S.Malpha = Malpha.build();
  S.Bstar = Bstar.build();
  S.Bh = Bh.build();
  S.bstar = bstar.build();
  S.bh = bh.build();
  S.MD = MD.build();
  S.Ah = Ah.build();
  S.Ih = Ih.build();
  return S;
}

namespace {

// scatter one block into the composed system, dropping fixed rows and folding
// fixed columns (with values xc_fixed) into the rhs
void scatter(std::vector<Eigen::Triplet<double>>& trips, VectorXd& rhs, const SpMat& B,
             double sign, const FeSpace& R, int roff, const FeSpace& C, int coff,
             const VectorXd* cfixed, bool transpose = false) {
  for (int o = 0; o < B.outerSize(); ++o)
    for (SpMat::InnerIterator it(B, o); it; ++it) {
      int i = transpose ? (int)it.col() : (int)it.row();
      int j = transpose ? (int)it.row() : (int)it.col();
      if (i >= R.nfree) continue;
      double v = sign * it.value();
      if (j >= C.nfree) {
        if (cfixed && (*cfixed)[j - C.nfree] != 0.0) rhs[roff + i] -= v * (*cfixed)[j - C.nfree];
        continue;
      }
      trips.emplace_back(roff + i, coff + j, v);
    }
}

VectorXd assemble_rhs(const FeSpace& S, const MultiField& F, const QuadratureRule& vrule) {
  VectorXd out = VectorXd::Zero(S.ntot());
  for (int ti = 0; ti < (int)S.mesh->tris.size(); ++ti) {
    if (!S.active(ti)) continue;
    MappedQuad q = map_to_triangle(vrule, S.mesh->tri_pts(ti));
    MatrixXd fv = F(q.x);  // (nq, ncomp)
    auto comps = S.shape_values(ti, q.x);
    VectorXd loc = VectorXd::Zero(S.nloc());
    for (int c = 0; c < S.ncomp(); ++c)
      loc += comps[c].transpose() * (q.w.cwiseProduct(fv.col(c)));
    VectorXd g = S.patches[ti].C.transpose() * loc;
    for (size_t i = 0; i < S.patches[ti].dofs.size(); ++i)
      out[S.patches[ti].dofs[i].gid] += g[i];
  }
  return out;
}

} // namespace

FlowSolution solve_flow(const FlowSystem& sys, const FlowSources& src, const FlowBC& bc) {
  const StaggeredMesh& m = *sys.mesh;
  int k = sys.k;
  QuadratureRule vrule = triangle_rule(2 * k + 2);
  QuadratureRule erule = edge_rule(2 * k + 2);
  FlowSolution sol;

  // compatibility: int g1 + int g2 = int f (skipped with a pressure segment)
  if (sys.use_multiplier) {
    double ig = 0, iscale = 0;
    for (const Edge& e : m.edges) {
      if (e.cls != EdgeClass::PrimalBoundary) continue;
      const EdgeScalarField& g = (e.tag == BTag::GB) ? bc.g1 : bc.g2;
      if (!g) continue;
      MappedQuad q = map_to_segment(erule, e.p0, e.p1);
      VectorXd gv = g(e, q.x);
      ig += q.w.dot(gv);
      iscale += q.w.dot(gv.cwiseAbs());
    }
    double ifv = 0;
    for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
      if (m.tris[ti].sub != Sub::D || !src.f) continue;
      MappedQuad q = map_to_triangle(vrule, m.tri_pts(ti));
      VectorXd fv = src.f(q.x);
      ifv += q.w.dot(fv);
      iscale += q.w.dot(fv.cwiseAbs());
    }
    sol.compat = std::abs(ig - ifv);
    if (sol.compat > 1e-10 * std::max(iscale, 1.0))
      throw ConfigError("boundary data fails the compatibility condition: residual " +
                        std::to_string(sol.compat));
  }

  // unknown layout: [WB HB QB HD QD (lambda)], free dofs only
  const FeSpace* sp[5] = {&sys.WB, &sys.HB, &sys.QB, &sys.HD, &sys.QD};
  int off[6];
  off[0] = 0;
  for (int i = 0; i < 5; ++i) off[i + 1] = off[i] + sp[i]->nfree;
  int N = off[5] + (sys.use_multiplier ? 1 : 0);

  VectorXd rhs = VectorXd::Zero(N);
  VectorXd wb_fixed = VectorXd::Zero(sys.WB.nfixed);
  sol.hd_fixed = bc.g2 ? lifted_values(sys.HD, bc.g2) : VectorXd::Zero(sys.HD.nfixed);

  std::vector<Eigen::Triplet<double>> T;
  // eq WB: (eps^-1 L,G) - B*(u,G) = relax rhs
  scatter(T, rhs, sys.Mwb, 1.0, sys.WB, off[0], sys.WB, off[0], &wb_fixed);
  scatter(T, rhs, sys.Bstar, -1.0, sys.WB, off[0], sys.HB, off[1], nullptr);
  // eq HB: B(L,v) + alpha(u,v) + b*(p,v) = (fB,v)
  scatter(T, rhs, sys.Bh, 1.0, sys.HB, off[1], sys.WB, off[0], &wb_fixed);
  scatter(T, rhs, sys.Malpha, 1.0, sys.HB, off[1], sys.HB, off[1], nullptr);
  scatter(T, rhs, sys.bstar, 1.0, sys.HB, off[1], sys.QB, off[2], nullptr);
  // eq QB: -b(u,q) - I(q,uD) [+ lambda] = -(g1,q)
  scatter(T, rhs, sys.bh, -1.0, sys.QB, off[2], sys.HB, off[1], nullptr);
  scatter(T, rhs, sys.Ih, -1.0, sys.QB, off[2], sys.HD, off[3], &sol.hd_fixed, true);
  // eq HD: (K^-1 uD,v) + I(pB,v) - A(v,pD) = (fD,v) - pressure bc
  scatter(T, rhs, sys.MD, 1.0, sys.HD, off[3], sys.HD, off[3], &sol.hd_fixed);
  scatter(T, rhs, sys.Ih, 1.0, sys.HD, off[3], sys.QB, off[2], nullptr);
  scatter(T, rhs, sys.Ah, -1.0, sys.HD, off[3], sys.QD, off[4], nullptr);
  // eq QD: A(uD,q) = (f,q)
  scatter(T, rhs, sys.Ah, 1.0, sys.QD, off[4], sys.HD, off[3], &sol.hd_fixed, true);

  if (sys.use_multiplier) {
    for (int j = 0; j < sys.QB.nfree; ++j)
      if (sys.mult[j] != 0.0) {
        T.emplace_back(off[2] + j, N - 1, sys.mult[j]);
        T.emplace_back(N - 1, off[2] + j, sys.mult[j]);
      }
  }

  // volume sources
  if (src.fB) rhs.segment(off[1], sys.HB.nfree) += assemble_rhs(sys.HB, src.fB, vrule).head(sys.HB.nfree);
  if (src.fD) rhs.segment(off[3], sys.HD.nfree) += assemble_rhs(sys.HD, src.fD, vrule).head(sys.HD.nfree);
  if (src.f) {
    MultiField fq = [&](const MatX2& X) { return MatrixXd(src.f(X)); };
    rhs.segment(off[4], sys.QD.nfree) += assemble_rhs(sys.QD, fq, vrule).head(sys.QD.nfree);
  }

  // boundary terms
  for (const Edge& e : m.edges) {
    if (e.cls != EdgeClass::PrimalBoundary) continue;
    MappedQuad q = map_to_segment(erule, e.p0, e.p1);
    int t1 = e.tau1;
    if (e.tag == BTag::GB) {
      // eq QB: -(g1, q)
      if (bc.g1) {
        VectorXd gv = bc.g1(e, q.x);
        MatrixXd Qv = sys.QB.shape_values(t1, q.x)[0];
        VectorXd g = sys.QB.patches[t1].C.transpose() * (Qv.transpose() * q.w.cwiseProduct(gv));
        for (size_t i = 0; i < sys.QB.patches[t1].dofs.size(); ++i) {
          const auto& d = sys.QB.patches[t1].dofs[i];
          if (!d.fixed) rhs[off[2] + d.gid] -= g[i];
        }
      }
      // eq WB (relax mode): +(Gn, u_dir)
      if (sys.prm.relax_GB && bc.brinkman_velocity) {
        MatrixXd ud = bc.brinkman_velocity(q.x);  // (nq,2)
        auto Gc = sys.WB.shape_values(t1, q.x);
        MatrixXd Gn0 = Gc[0] * e.n.x() + Gc[1] * e.n.y();
        MatrixXd Gn1 = Gc[2] * e.n.x() + Gc[3] * e.n.y();
        VectorXd loc = Gn0.transpose() * q.w.cwiseProduct(ud.col(0)) +
                       Gn1.transpose() * q.w.cwiseProduct(ud.col(1));
        VectorXd g = sys.WB.patches[t1].C.transpose() * loc;
        for (size_t i = 0; i < sys.WB.patches[t1].dofs.size(); ++i) {
          const auto& d = sys.WB.patches[t1].dofs[i];
          if (!d.fixed) rhs[off[0] + d.gid] += g[i];
        }
      }
    } else if (e.tag == BTag::GD && bc.pressure_edge && bc.pressure_edge(e)) {
      // eq HD: -(v.n, p_dir)
      VectorXd pv = bc.p_dirichlet(e, q.x);
      auto Uv = sys.HD.shape_values(t1, q.x);
      MatrixXd vn = Uv[0] * e.n.x() + Uv[1] * e.n.y();
      VectorXd g = sys.HD.patches[t1].C.transpose() * (vn.transpose() * q.w.cwiseProduct(pv));
      for (size_t i = 0; i < sys.HD.patches[t1].dofs.size(); ++i) {
        const auto& d = sys.HD.patches[t1].dofs[i];
        if (!d.fixed) rhs[off[3] + d.gid] -= g[i];
      }
    }
  }

  SpMat A(N, N);
  A.setFromTriplets(T.begin(), T.end());
  A.makeCompressed();
  Eigen::SparseLU<SpMat> lu(A);
  if (lu.info() != Eigen::Success) throw SolverError("flow system factorization failed");
  VectorXd x = lu.solve(rhs);
  x += lu.solve(VectorXd(rhs - A * x));  // one step of iterative refinement
  sol.residual = (A * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (sol.residual > 1e-10) throw SolverError("flow solve residual too large: " +
                                              std::to_string(sol.residual));

  sol.wb = x.segment(off[0], sys.WB.nfree);
  sol.hb = x.segment(off[1], sys.HB.nfree);
  sol.qb = x.segment(off[2], sys.QB.nfree);
  sol.hd = x.segment(off[3], sys.HD.nfree);
  sol.qd = x.segment(off[4], sys.QD.nfree);
  sol.lambda = sys.use_multiplier ? x[N - 1] : 0.0;
  return sol;
}

MatX2 flow_velocity(const FlowSystem& sys, const FlowSolution& sol, int ti, const MatX2& X) {
  bool isB = sys.mesh->tris[ti].sub == Sub::B;
  const FeSpace& S = isB ? sys.HB : sys.HD;
  VectorXd co = isB ? S.local_coeffs(ti, sol.hb, VectorXd())
                    : S.local_coeffs(ti, sol.hd, sol.hd_fixed);
  MatX2 out(X.rows(), 2);
  out.col(0) = S.eval(ti, co, X, 0);
  out.col(1) = S.eval(ti, co, X, 1);
  return out;
}

ConservationReport verify_conservation(const FlowSystem& sys, const FlowSolution& sol,
                                       const FlowBC& bc, const ScalarField& f) {
  const StaggeredMesh& m = *sys.mesh;
  int k = sys.k;
  ConservationReport rep;
  QuadratureRule vrule = triangle_rule(2 * k + 2);
  QuadratureRule erule = edge_rule(2 * k + 2);

  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    MappedQuad q = map_to_triangle(vrule, m.tri_pts(ti));
    bool isB = m.tris[ti].sub == Sub::B;
    const FeSpace& S = isB ? sys.HB : sys.HD;
    VectorXd co = isB ? S.local_coeffs(ti, sol.hb, VectorXd())
                      : S.local_coeffs(ti, sol.hd, sol.hd_fixed);
    std::vector<MatrixXd> gx, gy;
    S.shape_grads(ti, q.x, gx, gy);
    VectorXd div = (gx[0] + gy[1]) * co;
    if (isB) {
      rep.div_uB_max = std::max(rep.div_uB_max, div.cwiseAbs().maxCoeff());
    } else {
      // the scheme enforces div u_D = f projected cellwise onto the pressure
      // space with the assembly quadrature, so project with the same rule
      VectorXd fv = VectorXd::Zero(q.x.rows());
      if (f) {
        MatrixXd mono = sys.QD.bases[ti].monomials(q.x, k - 1);
        MatrixXd G = mono.transpose() * q.w.asDiagonal() * mono;
        fv = mono * G.ldlt().solve(mono.transpose() * q.w.cwiseProduct(f(q.x)));
      }
      rep.div_uD_residual = std::max(rep.div_uD_residual, (div - fv).cwiseAbs().maxCoeff());
    }
  }

  for (const Edge& e : m.edges) {
    MappedQuad q = map_to_segment(erule, e.p0, e.p1);
    if (e.cls == EdgeClass::Interface) {
      MatX2 uB = flow_velocity(sys, sol, e.tau1, q.x);
      MatX2 uD = flow_velocity(sys, sol, e.tau2, q.x);
      VectorXd jump = (uB.col(0) - uD.col(0)) * e.n.x() + (uB.col(1) - uD.col(1)) * e.n.y();
      rep.iface_jump_max = std::max(rep.iface_jump_max, jump.cwiseAbs().maxCoeff());
    } else if (e.cls == EdgeClass::PrimalBoundary && e.tag == BTag::GB && bc.g1) {
      MatX2 uB = flow_velocity(sys, sol, e.tau1, q.x);
      VectorXd un = uB.col(0) * e.n.x() + uB.col(1) * e.n.y();
      // compare against the edgewise L2 projection of g1 (the scheme only sees
      // moments of the data up to degree k)
      ScalarField g1e = [&](const MatX2& X) { return bc.g1(e, X); };
      VectorXd cm = project_edge(g1e, e, sys.k);
      VectorXd pg = eval_edge_poly(cm, q.s);
      rep.g1_residual_max = std::max(rep.g1_residual_max, (un - pg).cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

VectorXd local_field(const FeSpace& S, int ti, const VectorXd& xfree, const VectorXd& xfixed) {
  return S.local_coeffs(ti, xfree, xfixed);
}

} // namespace sdg
