#include "sdg/transport.hpp"
#include "sdg/assembly.hpp"
#include <cmath>
#include <iostream>

namespace sdg {

namespace {
// velocity-weighted terms carry triple products of degree-k factors; the
// energy identity is only exact when these are integrated exactly
int vol_exactness(int k) { return std::max(2 * k + 2, 3 * k); }
int edge_exactness(int k) { return std::max(2 * k + 2, 3 * k); }
} // namespace

TransportSolver::TransportSolver(const FlowSystem& fsys, const FlowSolution& fsol,
                                 const FlowBC& bc, const TransportParams& prm,
                                 const TransportData& data)
    : fsys_(&fsys), fsol_(&fsol), bc_(bc), prm_(prm), data_(data) {
  const StaggeredMesh& m = *fsys.mesh;
  int k = fsys.k;
  if (prm.dt <= 0) throw ConfigError("transport: dt must be positive");
  double steps = prm.tfinal / prm.dt;
  nsteps_ = (int)std::llround(steps);
  if (nsteps_ < 1 || std::abs(steps - nsteps_) > 0.01 * nsteps_)
    throw ConfigError("transport: tfinal is not an integer multiple of dt");
  Eigen::Matrix2d Kinv = prm.K.inverse();

  UH_ = build_space(SpaceKind::UH, m, k);
  WH_ = build_space(SpaceKind::WH, m, k);
  vrule_ = triangle_rule(vol_exactness(k));
  erule_ = edge_rule(edge_exactness(k));

  BlockBuilder mz(WH_, WH_), tstar(WH_, UH_), th(UH_, WH_), mc(UH_, UH_), conv(UH_, UH_),
      sup(UH_, UH_), bout(UH_, UH_), react(UH_, UH_), jup(UH_, UH_);

  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    MappedQuad q = map_to_triangle(vrule_, m.tri_pts(ti));
    auto Zc = WH_.shape_values(ti, q.x);
    MatrixXd Qc = UH_.shape_values(ti, q.x)[0];
    std::vector<MatrixXd> Qgx, Qgy, Zgx, Zgy;
    UH_.shape_grads(ti, q.x, Qgx, Qgy);
    WH_.shape_grads(ti, q.x, Zgx, Zgy);

    MatrixXd kz = Kinv(0, 0) * wdot(Zc[0], q.w, Zc[0]) + Kinv(0, 1) * wdot(Zc[0], q.w, Zc[1]) +
                  Kinv(1, 0) * wdot(Zc[1], q.w, Zc[0]) + Kinv(1, 1) * wdot(Zc[1], q.w, Zc[1]);
    mz.add(ti, ti, kz);

    // T*(c,psi) volume part (c, div psi)
    MatrixXd divpsi = Zgx[0] + Zgy[1];
    tstar.add(ti, ti, wdot(divpsi, q.w, Qc));
    // T(z,q) volume part -(z, grad q)
    th.add(ti, ti, -(wdot(Qgx[0], q.w, Zc[0]) + wdot(Qgy[0], q.w, Zc[1])));

    mc.add(ti, ti, prm.phi * wdot(Qc, q.w, Qc));

    MatX2 uh = flow_velocity(fsys, fsol, ti, q.x);
    conv.add(ti, ti, -(wdot(Qgx[0], q.w.cwiseProduct(uh.col(0)), Qc) +
                       wdot(Qgy[0], q.w.cwiseProduct(uh.col(1)), Qc)));

    if (m.tris[ti].sub == Sub::D && data.f) {
      VectorXd fv = data.f(q.x);
      VectorXd fm = (-fv).cwiseMax(0.0);
      react.add(ti, ti, wdot(Qc, q.w.cwiseProduct(fm), Qc));
    }
  }

  bool warned = false;
  for (int ei = 0; ei < (int)m.edges.size(); ++ei) {
    const Edge& e = m.edges[ei];
    MappedQuad q = map_to_segment(erule_, e.p0, e.p1);
    int t1 = e.tau1, t2 = e.tau2;
    if (e.cls == EdgeClass::Dual) {
      // T: +(z.n, [q]); z.n single valued (normal moments shared)
      auto Z1 = WH_.shape_values(t1, q.x);
      MatrixXd zn = Z1[0] * e.n.x() + Z1[1] * e.n.y();
      for (auto [tq, sgn] : {std::pair{t1, 1.0}, {t2, -1.0}}) {
        MatrixXd Qv = UH_.shape_values(tq, q.x)[0];
        th.add(tq, t1, sgn * wdot(Qv, q.w, zn));
      }
      // S_h: ({c}[q] u.n) + 1/2([c][q]|u.n|), |u.n| pointwise
      MatX2 uh = flow_velocity(fsys, fsol, t1, q.x);
      VectorXd un = uh.col(0) * e.n.x() + uh.col(1) * e.n.y();
      VectorXd absun = un.cwiseAbs();
      for (auto [tq, sq] : {std::pair{t1, 1.0}, {t2, -1.0}}) {
        MatrixXd Qv = UH_.shape_values(tq, q.x)[0];
        for (auto [tc, sc] : {std::pair{t1, 1.0}, {t2, -1.0}}) {
          MatrixXd Cv = UH_.shape_values(tc, q.x)[0];
          MatrixXd jloc = sq * sc * wdot(Qv, q.w.cwiseProduct(absun), Cv);
          sup.add(tq, tc, 0.5 * sq * wdot(Qv, q.w.cwiseProduct(un), Cv) + 0.5 * jloc);
          jup.add(tq, tc, jloc);
        }
      }
    } else {
      // primal edges (interface and boundary included): -T* gets +(c,[psi].n);
      // c single valued (trace moments shared)
      MatrixXd Q1 = UH_.shape_values(t1, q.x)[0];
      std::vector<std::pair<int, double>> sides{{t1, 1.0}};
      if (t2 >= 0) sides.push_back({t2, -1.0});
      for (auto [tp, sgn] : sides) {
        auto Zc = WH_.shape_values(tp, q.x);
        MatrixXd psin = Zc[0] * e.n.x() + Zc[1] * e.n.y();
        tstar.add(tp, t1, -sgn * wdot(psin, q.w, Q1));
      }
      if (e.cls == EdgeClass::PrimalBoundary) {
        BEdge be;
        be.ei = ei;
        be.t1 = t1;
        be.q = q;
        MatX2 uh = flow_velocity(fsys, fsol, t1, q.x);
        be.unh = uh.col(0) * e.n.x() + uh.col(1) * e.n.y();
        be.corrected = true;
        if (e.tag == BTag::GB && bc.g1) {
          be.g = bc.g1(e, q.x);
        } else if (e.tag == BTag::GD && (!bc.pressure_edge || !bc.pressure_edge(e)) && bc.g2) {
          be.g = bc.g2(e, q.x);
        } else {
          // no prescribed normal data: classify by u_h.n, drop the correction
          be.g = be.unh;
          be.corrected = false;
          if (!warned) {
            std::cerr << "transport: boundary segment without normal data, "
                         "correction terms disabled there\n";
            warned = true;
          }
        }
        // (u_h.n c, q)_out + 1/2((g-u_h.n)c, q)_out - 1/2((g-u_h.n)c, q)_in
        VectorXd w(q.x.rows());
        for (int i = 0; i < w.size(); ++i) {
          double corr = be.corrected ? 0.5 * (be.g[i] - be.unh[i]) : 0.0;
          w[i] = be.g[i] >= 0 ? be.unh[i] + corr : -corr;
        }
        MatrixXd Qv = UH_.shape_values(t1, q.x)[0];
        bout.add(t1, t1, wdot(Qv, q.w.cwiseProduct(w), Qv));
        bedges_.push_back(std::move(be));
      }
    }
  }

  Mz = mz.build();
  Tstar = tstar.build();
  Th = th.build();
  Mc = mc.build();
  Conv = conv.build();
  Sup = sup.build();
  Bout = bout.build();
  React = react.build();
  Jup = jup.build();

  // compose [WH; UH] system
  int nW = WH_.nfree, nU = UH_.nfree;
  std::vector<Eigen::Triplet<double>> T;
  auto put = [&](const SpMat& B, int ro, int co, double sgn) {
    for (int o = 0; o < B.outerSize(); ++o)
      for (SpMat::InnerIterator it(B, o); it; ++it)
        T.emplace_back(ro + (int)it.row(), co + (int)it.col(), sgn * it.value());
  };
  put(Mz, 0, 0, 1.0);
  put(Tstar, 0, nW, -1.0);
  put(Th, nW, 0, 1.0);
  put(Mc, nW, nW, 1.0 / prm.dt);
  put(Conv, nW, nW, 1.0);
  put(Sup, nW, nW, 1.0);
  put(Bout, nW, nW, 1.0);
  put(React, nW, nW, 1.0);
  SpMat A(nW + nU, nW + nU);
  A.setFromTriplets(T.begin(), T.end());
  A.makeCompressed();
  lu_.compute(A);
  if (lu_.info() != Eigen::Success) throw SolverError("transport system factorization failed");

  // initial condition: global L2 projection of c0 onto UH
  c_ = VectorXd::Zero(nU);
  z_ = VectorXd::Zero(nW);
  if (data.c0) {
    BlockBuilder m0(UH_, UH_);
    VectorXd r0 = VectorXd::Zero(nU);
    for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
      MappedQuad q = map_to_triangle(vrule_, m.tri_pts(ti));
      MatrixXd Qc = UH_.shape_values(ti, q.x)[0];
      m0.add(ti, ti, wdot(Qc, q.w, Qc));
      scatter_rhs(r0, UH_, ti, VectorXd(Qc.transpose() * q.w.cwiseProduct(data.c0(q.x))));
    }
    SpMat M0 = m0.build();
    Eigen::SparseLU<SpMat> mlu(M0);
    if (mlu.info() != Eigen::Success) throw SolverError("initial-condition mass solve failed");
    c_ = mlu.solve(r0);
  }
  cprev_ = c_;
  c0norm2_ = c_.dot(Mc * c_);
  ones_u_ = dof_values(UH_, [](const MatX2& X) { return MatrixXd(MatrixXd::Ones(X.rows(), 1)); });
}

VectorXd TransportSolver::step_rhs(double tnew) const {
  const StaggeredMesh& m = *fsys_->mesh;
  int nW = WH_.nfree, nU = UH_.nfree;
  VectorXd rhs = VectorXd::Zero(nW + nU);
  rhs.segment(nW, nU) = Mc * c_ / prm_.dt;
  VectorXd ru = VectorXd::Zero(nU);
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    MappedQuad q = map_to_triangle(vrule_, m.tri_pts(ti));
    MatrixXd Qc = UH_.shape_values(ti, q.x)[0];
    VectorXd load = VectorXd::Zero(q.x.rows());
    if (data_.s) load += prm_.phi * data_.s(q.x, tnew);
    if (data_.f && m.tris[ti].sub == Sub::D) {
      VectorXd fp = data_.f(q.x).cwiseMax(0.0);
      if (data_.c_hat) load += fp.cwiseProduct(data_.c_hat(q.x, tnew));
    }
    if (load.any()) scatter_rhs(ru, UH_, ti, VectorXd(Qc.transpose() * q.w.cwiseProduct(load)));
  }
  for (const BEdge& be : bedges_) {
    if (!data_.c_in) break;
    // -(c_in g, q) on the inflow part (g < 0 there)
    VectorXd gm = be.g.cwiseMin(0.0);
    if (gm.isZero(0.0)) continue;
    VectorXd cin = data_.c_in(be.q.x, tnew);
    MatrixXd Qv = UH_.shape_values(be.t1, be.q.x)[0];
    scatter_rhs(ru, UH_, be.t1,
                VectorXd(-Qv.transpose() * be.q.w.cwiseProduct(gm).cwiseProduct(cin)));
  }
  rhs.segment(nW, nU) += ru;
  return rhs;
}

void TransportSolver::step() {
  double tnew = (stepno_ + 1) * prm_.dt;
  VectorXd rhs = step_rhs(tnew);
  VectorXd x = lu_.solve(rhs);
  if (!x.allFinite())
    throw SolverError("transport solve produced non-finite values at step " +
                      std::to_string(stepno_ + 1));
  cprev_ = c_;
  z_ = x.head(WH_.nfree);
  c_ = x.tail(UH_.nfree);
  ++stepno_;
  bookkeeping(tnew);
}

void TransportSolver::run(const std::function<void(int, double)>& on_step) {
  while (stepno_ < nsteps_) {
    step();
    if (on_step) on_step(stepno_, time());
  }
}

VectorXd TransportSolver::eval_c(int ti, const MatX2& X) const {
  return UH_.eval(ti, UH_.local_coeffs(ti, c_, VectorXd()), X, 0);
}

MatX2 TransportSolver::eval_z(int ti, const MatX2& X) const {
  VectorXd co = WH_.local_coeffs(ti, z_, VectorXd());
  MatX2 out(X.rows(), 2);
  out.col(0) = WH_.eval(ti, co, X, 0);
  out.col(1) = WH_.eval(ti, co, X, 1);
  return out;
}

// mass ledger and discrete energy identity, evaluated with the assembly
// quadrature so both close to roundoff
void TransportSolver::bookkeeping(double tnew) {
  const StaggeredMesh& m = *fsys_->mesh;
  StepRecord r;
  r.step = stepno_;
  r.t = tnew;
  r.cnorm = std::sqrt(c_.dot(Mc * c_));
  r.znorm = std::sqrt(z_.dot(Mz * z_));

  // volume terms
  double mass_new = 0, mass_old = 0, src = 0, src_c = 0, divu_c2 = 0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    MappedQuad q = map_to_triangle(vrule_, m.tri_pts(ti));
    VectorXd cv = eval_c(ti, q.x);
    VectorXd cpv = UH_.eval(ti, UH_.local_coeffs(ti, cprev_, VectorXd()), q.x, 0);
    mass_new += prm_.phi * q.w.dot(cv);
    mass_old += prm_.phi * q.w.dot(cpv);
    VectorXd load = VectorXd::Zero(q.x.rows());
    if (data_.s) load += prm_.phi * data_.s(q.x, tnew);
    if (data_.f && data_.c_hat && m.tris[ti].sub == Sub::D)
      load += data_.f(q.x).cwiseMax(0.0).cwiseProduct(data_.c_hat(q.x, tnew));
    src += q.w.dot(load);
    src_c += q.w.dot(load.cwiseProduct(cv));
    // 1/2 (c^2, div u_h) for the energy identity
    bool isB = m.tris[ti].sub == Sub::B;
    const FeSpace& S = isB ? fsys_->HB : fsys_->HD;
    VectorXd co = isB ? S.local_coeffs(ti, fsol_->hb, VectorXd())
                      : S.local_coeffs(ti, fsol_->hd, fsol_->hd_fixed);
    std::vector<MatrixXd> gx, gy;
    S.shape_grads(ti, q.x, gx, gy);
    VectorXd divu = (gx[0] + gy[1]) * co;
    divu_c2 += 0.5 * q.w.dot(divu.cwiseProduct(cv.cwiseAbs2()));
  }

  // boundary terms
  double bflux = 0, influx = 0, outflux = 0, babs_c2 = 0, bin_c = 0;
  for (const BEdge& be : bedges_) {
    VectorXd cv = eval_c(be.t1, be.q.x);
    VectorXd cin = data_.c_in ? data_.c_in(be.q.x, tnew) : VectorXd(VectorXd::Zero(cv.size()));
    for (int i = 0; i < cv.size(); ++i) {
      double wq = be.q.w[i], g = be.g[i], un = be.unh[i], cq = cv[i];
      double corr = be.corrected ? 0.5 * (g - un) : 0.0;
      double term = g >= 0 ? (un + corr) * cq : -corr * cq;
      bflux += wq * term;
      if (g >= 0) {
        outflux += wq * term;
      } else {
        influx += -wq * g * cin[i];
        bin_c += -wq * g * cin[i] * cq;
      }
      babs_c2 += 0.5 * wq * std::abs(g) * cq * cq;
    }
  }
  r.influx = influx;
  r.outflux = outflux;

  // mass ledger (q = 1 in the discrete equation):
  // d(mass)/dt + (f^- c,1) + boundary flux = sources + inflow
  double react_c1 = 0;
  if (React.nonZeros()) {
    // (f^- c, 1): contract the reaction block with the constant function
    react_c1 = ones_u_.dot(React * c_);
  }
  double resid = (mass_new - mass_old) / prm_.dt + react_c1 + bflux - src - influx;
  double mscale = std::abs(mass_new) + std::abs(mass_old) +
                  prm_.dt * (std::abs(bflux) + std::abs(src) + influx + std::abs(react_c1));
  r.ledger = std::abs(resid) * prm_.dt / std::max(mscale, 1e-300);

  // energy identity tested with (z^{n+1}, c^{n+1})
  double phin = c_.dot(Mc * c_), phio = cprev_.dot(Mc * cprev_);
  VectorXd dc = c_ - cprev_;
  double zz = z_.dot(Mz * z_);
  double jmp = 0.5 * c_.dot(Jup * c_);
  double rc = c_.dot(React * c_);
  double lhs = zz + (phin - phio + dc.dot(Mc * dc)) / (2 * prm_.dt) + divu_c2 + jmp + rc + babs_c2;
  double rhsid = src_c + bin_c;
  double escale = zz + (phin + phio + dc.dot(Mc * dc)) / (2 * prm_.dt) + std::abs(divu_c2) +
                  jmp + rc + babs_c2 + std::abs(rhsid) + 1e-300;
  r.energy = std::abs(lhs - rhsid) / escale;
  records_.push_back(r);
}

StabilityReport TransportSolver::stability() const {
  StabilityReport rep;
  const StaggeredMesh& m = *fsys_->mesh;
  double zsum = 0, ssum = 0, insum = 0, chat = 0;
  for (const StepRecord& r : records_) {
    zsum += r.znorm * r.znorm;
    for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
      MappedQuad q = map_to_triangle(vrule_, m.tri_pts(ti));
      if (data_.s) {
        VectorXd sv = data_.s(q.x, r.t);
        ssum += prm_.phi * q.w.dot(sv.cwiseAbs2());
      }
      if (data_.f && data_.c_hat && m.tris[ti].sub == Sub::D) {
        VectorXd fp = data_.f(q.x).cwiseMax(0.0);
        VectorXd cv = data_.c_hat(q.x, r.t);
        chat += q.w.dot(fp.cwiseProduct(cv.cwiseAbs2()));
      }
    }
    if (data_.c_in)
      for (const BEdge& be : bedges_) {
        VectorXd cin = data_.c_in(be.q.x, r.t);
        for (int i = 0; i < cin.size(); ++i)
          if (be.g[i] < 0) insum += be.q.w[i] * std::abs(be.g[i]) * cin[i] * cin[i];
      }
  }
  double cN2 = records_.empty() ? c0norm2_ : records_.back().cnorm * records_.back().cnorm;
  rep.lhs = 2 * prm_.dt * zsum + cN2;
  rep.rhs = prm_.dt * (ssum + insum + chat) + c0norm2_;
  rep.ratio = rep.lhs / std::max(rep.rhs, 1e-300);
  return rep;
}

double TransportSolver::max_energy_residual() const {
  double v = 0;
  for (const auto& r : records_) v = std::max(v, r.energy);
  return v;
}

double TransportSolver::max_ledger_residual() const {
  double v = 0;
  for (const auto& r : records_) v = std::max(v, r.ledger);
  return v;
}

} // namespace sdg
