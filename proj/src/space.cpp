#include "sdg/space.hpp"
#include <Eigen/LU>
#include <map>
#include <tuple>

namespace sdg {

namespace {

struct LocalFunctional {
  int type;             // 0 edge moment, 1 interior moment
  int ent, m, family;   // identity; family disambiguates co-located moment sets
  int fixed;            // 0 free, 1 constrained to zero, 2 lifted from data
  MatX2 X;
  MatrixXd W;           // (ncomp, nq); value(F) = sum_c sum_q W(c,q) F(X_q)_c
};

LocalFunctional edge_moment(const Edge& e, int m, int family,
                            const std::vector<std::pair<int, double>>& cw, int ncomp,
                            const QuadratureRule& rule, int fixed) {
  LocalFunctional f;
  f.type = 0;
  f.m = m;
  f.family = family;
  f.fixed = fixed;
  MappedQuad q = map_to_segment(rule, e.p0, e.p1);
  f.X = q.x;
  VectorXd leg = legendre(m, q.s);
  f.W = MatrixXd::Zero(ncomp, q.x.rows());
  for (auto [c, w] : cw) f.W.row(c) += (w / e.h) * q.w.cwiseProduct(leg).transpose();
  return f;
}

LocalFunctional interior_moment(int m, int family, int ncomp, const MappedQuad& q,
                                const std::vector<std::pair<int, VectorXd>>& cw, double area) {
  LocalFunctional f;
  f.type = 1;
  f.m = m;
  f.family = family;
  f.fixed = 0;
  f.X = q.x;
  f.W = MatrixXd::Zero(ncomp, q.x.rows());
  for (const auto& [c, w] : cw) f.W.row(c) += (q.w.cwiseProduct(w) / area).transpose();
  return f;
}

// The complete DOF set of one active subtriangle, in patch order.
std::vector<LocalFunctional> local_functionals(const FeSpace& S, int ti) {
  const StaggeredMesh& m = *S.mesh;
  int k = S.k;
  int nc = S.ncomp();
  const ScalarBasis& bas = S.bases[ti];
  TriPts pts = m.tri_pts(ti);
  double area = triangle_area(pts);
  QuadratureRule erule = edge_rule(2 * k + 4);
  MappedQuad vq = map_to_triangle(triangle_rule(2 * k + 4), pts);
  std::vector<LocalFunctional> out;

  auto edge_moments = [&](const Edge& e, int ei, int family,
                          const std::vector<std::pair<int, double>>& cw, int fixed) {
    for (int mm = 0; mm <= k; ++mm) {
      auto f = edge_moment(e, mm, family, cw, nc, erule, fixed);
      f.ent = ei;
      out.push_back(std::move(f));
    }
  };
  auto scalar_interior = [&](int comp, int maxdeg) {
    MatrixXd mono = bas.monomials(vq.x, maxdeg);
    for (int j = 0; j < mono.cols(); ++j) {
      auto f = interior_moment(comp * (int)mono.cols() + j, 0, nc, vq, {{comp, mono.col(j)}}, area);
      f.ent = ti;
      out.push_back(std::move(f));
    }
  };

  switch (S.kind) {
    case SpaceKind::QB:
    case SpaceKind::UH: {
      for (int ei : m.tri_edges[ti]) {
        const Edge& e = m.edges[ei];
        bool primal = e.cls == EdgeClass::PrimalInterior || e.cls == EdgeClass::PrimalBoundary ||
                      e.cls == EdgeClass::Interface;
        if (!primal) continue;
        edge_moments(e, ei, 0, {{0, 1.0}}, 0);
      }
      scalar_interior(0, k - 1);
      break;
    }
    case SpaceKind::HB:
    case SpaceKind::WH: {
      for (int ei : m.tri_edges[ti]) {
        const Edge& e = m.edges[ei];
        if (e.cls != EdgeClass::Dual) continue;
        edge_moments(e, ei, 0, {{0, e.n.x()}, {1, e.n.y()}}, 0);
      }
      MatrixXd mono = bas.monomials(vq.x, k - 1);
      for (int comp = 0; comp < 2; ++comp)
        for (int j = 0; j < mono.cols(); ++j) {
          auto f = interior_moment(comp * (int)mono.cols() + j, 0, nc, vq,
                                   {{comp, mono.col(j)}}, area);
          f.ent = ti;
          out.push_back(std::move(f));
        }
      break;
    }
    case SpaceKind::HD: {
      for (int ei : m.tri_edges[ti]) {
        const Edge& e = m.edges[ei];
        bool lift = e.cls == EdgeClass::PrimalBoundary && e.tag == BTag::GD &&
                    (!S.opts.hd_flux_edge || S.opts.hd_flux_edge(e));
        edge_moments(e, ei, 0, {{0, e.n.x()}, {1, e.n.y()}}, lift ? 2 : 0);
      }
      // interior: grad P^{k-1} without the constant, then curl B^{k+1}
      MatrixXd gx, gy;
      bas.monomial_grads(vq.x, k - 1, gx, gy);
      double hs = bas.scale();
      int j = 0;
      for (int c = 1; c < gx.cols(); ++c) {
        auto f = interior_moment(j++, 0, nc, vq,
                                 {{0, VectorXd(hs * gx.col(c))}, {1, VectorXd(hs * gy.col(c))}},
                                 area);
        f.ent = ti;
        out.push_back(std::move(f));
      }
      if (k >= 2) {
        BubbleSpace bub(pts, k);
        MatrixXd cx, cy;
        bub.curl(vq.x, cx, cy);
        for (int c = 0; c < bub.size(); ++c) {
          auto f = interior_moment(j++, 0, nc, vq,
                                   {{0, VectorXd(hs * cx.col(c))}, {1, VectorXd(hs * cy.col(c))}},
                                   area);
          f.ent = ti;
          out.push_back(std::move(f));
        }
      }
      break;
    }
    case SpaceKind::QD: {
      scalar_interior(0, k - 1);
      break;
    }
    case SpaceKind::WB: {
      for (int ei : m.tri_edges[ti]) {
        const Edge& e = m.edges[ei];
        if (e.cls == EdgeClass::Dual) {
          // tangential moments of Gn
          edge_moments(e, ei, 2,
                       {{0, e.n.x() * e.t.x()}, {1, e.n.y() * e.t.x()},
                        {2, e.n.x() * e.t.y()}, {3, e.n.y() * e.t.y()}},
                       0);
        } else {
          bool onb = e.cls == EdgeClass::Interface ||
                     (e.cls == EdgeClass::PrimalBoundary && e.tag == BTag::GB && !S.opts.relax_GB);
          edge_moments(e, ei, 0, {{0, e.n.x()}, {1, e.n.y()}}, onb ? 1 : 0);
          edge_moments(e, ei, 1, {{2, e.n.x()}, {3, e.n.y()}}, onb ? 1 : 0);
        }
      }
      MatrixXd mono = bas.monomials(vq.x, k - 1);
      int j = 0;
      for (int comp = 0; comp < 4; ++comp)
        for (int c = 0; c < mono.cols(); ++c) {
          auto f = interior_moment(j++, 0, nc, vq, {{comp, mono.col(c)}}, area);
          f.ent = ti;
          out.push_back(std::move(f));
        }
      break;
    }
  }
  return out;
}

using Key = std::tuple<int, int, int, int>;

} // namespace

FeSpace build_space(SpaceKind kind, const StaggeredMesh& mesh, int k, const SpaceOptions& opts) {
  if (k < 1) throw ConfigError("build_space: k must be >= 1");
  FeSpace S;
  S.kind = kind;
  S.k = k;
  S.mesh = &mesh;
  S.opts = opts;
  S.patches.resize(mesh.tris.size());
  S.bases.resize(mesh.tris.size());

  std::map<Key, int> free_ids, fixed_ids;
  for (int ti = 0; ti < (int)mesh.tris.size(); ++ti) {
    if (!S.active(ti)) continue;
    S.bases[ti] = ScalarBasis(mesh.tri_pts(ti), S.basis_degree());
    auto fns = local_functionals(S, ti);
    int n = S.nloc();
    if ((int)fns.size() != n)
      throw SolverError("space dof count mismatch on subtriangle " + std::to_string(ti));
    MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      auto vals = S.shape_values(ti, fns[i].X);
      VectorXd row = VectorXd::Zero(n);
      for (int c = 0; c < S.ncomp(); ++c) row += vals[c].transpose() * fns[i].W.row(c).transpose();
      A.row(i) = row.transpose();
    }
    Eigen::FullPivLU<MatrixXd> lu(A);
    if (!lu.isInvertible())
      throw SolverError("space unisolvence failure on subtriangle " + std::to_string(ti));
    FeSpace::Patch& p = S.patches[ti];
    p.C = lu.inverse();
    S.max_local_cond = std::max(S.max_local_cond, A.norm() * p.C.norm());
    p.dofs.resize(n);
    for (int i = 0; i < n; ++i) {
      const auto& f = fns[i];
      Key key{f.type, f.ent, f.m, f.family};
      if (f.fixed) {
        auto [it, fresh] = fixed_ids.try_emplace(key, (int)fixed_ids.size());
        if (fresh) S.fixed_info.push_back({f.ent, f.m, f.family, f.fixed == 2});
        p.dofs[i] = {it->second, true};
      } else {
        auto [it, fresh] = free_ids.try_emplace(key, (int)free_ids.size());
        p.dofs[i] = {it->second, false};
      }
    }
  }
  S.nfree = (int)free_ids.size();
  S.nfixed = (int)fixed_ids.size();
  for (auto& p : S.patches)
    for (auto& d : p.dofs)
      if (d.fixed) d.gid += S.nfree;
  return S;
}

VectorXd FeSpace::local_coeffs(int ti, const VectorXd& xfree, const VectorXd& xfixed) const {
  const Patch& p = patches[ti];
  VectorXd v(p.dofs.size());
  for (size_t i = 0; i < p.dofs.size(); ++i) {
    const Dof& d = p.dofs[i];
    v[i] = d.fixed ? (xfixed.size() ? xfixed[d.gid - nfree] : 0.0) : xfree[d.gid];
  }
  return p.C * v;
}

std::vector<MatrixXd> FeSpace::shape_values(int ti, const MatX2& X) const {
  MatrixXd phi = bases[ti].eval(X);
  int nb = phi.cols(), nc = ncomp();
  std::vector<MatrixXd> out(nc, MatrixXd::Zero(X.rows(), nc * nb));
  for (int c = 0; c < nc; ++c) out[c].middleCols(c * nb, nb) = phi;
  return out;
}

void FeSpace::shape_grads(int ti, const MatX2& X, std::vector<MatrixXd>& gx,
                          std::vector<MatrixXd>& gy) const {
  MatrixXd px, py;
  bases[ti].grad(X, px, py);
  int nb = px.cols(), nc = ncomp();
  gx.assign(nc, MatrixXd::Zero(X.rows(), nc * nb));
  gy.assign(nc, MatrixXd::Zero(X.rows(), nc * nb));
  for (int c = 0; c < nc; ++c) {
    gx[c].middleCols(c * nb, nb) = px;
    gy[c].middleCols(c * nb, nb) = py;
  }
}

VectorXd FeSpace::eval(int ti, const VectorXd& coeffs, const MatX2& X, int comp) const {
  MatrixXd phi = bases[ti].eval(X);
  int nb = phi.cols();
  return phi * coeffs.segment(comp * nb, nb);
}

VectorXd dof_values(const FeSpace& S, const MultiField& F) {
  VectorXd out = VectorXd::Zero(S.ntot());
  std::vector<bool> done(S.ntot(), false);
  for (int ti = 0; ti < (int)S.mesh->tris.size(); ++ti) {
    if (!S.active(ti)) continue;
    auto fns = local_functionals(S, ti);
    const auto& dofs = S.patches[ti].dofs;
    for (size_t i = 0; i < fns.size(); ++i) {
      int gid = dofs[i].gid;
      if (done[gid]) continue;
      MatrixXd vals = F(fns[i].X);  // (nq, ncomp)
      out[gid] = (fns[i].W.transpose().cwiseProduct(vals)).sum();
      done[gid] = true;
    }
  }
  return out;
}

VectorXd lifted_values(const FeSpace& S, const EdgeScalarField& g) {
  VectorXd out = VectorXd::Zero(S.nfixed);
  QuadratureRule erule = edge_rule(2 * S.k + 4);
  for (int i = 0; i < S.nfixed; ++i) {
    const auto& fi = S.fixed_info[i];
    if (!fi.lifted) continue;
    const Edge& e = S.mesh->edges[fi.edge];
    MappedQuad q = map_to_segment(erule, e.p0, e.p1);
    VectorXd gv = g(e, q.x);
    // matches the HD edge functional (1/h) int (v.n) P_m with v.n = g
    out[i] = (q.w.cwiseProduct(legendre(fi.m, q.s)).cwiseProduct(gv)).sum() / e.h;
  }
  return out;
}

VectorXd project_edge(const ScalarField& g, const Edge& e, int k) {
  MappedQuad q = map_to_segment(edge_rule(2 * k + 10), e.p0, e.p1);
  VectorXd gv = g(q.x);
  VectorXd c(k + 1);
  for (int m = 0; m <= k; ++m)
    c[m] = (2 * m + 1) * (q.w.cwiseProduct(legendre(m, q.s)).cwiseProduct(gv)).sum() / e.h;
  return c;
}

VectorXd eval_edge_poly(const VectorXd& c, const VectorXd& s) {
  VectorXd out = VectorXd::Zero(s.size());
  for (int m = 0; m < c.size(); ++m) out += c[m] * legendre(m, s);
  return out;
}

} // namespace sdg
