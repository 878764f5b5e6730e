#include "sdg/mesh.hpp"
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace sdg {

static double cell_area(const PrimalMesh& pm, const PrimalMesh::Cell& c) {
  double a = 0;
  int n = (int)c.v.size();
  for (int i = 0; i < n; ++i) {
    const Vec2& p = pm.vertices[c.v[i]];
    const Vec2& q = pm.vertices[c.v[(i + 1) % n]];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

void PrimalMesh::validate() const {
  std::map<std::pair<int, int>, std::vector<int>> edge_cells;
  for (int ci = 0; ci < (int)cells.size(); ++ci) {
    const Cell& c = cells[ci];
    if (c.v.size() != 3 && c.v.size() != 4)
      throw MeshError("cell " + std::to_string(ci) + ": must have 3 or 4 vertices");
    for (int vi : c.v)
      if (vi < 0 || vi >= (int)vertices.size())
        throw MeshError("cell " + std::to_string(ci) + ": vertex index out of range");
    double a = cell_area(*this, c);
    if (a <= 1e-14)
      throw MeshError("cell " + std::to_string(ci) + ": degenerate or negatively oriented (area " +
                      std::to_string(a) + ")");
    int n = (int)c.v.size();
    for (int i = 0; i < n; ++i) {
      int p = c.v[i], q = c.v[(i + 1) % n];
      edge_cells[{std::min(p, q), std::max(p, q)}].push_back(ci);
    }
  }
  std::map<std::pair<int, int>, BTag> tags;
  for (const auto& be : boundary) {
    auto key = std::make_pair(std::min(be.a, be.b), std::max(be.a, be.b));
    if (tags.count(key)) throw MeshError("duplicate boundary tag for edge");
    tags[key] = be.tag;
  }
  for (const auto& [key, cs] : edge_cells) {
    if (cs.size() > 2) throw MeshError("edge shared by more than two cells (overlap)");
    bool iface = cs.size() == 2 && cells[cs[0]].sub != cells[cs[1]].sub;
    auto it = tags.find(key);
    if (cs.size() == 1) {
      if (it == tags.end()) throw MeshError("untagged outer boundary edge");
      BTag expect = cells[cs[0]].sub == Sub::B ? BTag::GB : BTag::GD;
      if (it->second != expect) throw MeshError("boundary tag does not match subdomain");
      tags.erase(it);
    } else if (iface) {
      if (it == tags.end()) throw MeshError("untagged interface edge");
      if (it->second != BTag::IF) throw MeshError("interface edge must carry tag IF");
      tags.erase(it);
    } else if (it != tags.end()) {
      throw MeshError("interior edge carries a boundary tag");
    }
  }
  if (!tags.empty()) throw MeshError("boundary tag references a non-boundary edge");
}

PrimalMesh build_rectangular_primal(const Rect& domB, const Rect& domD, int nx, int ny,
                                    CellKind kind) {
  if (nx < 1 || ny < 1) throw ConfigError("build_rectangular_primal: nx, ny must be >= 1");
  // the two rectangles must share exactly one full edge
  bool shareV = (domB.x1 == domD.x0 || domD.x1 == domB.x0) && domB.y0 == domD.y0 &&
                domB.y1 == domD.y1;
  bool shareH = (domB.y1 == domD.y0 || domD.y1 == domB.y0) && domB.x0 == domD.x0 &&
                domB.x1 == domD.x1;
  if (!(shareV || shareH))
    throw ConfigError("build_rectangular_primal: subdomains must share one full edge");

  PrimalMesh pm;
  std::map<std::pair<long long, long long>, int> vid;
  auto V = [&](double x, double y) {
    auto key = std::make_pair((long long)std::llround(x * 1e12), (long long)std::llround(y * 1e12));
    auto it = vid.find(key);
    if (it != vid.end()) return it->second;
    pm.vertices.emplace_back(x, y);
    vid[key] = (int)pm.vertices.size() - 1;
    return (int)pm.vertices.size() - 1;
  };
  for (const auto& [dom, sub] : {std::pair{domB, Sub::B}, std::pair{domD, Sub::D}}) {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        double xa = dom.x0 + (dom.x1 - dom.x0) * i / nx;
        double xb = dom.x0 + (dom.x1 - dom.x0) * (i + 1) / nx;
        double ya = dom.y0 + (dom.y1 - dom.y0) * j / ny;
        double yb = dom.y0 + (dom.y1 - dom.y0) * (j + 1) / ny;
        int v00 = V(xa, ya), v10 = V(xb, ya), v11 = V(xb, yb), v01 = V(xa, yb);
        if (kind == CellKind::Quad) {
          pm.cells.push_back({{v00, v10, v11, v01}, sub});
        } else {
          pm.cells.push_back({{v00, v10, v11}, sub});
          pm.cells.push_back({{v00, v11, v01}, sub});
        }
      }
  }
  // tag boundary + interface edges
  std::map<std::pair<int, int>, std::vector<int>> edge_cells;
  for (int ci = 0; ci < (int)pm.cells.size(); ++ci) {
    int n = (int)pm.cells[ci].v.size();
    for (int i = 0; i < n; ++i) {
      int p = pm.cells[ci].v[i], q = pm.cells[ci].v[(i + 1) % n];
      edge_cells[{std::min(p, q), std::max(p, q)}].push_back(ci);
    }
  }
  for (const auto& [key, cs] : edge_cells) {
    if (cs.size() == 1) {
      BTag tag = pm.cells[cs[0]].sub == Sub::B ? BTag::GB : BTag::GD;
      pm.boundary.push_back({key.first, key.second, tag});
    } else if (pm.cells[cs[0]].sub != pm.cells[cs[1]].sub) {
      pm.boundary.push_back({key.first, key.second, BTag::IF});
    }
  }
  pm.validate();
  return pm;
}

PrimalMesh ingest_primal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path);
  PrimalMesh pm;
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos && line[0] != '#')
        return std::istringstream(line);
    }
    throw MeshError(path + ": unexpected end of file at line " + std::to_string(lineno));
  };
  auto fail = [&](const std::string& msg) {
    throw MeshError(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  {
    auto s = next();
    std::string a, b;
    s >> a >> b;
    if (a != "staggered-mesh" || b != "v1") fail("expected header 'staggered-mesh v1'");
  }
  {
    auto s = next();
    std::string kw;
    long n;
    if (!(s >> kw >> n) || kw != "vertices" || n < 0) fail("expected 'vertices N'");
    for (long i = 0; i < n; ++i) {
      auto vs = next();
      double x, y;
      if (!(vs >> x >> y)) fail("expected 'x y'");
      pm.vertices.emplace_back(x, y);
    }
  }
  {
    auto s = next();
    std::string kw;
    long n;
    if (!(s >> kw >> n) || kw != "cells" || n < 0) fail("expected 'cells M'");
    for (long i = 0; i < n; ++i) {
      auto cs = next();
      int nc;
      if (!(cs >> nc) || (nc != 3 && nc != 4)) fail("cell must start with ncorners 3 or 4");
      PrimalMesh::Cell c;
      for (int j = 0; j < nc; ++j) {
        int vi;
        if (!(cs >> vi)) fail("missing vertex index");
        c.v.push_back(vi);
      }
      std::string sub;
      if (!(cs >> sub) || (sub != "B" && sub != "D")) fail("cell subdomain must be B or D");
      c.sub = sub == "B" ? Sub::B : Sub::D;
      pm.cells.push_back(std::move(c));
    }
  }
  {
    auto s = next();
    std::string kw;
    long n;
    if (!(s >> kw >> n) || kw != "boundary" || n < 0) fail("expected 'boundary K'");
    for (long i = 0; i < n; ++i) {
      auto bs = next();
      int a, b;
      std::string tag;
      if (!(bs >> a >> b >> tag)) fail("expected 'i j tag'");
      BTag t = tag == "GB" ? BTag::GB : tag == "GD" ? BTag::GD : tag == "IF" ? BTag::IF : BTag::None;
      if (t == BTag::None) fail("tag must be GB, GD or IF");
      pm.boundary.push_back({a, b, t});
    }
  }
  pm.validate();
  return pm;
}

StaggeredMesh subdivide(const PrimalMesh& pm) {
  pm.validate();
  StaggeredMesh m;
  m.verts = pm.vertices;
  m.ncells = (int)pm.cells.size();

  double primal_area = 0;
  for (int ci = 0; ci < (int)pm.cells.size(); ++ci) {
    const auto& c = pm.cells[ci];
    primal_area += cell_area(pm, c);
    Vec2 nu = Vec2::Zero();
    for (int vi : c.v) nu += pm.vertices[vi];
    nu /= (double)c.v.size();  // centroid for triangles, center for quads
    m.verts.push_back(nu);
    int vc = (int)m.verts.size() - 1;
    int n = (int)c.v.size();
    for (int i = 0; i < n; ++i)
      m.tris.push_back({{c.v[i], c.v[(i + 1) % n], vc}, ci, c.sub});
  }

  std::map<std::pair<int, int>, BTag> btags;
  for (const auto& be : pm.boundary)
    btags[{std::min(be.a, be.b), std::max(be.a, be.b)}] = be.tag;

  std::map<std::pair<int, int>, std::vector<int>> sides;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    const auto& t = m.tris[ti].v;
    for (auto [p, q] : {std::pair{t[0], t[1]}, std::pair{t[1], t[2]}, std::pair{t[2], t[0]}})
      sides[{std::min(p, q), std::max(p, q)}].push_back(ti);
  }

  auto centroid = [&](int ti) -> Vec2 {
    const auto& t = m.tris[ti].v;
    return (m.verts[t[0]] + m.verts[t[1]] + m.verts[t[2]]) / 3.0;
  };

  m.tri_edges.assign(m.tris.size(), {-1, -1, -1});
  std::vector<int> tri_ecount(m.tris.size(), 0);
  double sub_area = 0;
  m.min_angle = 180.0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    sub_area += m.tri_area(ti);
    TriPts p = m.tri_pts(ti);
    for (int i = 0; i < 3; ++i) {
      Vec2 a = (p.row((i + 1) % 3) - p.row(i)).transpose();
      Vec2 b = (p.row((i + 2) % 3) - p.row(i)).transpose();
      double ang = std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
      m.min_angle = std::min(m.min_angle, ang * 180.0 / M_PI);
    }
    if (m.tris[ti].sub == Sub::B) ++m.ntris_B; else ++m.ntris_D;
  }
  if (std::abs(sub_area - primal_area) > 1e-12 * std::max(1.0, primal_area))
    throw MeshError("subtriangle area does not match primal area");
  if (m.min_angle < 10.0)
    std::cerr << "warning: mesh min angle " << m.min_angle << " deg < 10 deg (quasi-uniformity)\n";

  for (auto& [key, adj] : sides) {
    Edge e;
    e.v = {key.first, key.second};
    e.p0 = m.verts[key.first];
    e.p1 = m.verts[key.second];
    Vec2 d = e.p1 - e.p0;
    e.h = d.norm();
    e.mid = 0.5 * (e.p0 + e.p1);
    e.n = Vec2(d.y(), -d.x()) / e.h;
    if (adj.size() == 1) {
      int t1 = adj[0];
      e.cls = EdgeClass::PrimalBoundary;
      e.sub = m.tris[t1].sub;
      auto it = btags.find(key);
      e.tag = it == btags.end() ? BTag::None : it->second;
      if (e.n.dot(centroid(t1) - e.mid) > 0) e.n = -e.n;
      e.tau1 = t1;
    } else {
      int t1 = adj[0], t2 = adj[1];
      Sub s1 = m.tris[t1].sub, s2 = m.tris[t2].sub;
      if (s1 != s2) {
        e.cls = EdgeClass::Interface;
        e.tag = BTag::IF;
        if (s1 != Sub::B) std::swap(t1, t2);  // tau1 = Brinkman side, n = n_B
        e.sub = Sub::B;
      } else {
        e.cls = m.tris[t1].cell == m.tris[t2].cell ? EdgeClass::Dual : EdgeClass::PrimalInterior;
        e.sub = s1;
        if (t2 < t1) std::swap(t1, t2);  // deterministic orientation: n out of lower id
      }
      if (e.n.dot(centroid(t1) - e.mid) > 0) e.n = -e.n;
      e.tau1 = t1;
      e.tau2 = t2;
    }
    e.t = Vec2(-e.n.y(), e.n.x());
    int ei = (int)m.edges.size();
    m.edges.push_back(e);
    for (int ti : adj) m.tri_edges[ti][tri_ecount[ti]++] = ei;
    if (e.cls != EdgeClass::Dual) m.h = std::max(m.h, e.h);
  }
  for (int ti = 0; ti < (int)m.tris.size(); ++ti)
    if (tri_ecount[ti] != 3) throw MeshError("internal: subtriangle without 3 edges");
  return m;
}

FlowClassification classify_boundary_flow(const StaggeredMesh& m,
                                          const EdgeScalarField& normal_flux,
                                          const QuadratureRule& rule) {
  FlowClassification fc;
  for (int ei = 0; ei < (int)m.edges.size(); ++ei) {
    const Edge& e = m.edges[ei];
    if (e.cls != EdgeClass::PrimalBoundary) continue;
    MappedQuad q = map_to_segment(rule, e.p0, e.p1);
    VectorXd un = normal_flux(e, q.x);
    std::vector<bool> out(un.size());
    for (int i = 0; i < un.size(); ++i) out[i] = un[i] >= 0.0;  // u.n = 0 counts as outflow
    fc.boundary_edges.push_back(ei);
    fc.outflow.push_back(std::move(out));
  }
  return fc;
}

} // namespace sdg
