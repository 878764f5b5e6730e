#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdg/mesh.hpp"
#include <cstdio>
#include <fstream>

using namespace sdg;

namespace {
const Rect domB{0, 0.5, 0, 1}, domD{0.5, 1, 0, 1};

StaggeredMesh quad44() {
  return subdivide(build_rectangular_primal(domB, domD, 2, 4, CellKind::Quad));
}
} // namespace

TEST_CASE("rectangular quad mesh has the expected counts and area") {
  PrimalMesh pm = build_rectangular_primal(domB, domD, 2, 4, CellKind::Quad);
  pm.validate();
  CHECK(pm.cells.size() == 16);  // 2x4 per subdomain
  StaggeredMesh m = quad44();
  CHECK(m.ncells == 16);
  CHECK(m.tris.size() == 64);  // quads split into 4 subtriangles
  double area = 0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) area += m.tri_area(ti);
  CHECK(std::abs(area - 1.0) < 1e-14);
}

TEST_CASE("triangle meshes subdivide into 3 subtriangles per cell") {
  PrimalMesh pm = build_rectangular_primal(domB, domD, 2, 4, CellKind::Triangle);
  pm.validate();
  StaggeredMesh m = subdivide(pm);
  CHECK(m.ncells == 32);
  CHECK(m.tris.size() == 96);
  double area = 0;
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) area += m.tri_area(ti);
  CHECK(std::abs(area - 1.0) < 1e-14);
}

TEST_CASE("edge orientation: n points out of tau1, interface n out of Brinkman") {
  StaggeredMesh m = quad44();
  int n_if = 0;
  for (const Edge& e : m.edges) {
    CHECK(std::abs(e.n.norm() - 1) < 1e-14);
    CHECK(std::abs(e.n.dot(e.p1 - e.p0)) < 1e-13);  // n orthogonal to the edge
    // t = rotate n by +90 degrees
    CHECK((e.t - Vec2(-e.n.y(), e.n.x())).norm() < 1e-14);
    TriPts p1 = m.tri_pts(e.tau1);
    Vec2 c1 = (p1.row(0) + p1.row(1) + p1.row(2)).transpose() / 3.0;
    CHECK(e.n.dot(e.mid - c1) > 0);  // outward from tau1
    if (!e.is_boundary()) {
      TriPts p2 = m.tri_pts(e.tau2);
      Vec2 c2 = (p2.row(0) + p2.row(1) + p2.row(2)).transpose() / 3.0;
      CHECK(e.n.dot(c2 - c1) > 0);
    }
    if (e.cls == EdgeClass::Interface) {
      ++n_if;
      CHECK(m.tris[e.tau1].sub == Sub::B);
      CHECK(m.tris[e.tau2].sub == Sub::D);
      CHECK(e.n.x() > 0);  // B is to the left of the interface here
    }
    if (e.cls == EdgeClass::PrimalBoundary) CHECK(e.is_boundary());
  }
  CHECK(n_if == 4);
}

TEST_CASE("every subtriangle has one primal and two dual edges") {
  StaggeredMesh m = quad44();
  for (int ti = 0; ti < (int)m.tris.size(); ++ti) {
    int primal = 0, dual = 0;
    for (int ei : m.tri_edges[ti]) {
      const Edge& e = m.edges[ei];
      if (e.cls == EdgeClass::Dual) ++dual;
      else ++primal;
      CHECK((e.tau1 == ti || e.tau2 == ti));
    }
    CHECK(primal == 1);
    CHECK(dual == 2);
  }
}

TEST_CASE("mesh file round trip") {
  std::string path = "roundtrip.mesh";
  {
    PrimalMesh pm = build_rectangular_primal(domB, domD, 2, 2, CellKind::Quad);
    std::ofstream f(path);
    f << "# comment line\n";
    f << "staggered-mesh v1\n";
    f << "vertices " << pm.vertices.size() << "\n";
    for (const Vec2& v : pm.vertices) f << v.x() << " " << v.y() << "\n";
    f << "cells " << pm.cells.size() << "\n";
    for (const auto& c : pm.cells) {
      f << c.v.size();
      for (int vi : c.v) f << " " << vi;
      f << " " << (c.sub == Sub::B ? "B" : "D") << "\n";
    }
    f << "boundary " << pm.boundary.size() << "\n";
    for (const auto& b : pm.boundary) {
      const char* tag = b.tag == BTag::GB ? "GB" : b.tag == BTag::GD ? "GD" : "IF";
      f << b.a << " " << b.b << " " << tag << "\n";
    }
  }
  PrimalMesh in = ingest_primal(path);
  in.validate();
  StaggeredMesh m = subdivide(in);
  CHECK(m.ncells == 8);
  CHECK(m.tris.size() == 32);
  std::remove(path.c_str());
}

TEST_CASE("untagged interface edges are rejected") {
  std::string path = "badiface.mesh";
  {
    // two adjacent cells, one B one D, shared edge not tagged
    std::ofstream f(path);
    f << "staggered-mesh v1\n";
    f << "vertices 6\n0 0\n1 0\n2 0\n0 1\n1 1\n2 1\n";
    f << "cells 2\n4 0 1 4 3 B\n4 1 2 5 4 D\n";
    f << "boundary 6\n0 1 GB\n3 4 GB\n0 3 GB\n1 2 GD\n4 5 GD\n2 5 GD\n";
  }
  CHECK_THROWS_AS(
      [&] {
        PrimalMesh pm = ingest_primal(path);
        pm.validate();
        subdivide(pm);
      }(),
      MeshError);
  std::remove(path.c_str());
}

TEST_CASE("boundary flow classification splits inflow and outflow") {
  StaggeredMesh m = quad44();
  QuadratureRule r = edge_rule(4);
  // uniform rightward flow: inflow on x=0, outflow on x=1
  EdgeScalarField un = [](const Edge& e, const MatX2& X) {
    return VectorXd(VectorXd::Constant(X.rows(), e.n.x()));
  };
  FlowClassification fc = classify_boundary_flow(m, un, r);
  for (size_t i = 0; i < fc.boundary_edges.size(); ++i) {
    const Edge& e = m.edges[fc.boundary_edges[i]];
    for (bool out : fc.outflow[i]) CHECK(out == (e.n.x() >= 0));
  }
}
