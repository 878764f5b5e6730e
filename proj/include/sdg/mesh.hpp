#pragma once
#include "sdg/common.hpp"
#include "sdg/quadrature.hpp"
#include <array>
#include <string>
#include <vector>

namespace sdg {

enum class Sub : int { B = 0, D = 1 };
enum class EdgeClass : int { PrimalInterior, PrimalBoundary, Dual, Interface };
enum class BTag : int { None, GB, GD, IF };

struct Rect {
  double x0, x1, y0, y1;
};

enum class CellKind { Triangle, Quad };

struct PrimalMesh {
  std::vector<Vec2> vertices;
  struct Cell {
    std::vector<int> v;  // 3 or 4 vertex ids, ccw
    Sub sub;
  };
  std::vector<Cell> cells;
  struct BoundaryEdge {
    int a, b;
    BTag tag;
  };
  std::vector<BoundaryEdge> boundary;

  void validate() const;  // throws MeshError on invariant violations
};

struct Edge {
  std::array<int, 2> v;  // sorted vertex ids
  EdgeClass cls;
  Sub sub;               // owning subdomain; Interface edges report B
  BTag tag = BTag::None;
  Vec2 p0, p1, n, t, mid;
  double h = 0;
  // n points out of tau1. tau1 is the lower subtriangle id, except on the
  // interface where tau1 is the Brinkman side and n = n_B.
  int tau1 = -1, tau2 = -1;
  bool is_boundary() const { return tau2 < 0; }
};

struct StaggeredMesh {
  std::vector<Vec2> verts;
  struct SubTri {
    std::array<int, 3> v;
    int cell;
    Sub sub;
  };
  std::vector<SubTri> tris;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> tri_edges;
  int ncells = 0;
  double h = 0;            // global meshsize
  double min_angle = 0;    // degrees, over all subtriangles
  int ntris_B = 0, ntris_D = 0;

  TriPts tri_pts(int ti) const {
    TriPts p;
    for (int i = 0; i < 3; ++i) p.row(i) = verts[tris[ti].v[i]].transpose();
    return p;
  }
  double tri_area(int ti) const { return triangle_area(tri_pts(ti)); }
};

PrimalMesh build_rectangular_primal(const Rect& domB, const Rect& domD, int nx, int ny,
                                    CellKind kind);
PrimalMesh ingest_primal(const std::string& path);
StaggeredMesh subdivide(const PrimalMesh& pm);

// Per-quadrature-point inflow/outflow tags for all boundary edges.
// outflow[edge index within mesh.edges][q] is true when u.n >= 0.
struct FlowClassification {
  std::vector<int> boundary_edges;
  std::vector<std::vector<bool>> outflow;
};
using EdgeScalarField = std::function<VectorXd(const Edge&, const MatX2&)>;
FlowClassification classify_boundary_flow(const StaggeredMesh& m,
                                          const EdgeScalarField& normal_flux,
                                          const QuadratureRule& rule);

} // namespace sdg
