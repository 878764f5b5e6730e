#pragma once
#include "sdg/common.hpp"

namespace sdg {

// Reference rules: triangle (0,0)-(1,0)-(0,1), edge [-1,1].
struct QuadratureRule {
  MatX2 pts;     // edge rules store the 1d coordinate in column 0
  VectorXd w;
  int exactness = 0;
};

QuadratureRule triangle_rule(int exactness);
QuadratureRule edge_rule(int exactness);

// Gauss-Legendre nodes/weights on [-1,1], n points (exact through degree 2n-1).
void gauss_legendre(int n, VectorXd& x, VectorXd& w);

// Legendre polynomial P_m at points s in [-1,1].
VectorXd legendre(int m, const VectorXd& s);

struct MappedQuad {
  MatX2 x;       // physical points
  VectorXd w;    // physical weights
  VectorXd s;    // edge rules only: reference coordinate
};

MappedQuad map_to_triangle(const QuadratureRule& r, const TriPts& pts);
MappedQuad map_to_segment(const QuadratureRule& r, const Vec2& p0, const Vec2& p1);

inline double triangle_area(const TriPts& p) {
  return 0.5 * std::abs((p(1, 0) - p(0, 0)) * (p(2, 1) - p(0, 1)) -
                        (p(2, 0) - p(0, 0)) * (p(1, 1) - p(0, 1)));
}

} // namespace sdg
