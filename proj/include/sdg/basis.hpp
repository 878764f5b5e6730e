#pragma once
#include "sdg/common.hpp"
#include "sdg/quadrature.hpp"
#include <vector>

namespace sdg {

inline int poly_dim(int k) { return (k + 1) * (k + 2) / 2; }

// Scaled-monomial basis on one physical triangle, L2-orthonormalized over the
// triangle via Cholesky. The orthonormalizing transform is lower triangular,
// so the first poly_dim(k-1) functions span P^{k-1}.
class ScalarBasis {
public:
  ScalarBasis() = default;
  ScalarBasis(const TriPts& pts, int degree);

  int degree() const { return k_; }
  int size() const { return n_; }
  const Vec2& center() const { return c_; }
  double scale() const { return h_; }

  MatrixXd eval(const MatX2& X) const;                       // (npts, n)
  void grad(const MatX2& X, MatrixXd& gx, MatrixXd& gy) const;

  // raw scaled monomials ((x-c)/h)^a ((y-c)/h)^b, graded order
  MatrixXd monomials(const MatX2& X, int maxdeg) const;
  void monomial_grads(const MatX2& X, int maxdeg, MatrixXd& gx, MatrixXd& gy) const;

private:
  int k_ = 0, n_ = 0;
  Vec2 c_ = Vec2::Zero();
  double h_ = 1.0;
  MatrixXd T_;  // ortho = mono * T_^T, lower triangular T_
};

// exponent list (a,b) with a+b <= k, graded
std::vector<std::pair<int, int>> monomial_exponents(int k);

// Bubble space B^{k+1}(tau) = lambda1*lambda2*lambda3 * P^{k-2}(tau).
// Members and their curls, evaluated at physical points.
class BubbleSpace {
public:
  BubbleSpace(const TriPts& pts, int k);  // k >= 2 gives poly_dim(k-2) members
  int size() const { return nb_; }
  MatrixXd eval(const MatX2& X) const;                          // (npts, nb)
  // curl b = (db/dy, -db/dx)
  void curl(const MatX2& X, MatrixXd& cx, MatrixXd& cy) const;

private:
  TriPts pts_;
  int k_, nb_;
  Vec2 c_;
  double h_;
  Eigen::Matrix<double, 3, 2> gl_;  // constant barycentric gradients
  Eigen::Matrix<double, 3, 3> bc_;  // barycentric coordinate transform rows
  void bary(const MatX2& X, MatrixXd& lam) const;
};

} // namespace sdg
