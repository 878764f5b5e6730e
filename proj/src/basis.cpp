#include "sdg/basis.hpp"
#include <Eigen/Cholesky>

namespace sdg {

std::vector<std::pair<int, int>> monomial_exponents(int k) {
  std::vector<std::pair<int, int>> e;
  for (int d = 0; d <= k; ++d)
    for (int a = d; a >= 0; --a) e.emplace_back(a, d - a);
  return e;
}

ScalarBasis::ScalarBasis(const TriPts& pts, int degree) : k_(degree) {
  n_ = poly_dim(k_);
  c_ = (pts.row(0) + pts.row(1) + pts.row(2)).transpose() / 3.0;
  h_ = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) h_ = std::max(h_, (pts.row(i) - pts.row(j)).norm());
  MappedQuad q = map_to_triangle(triangle_rule(2 * std::max(k_, 1)), pts);
  MatrixXd M = monomials(q.x, k_);
  MatrixXd G = M.transpose() * q.w.asDiagonal() * M;
  Eigen::LLT<MatrixXd> llt(G);
  // T = L^{-1}: ortho_i = sum_j T(i,j) mono_j
  T_ = llt.matrixL().solve(MatrixXd::Identity(n_, n_));
}

MatrixXd ScalarBasis::monomials(const MatX2& X, int maxdeg) const {
  auto exps = monomial_exponents(maxdeg);
  MatrixXd M(X.rows(), exps.size());
  VectorXd xi = (X.col(0).array() - c_[0]) / h_;
  VectorXd eta = (X.col(1).array() - c_[1]) / h_;
  for (size_t j = 0; j < exps.size(); ++j) {
    auto [a, b] = exps[j];
    M.col(j) = xi.array().pow(a) * eta.array().pow(b);
  }
  return M;
}

void ScalarBasis::monomial_grads(const MatX2& X, int maxdeg, MatrixXd& gx, MatrixXd& gy) const {
  auto exps = monomial_exponents(maxdeg);
  gx.resize(X.rows(), exps.size());
  gy.resize(X.rows(), exps.size());
  VectorXd xi = (X.col(0).array() - c_[0]) / h_;
  VectorXd eta = (X.col(1).array() - c_[1]) / h_;
  for (size_t j = 0; j < exps.size(); ++j) {
    auto [a, b] = exps[j];
    gx.col(j) = a > 0 ? VectorXd((a / h_) * xi.array().pow(a - 1) * eta.array().pow(b))
                      : VectorXd(VectorXd::Zero(X.rows()));
    gy.col(j) = b > 0 ? VectorXd((b / h_) * xi.array().pow(a) * eta.array().pow(b - 1))
                      : VectorXd(VectorXd::Zero(X.rows()));
  }
}

MatrixXd ScalarBasis::eval(const MatX2& X) const { return monomials(X, k_) * T_.transpose(); }

void ScalarBasis::grad(const MatX2& X, MatrixXd& gx, MatrixXd& gy) const {
  MatrixXd mx, my;
  monomial_grads(X, k_, mx, my);
  gx = mx * T_.transpose();
  gy = my * T_.transpose();
}

BubbleSpace::BubbleSpace(const TriPts& pts, int k) : pts_(pts), k_(k) {
  nb_ = k >= 2 ? poly_dim(k - 2) : 0;
  c_ = (pts.row(0) + pts.row(1) + pts.row(2)).transpose() / 3.0;
  h_ = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) h_ = std::max(h_, (pts.row(i) - pts.row(j)).norm());
  // lam_i(x) affine: solve for coefficients
  Eigen::Matrix3d V;
  for (int i = 0; i < 3; ++i) V.row(i) << 1.0, pts(i, 0), pts(i, 1);
  Eigen::Matrix3d Ci = V.inverse();  // lam_i = Ci(0,i) + Ci(1,i) x + Ci(2,i) y
  for (int i = 0; i < 3; ++i) {
    bc_.col(i) = Ci.col(i);
    gl_(i, 0) = Ci(1, i);
    gl_(i, 1) = Ci(2, i);
  }
}

void BubbleSpace::bary(const MatX2& X, MatrixXd& lam) const {
  lam.resize(X.rows(), 3);
  for (int i = 0; i < 3; ++i)
    lam.col(i) = bc_(0, i) + bc_(1, i) * X.col(0).array() + bc_(2, i) * X.col(1).array();
}

MatrixXd BubbleSpace::eval(const MatX2& X) const {
  MatrixXd lam;
  bary(X, lam);
  VectorXd bub = lam.col(0).cwiseProduct(lam.col(1)).cwiseProduct(lam.col(2));
  MatrixXd out(X.rows(), nb_);
  auto exps = monomial_exponents(std::max(k_ - 2, 0));
  VectorXd xi = (X.col(0).array() - c_[0]) / h_;
  VectorXd eta = (X.col(1).array() - c_[1]) / h_;
  for (int j = 0; j < nb_; ++j) {
    auto [a, b] = exps[j];
    out.col(j) = bub.array() * xi.array().pow(a) * eta.array().pow(b);
  }
  return out;
}

void BubbleSpace::curl(const MatX2& X, MatrixXd& cx, MatrixXd& cy) const {
  MatrixXd lam;
  bary(X, lam);
  VectorXd l0 = lam.col(0), l1 = lam.col(1), l2 = lam.col(2);
  VectorXd bub = l0.cwiseProduct(l1).cwiseProduct(l2);
  VectorXd bx = gl_(0, 0) * l1.cwiseProduct(l2) + gl_(1, 0) * l0.cwiseProduct(l2) +
                gl_(2, 0) * l0.cwiseProduct(l1);
  VectorXd by = gl_(0, 1) * l1.cwiseProduct(l2) + gl_(1, 1) * l0.cwiseProduct(l2) +
                gl_(2, 1) * l0.cwiseProduct(l1);
  auto exps = monomial_exponents(std::max(k_ - 2, 0));
  VectorXd xi = (X.col(0).array() - c_[0]) / h_;
  VectorXd eta = (X.col(1).array() - c_[1]) / h_;
  cx.resize(X.rows(), nb_);
  cy.resize(X.rows(), nb_);
  for (int j = 0; j < nb_; ++j) {
    auto [a, b] = exps[j];
    VectorXd m = (xi.array().pow(a) * eta.array().pow(b)).matrix();
    VectorXd mx = a > 0 ? VectorXd((a / h_) * xi.array().pow(a - 1) * eta.array().pow(b))
                        : VectorXd(VectorXd::Zero(X.rows()));
    VectorXd my = b > 0 ? VectorXd((b / h_) * xi.array().pow(a) * eta.array().pow(b - 1))
                        : VectorXd(VectorXd::Zero(X.rows()));
    VectorXd dx = bx.cwiseProduct(m) + bub.cwiseProduct(mx);
    VectorXd dy = by.cwiseProduct(m) + bub.cwiseProduct(my);
    cx.col(j) = dy;    // curl b = (d b/dy, -d b/dx)
    cy.col(j) = -dx;
  }
}

} // namespace sdg
