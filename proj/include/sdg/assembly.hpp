#pragma once
#include "sdg/space.hpp"
#include <Eigen/Sparse>
#include <vector>

namespace sdg {

using SpMat = Eigen::SparseMatrix<double>;

// accumulates local coefficient-space matrices into a full-dof sparse block
class BlockBuilder {
public:
  BlockBuilder(const FeSpace& r, const FeSpace& c) : R_(&r), C_(&c) {}

  // Mloc is (nloc_r, nloc_c) in coefficient space
  void add(int tr, int tc, const MatrixXd& Mloc) {
    const auto& pr = R_->patches[tr];
    const auto& pc = C_->patches[tc];
    MatrixXd G = pr.C.transpose() * Mloc * pc.C;
    for (int i = 0; i < G.rows(); ++i)
      for (int j = 0; j < G.cols(); ++j)
        if (G(i, j) != 0.0) trips_.emplace_back(pr.dofs[i].gid, pc.dofs[j].gid, G(i, j));
  }

  SpMat build() const {
    SpMat A(R_->ntot(), C_->ntot());
    A.setFromTriplets(trips_.begin(), trips_.end());
    return A;
  }

private:
  const FeSpace *R_, *C_;
  std::vector<Eigen::Triplet<double>> trips_;
};

// weighted inner product: (nq, nr)' * diag(w) * (nq, nc)
inline MatrixXd wdot(const MatrixXd& phi, const VectorXd& w, const MatrixXd& psi) {
  return phi.transpose() * w.asDiagonal() * psi;
}

// scatter a local coefficient-space load vector into a full-dof vector
inline void scatter_rhs(VectorXd& out, const FeSpace& S, int ti, const VectorXd& loc) {
  VectorXd g = S.patches[ti].C.transpose() * loc;
  for (size_t i = 0; i < S.patches[ti].dofs.size(); ++i)
    out[S.patches[ti].dofs[i].gid] += g[i];
}

} // namespace sdg
