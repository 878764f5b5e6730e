#pragma once
#include "sdg/space.hpp"
#include <Eigen/Sparse>

namespace sdg {

using SpMat = Eigen::SparseMatrix<double>;

struct FlowParams {
  double eps = 1.0;     // Brinkman viscosity
  double alpha = 1.0;   // Brinkman zeroth-order coefficient
  double kdarcy = 1.0;  // Darcy permeability
  // per-primal-cell permeability override (heterogeneous media)
  std::function<double(int cell)> kdarcy_cell;
  // leave Gn free on Gamma_B and impose the velocity there weakly
  bool relax_GB = false;
};

struct FlowBC {
  EdgeScalarField g1;  // u_B.n on Gamma_B (n outward)
  EdgeScalarField g2;  // u_D.n on the flux part of Gamma_D
  // Gamma_D edges carrying a pressure condition instead of g2
  std::function<bool(const Edge&)> pressure_edge;
  EdgeScalarField p_dirichlet;
  MultiField brinkman_velocity;  // Dirichlet velocity on Gamma_B (relax_GB)
};

struct FlowSources {
  MultiField fB, fD;  // momentum sources
  ScalarField f;      // Darcy mass source
};

// Discrete operators over full (free + fixed) dof indices. Fixed columns are
// folded into the right-hand side at composition time; fixed rows are dropped.
struct FlowSystem {
  const StaggeredMesh* mesh = nullptr;
  int k = 1;
  FlowParams prm;
  FeSpace WB, HB, QB, HD, QD;
  SpMat Mwb;    // (eps^-1 G, G')               rows WB cols WB
  SpMat Malpha; // alpha (u, v)                 rows HB cols HB
  SpMat Bstar;  // -(divG,u) + ([Gn].n, u.n)_dl rows WB cols HB
  SpMat Bh;     // (G,grad v) - edge terms      rows HB cols WB
  SpMat bstar;  // -(p,div v) + ([v.n],p)_pr    rows HB cols QB
  SpMat bh;     // (u,grad q) - (u.n,[q])_dl    rows QB cols HB
  SpMat MD;     // (K^-1 u, v)                  rows HD cols HD
  SpMat Ah;     // (p, div v)                   rows HD cols QD
  SpMat Ih;     // (v.n_D, q)_Gamma             rows HD cols QB
  VectorXd mult;      // zero-mean functional on QB (full index)
  bool use_multiplier = true;
};

FlowSystem build_flow_system(const StaggeredMesh& mesh, int k, const FlowParams& prm,
                             const FlowBC& bc);

struct FlowSolution {
  VectorXd wb, hb, qb, hd, qd;  // free coefficients per space
  VectorXd hd_fixed;            // lifted g2 moments (fixed dofs of HD)
  double lambda = 0.0;
  double residual = 0.0;  // relative algebraic residual
  double compat = -1.0;   // compatibility residual, -1 when skipped
};

FlowSolution solve_flow(const FlowSystem& sys, const FlowSources& src, const FlowBC& bc);

struct ConservationReport {
  double div_uB_max = 0;       // max |div u_B| at volume quadrature points
  double iface_jump_max = 0;   // max |[u.n]| at interface quadrature points
  double g1_residual_max = 0;  // max |u_B.n - Pi g1| on Gamma_B
  double div_uD_residual = 0;  // max |div u_D - f| at volume quadrature points
};

ConservationReport verify_conservation(const FlowSystem& sys, const FlowSolution& sol,
                                       const FlowBC& bc, const ScalarField& f);

// velocity of the composite discrete field (u_B on B subtriangles, u_D on D)
MatX2 flow_velocity(const FlowSystem& sys, const FlowSolution& sol, int ti, const MatX2& X);

// per-field expansion helpers
VectorXd local_field(const FeSpace& S, int ti, const VectorXd& xfree, const VectorXd& xfixed);

} // namespace sdg
