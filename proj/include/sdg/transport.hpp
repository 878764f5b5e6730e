#pragma once
#include "sdg/flow.hpp"

namespace sdg {

// time-dependent scalar data
using TimeField = std::function<VectorXd(const MatX2&, double)>;

struct TransportParams {
  Eigen::Matrix2d K = Eigen::Matrix2d::Identity();  // diffusion-dispersion tensor
  double phi = 1.0;                                 // porosity
  double dt = 1e-3;
  double tfinal = 0.1;
};

struct TransportData {
  TimeField s;      // volumetric source (enters as (phi s, q))
  TimeField c_in;   // inflow concentration
  TimeField c_hat;  // injected concentration, weights f+
  ScalarField f;    // Darcy mass source; f+ = max(f,0) injects, f- produces
  ScalarField c0;   // initial concentration
};

struct StepRecord {
  int step;
  double t;
  double cnorm;    // ||phi^{1/2} c_h||
  double znorm;    // ||K^{-1/2} z_h||
  double influx;   // boundary mass inflow rate
  double outflux;  // boundary mass outflow rate (corrections included)
  double ledger;   // relative mass-balance residual of the step
  double energy;   // relative energy-identity residual of the step
};

struct StabilityReport {
  double lhs = 0;    // 2 dt sum ||K^{-1/2}z||^2 + ||phi^{1/2}c^N||^2
  double rhs = 0;    // data side without the unknown constant
  double ratio = 0;  // lhs / rhs
};

// Fully discrete upwind scheme, backward Euler in time. The system matrix is
// time-independent: factored once, one sparse solve per step.
class TransportSolver {
public:
  TransportSolver(const FlowSystem& fsys, const FlowSolution& fsol, const FlowBC& bc,
                  const TransportParams& prm, const TransportData& data);

  int nsteps() const { return nsteps_; }
  // advance to tfinal; on_step runs after every accepted step
  void run(const std::function<void(int step, double t)>& on_step = {});
  void step();  // single step (used by run)

  const FeSpace& UH() const { return UH_; }
  const FeSpace& WH() const { return WH_; }
  const VectorXd& c() const { return c_; }
  const VectorXd& z() const { return z_; }
  double time() const { return stepno_ * prm_.dt; }

  VectorXd eval_c(int ti, const MatX2& X) const;
  MatX2 eval_z(int ti, const MatX2& X) const;

  const std::vector<StepRecord>& records() const { return records_; }
  StabilityReport stability() const;
  double max_energy_residual() const;
  double max_ledger_residual() const;

  // assembled operator blocks, exposed for property checks; Jup is the
  // symmetric jump part of Sup (used by the energy identity)
  SpMat Mz, Tstar, Th, Mc, Conv, Sup, Bout, React, Jup;

private:
  const FlowSystem* fsys_;
  const FlowSolution* fsol_;
  FlowBC bc_;
  TransportParams prm_;
  TransportData data_;
  FeSpace UH_, WH_;
  int nsteps_ = 0, stepno_ = 0;
  VectorXd c_, z_, cprev_;
  VectorXd ones_u_;      // dof vector of the constant function 1 in UH
  double c0norm2_ = 0;   // ||phi^{1/2} c0||^2
  std::vector<StepRecord> records_;
  Eigen::SparseLU<SpMat> lu_;
  QuadratureRule vrule_, erule_;

  struct BEdge {  // cached boundary-edge data (g is time-independent)
    int ei, t1;
    MappedQuad q;
    VectorXd g;       // classification flux: prescribed data, or u_h.n fallback
    VectorXd unh;     // discrete u_h.n at the quadrature points
    bool corrected;   // false on pressure segments (no normal data)
  };
  std::vector<BEdge> bedges_;

  VectorXd step_rhs(double tnew) const;
  void bookkeeping(double tnew);
};

} // namespace sdg
