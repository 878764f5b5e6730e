#pragma once
#include "sdg/flow.hpp"
#include "sdg/transport.hpp"

namespace sdg {

using TimeVecField = std::function<MatX2(const MatX2&, double)>;

// closed-form solution with matching sources and boundary data
struct ManufacturedCase {
  Rect domB, domD;
  double eps = 1, alpha = 1, kdarcy = 1, kdiff = 1;
  MultiField uB, uD;  // 2 components
  MultiField L;       // 4 components: row-major gradient scaled by eps
  ScalarField pB, pD, f;
  MultiField fB, fD;
  TimeField c, s;
  TimeVecField z;
  FlowBC bc;  // g1, g2 traces of the exact velocity
  FlowParams params() const {
    FlowParams p;
    p.eps = eps;
    p.alpha = alpha;
    p.kdarcy = kdarcy;
    return p;
  }
  FlowSources sources() const { return {fB, fD, f}; }
};

ManufacturedCase make_case1(double eps = 1, double alpha = 1, double kdarcy = 1,
                            double kdiff = 1);
ManufacturedCase make_case2(double eps = 1, double alpha = 1, double kdarcy = 1,
                            double kdiff = 1);

// finite-difference residuals of the governing equations at random interior
// points; returns the max relative residual (expected <= 1e-9)
double case_self_check(const ManufacturedCase& mc, int npts = 200, unsigned seed = 12345);
// interface condition residuals sampled along the subdomain interface
double case_interface_check(const ManufacturedCase& mc, int npts = 101);

// demo configuration without an exact solution
struct DemoCase {
  std::string name;
  Rect domB, domD;          // used when the mesh is generated, not ingested
  FlowParams fprm;
  FlowBC bc;
  FlowSources src;
  TransportParams tprm;
  TransportData tdata;
  std::vector<double> snapshot_times;
};

DemoCase make_case3();
// step-interface demo; kdarcy is drawn per primal cell, log-uniform in
// [1e-6, 1e-3], from a fixed-seed generator
DemoCase make_case4(int ncells, unsigned seed = 2024);

} // namespace sdg
