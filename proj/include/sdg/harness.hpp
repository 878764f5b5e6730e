#pragma once
#include "sdg/cases.hpp"
#include <string>
#include <vector>

namespace sdg {

// L2 errors against a manufactured case (err_L is weighted by eps^{-1/2})
struct ErrorSet {
  double L = 0, uB = 0, pB = 0, uD = 0, pD = 0, c = 0, z = 0;
};

ErrorSet flow_errors(const FlowSystem& sys, const FlowSolution& sol,
                     const ManufacturedCase& mc);
// concentration and flux errors at the solver's current time
void transport_errors(const TransportSolver& ts, const ManufacturedCase& mc,
                      ErrorSet& out);

struct ConvergenceOptions {
  int k = 1;
  std::vector<int> hinv = {2, 4, 8, 16, 32};  // cells per unit length
  CellKind kind = CellKind::Quad;
  double dt = 1e-3;
  double tfinal = 0.1;
  bool transport = true;
};

struct LadderRow {
  double h = 0;
  ErrorSet err;
  ConservationReport cons;
  StabilityReport stab;
  double max_energy = 0, max_ledger = 0;
};

struct ConvergenceResult {
  std::vector<LadderRow> rows;
  // observed order between the two finest levels, NaN with fewer than 2 rows
  double eoc(double ErrorSet::*field) const;
};

ConvergenceResult run_convergence(const ManufacturedCase& mc,
                                  const ConvergenceOptions& opt);

// deterministic CSV, one row per ladder level; orders of the first row are NA
std::string convergence_csv(const ConvergenceResult& r);

// demo driver: solves the flow once, runs transport to tfinal, dumps per-step
// bookkeeping and concentration snapshots (subtriangle centroid samples) when
// outdir is nonempty
struct DemoResult {
  std::vector<StepRecord> records;
  StabilityReport stab;
  double max_ledger = 0, max_energy = 0;
  ConservationReport cons;
  std::vector<double> snapshot_t;
  std::vector<double> centroid_x, centroid_y;  // c-weighted, per snapshot
  std::vector<double> mass;                    // total mass per snapshot
};

DemoResult run_demo(const DemoCase& dc, const StaggeredMesh& mesh, int k,
                    const std::string& outdir = "", int dump_stride = 1);

std::string steps_csv(const std::vector<StepRecord>& recs, int stride = 1);

} // namespace sdg
