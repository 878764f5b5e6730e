#pragma once
#include "sdg/basis.hpp"
#include "sdg/mesh.hpp"
#include <vector>

namespace sdg {

// HB: Brinkman velocity (P^k)^2, normal continuity on dual edges of Omega_B
// WB: velocity gradient (P^k)^{2x2}; Gn continuous on primal edges, (Gn).t on
//     dual edges, Gn = 0 on the Brinkman outer boundary and the interface
// QB: Brinkman pressure P^k, trace continuity on primal edges of Omega_B
// HD: Darcy velocity, BDM (P^k)^2 with normal-trace edge moments
// QD: Darcy pressure, discontinuous P^{k-1}
// UH: concentration, QB-like over the whole of Omega (interface edges included)
// WH: diffusive flux, HB-like over the whole of Omega
enum class SpaceKind { HB, WB, QB, HD, QD, UH, WH };

// multi-component field: returns (npts, ncomp)
using MultiField = std::function<MatrixXd(const MatX2&)>;

struct SpaceOptions {
  bool relax_GB = false;  // WB: leave Gn free on Gamma_B (Dirichlet-velocity mode)
  // HD: which Gamma_D edges carry prescribed normal flux (lifted dofs).
  // Defaults to all of Gamma_D; pressure-Dirichlet segments return false.
  std::function<bool(const Edge&)> hd_flux_edge;
};

struct FeSpace {
  SpaceKind kind;
  int k = 1;
  const StaggeredMesh* mesh = nullptr;
  SpaceOptions opts;

  int nfree = 0, nfixed = 0;
  int ntot() const { return nfree + nfixed; }

  struct Dof {
    int gid;      // [0,nfree) free, nfree+[0,nfixed) fixed
    bool fixed;
  };
  struct Patch {
    std::vector<Dof> dofs;  // empty when the subtriangle is inactive
    MatrixXd C;             // coeffs = C * dofvalues (component-major blocks)
  };
  std::vector<Patch> patches;
  std::vector<ScalarBasis> bases;  // degree k (QD: k-1)

  struct FixedInfo {
    int edge, m, family;  // family: WB row 0/1; HD 0
    bool lifted;          // false: constrained to zero
  };
  std::vector<FixedInfo> fixed_info;  // per fixed dof

  double max_local_cond = 0;

  int ncomp() const {
    switch (kind) {
      case SpaceKind::QB: case SpaceKind::QD: case SpaceKind::UH: return 1;
      case SpaceKind::WB: return 4;
      default: return 2;
    }
  }
  int basis_degree() const { return kind == SpaceKind::QD ? k - 1 : k; }
  bool active(int ti) const {
    Sub s = mesh->tris[ti].sub;
    switch (kind) {
      case SpaceKind::QB: case SpaceKind::HB: case SpaceKind::WB: return s == Sub::B;
      case SpaceKind::HD: case SpaceKind::QD: return s == Sub::D;
      default: return true;
    }
  }
  int nloc() const { return ncomp() * poly_dim(basis_degree()); }

  // gather local dof values from a solution vector (free part) and fixed values
  VectorXd local_coeffs(int ti, const VectorXd& xfree, const VectorXd& xfixed) const;

  // per-component shape matrices: out[c] is (nq, nloc) in coefficient space
  std::vector<MatrixXd> shape_values(int ti, const MatX2& X) const;
  void shape_grads(int ti, const MatX2& X, std::vector<MatrixXd>& gx,
                   std::vector<MatrixXd>& gy) const;

  // evaluate one component of the expanded field
  VectorXd eval(int ti, const VectorXd& coeffs, const MatX2& X, int comp) const;
};

FeSpace build_space(SpaceKind kind, const StaggeredMesh& mesh, int k,
                    const SpaceOptions& opts = {});

// DOF functionals applied to a smooth field (the interpolation operators I_h,
// J_h, Pi^BDM and the cellwise projection onto QD are all realized this way).
// Returns values for both free and fixed dofs, indexed like Dof::gid.
VectorXd dof_values(const FeSpace& S, const MultiField& F);

// fixed-dof values: zeros for constrained dofs, edge moments of g for lifted
// ones (g = prescribed normal flux on the attached boundary edge).
VectorXd lifted_values(const FeSpace& S, const EdgeScalarField& g);

// L2 projection onto P^k(e) in Legendre coordinates: c_m such that
// (Pi g)(s) = sum_m c_m P_m(s), s the reference coordinate on the edge.
VectorXd project_edge(const ScalarField& g, const Edge& e, int k);
VectorXd eval_edge_poly(const VectorXd& c, const VectorXd& s);

} // namespace sdg
