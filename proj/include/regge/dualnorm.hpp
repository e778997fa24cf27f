#pragma once

#include "regge/fields.hpp"
#include "regge/functionals.hpp"
#include "regge/mesh.hpp"
#include "regge/polynomial.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <string>
#include <vector>

namespace regge::dual {

/// H1-conforming nodal (Lagrange) space of degree `order` on a simplicial
/// mesh. Nodes are identified across elements by their supporting
/// sub-simplex and lattice position, so the numbering is mesh-deterministic.
class LagrangeSpace {
 public:
  LagrangeSpace(const mesh::SimplicialMesh& m, int order);

  const mesh::SimplicialMesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int n_nodes() const { return n_nodes_; }
  int n_free() const { return n_free_; }
  int local_size() const { return static_cast<int>(ref_exponents_.size()); }

  int cell_node(int cell, int local) const { return cell_nodes_[cell][local]; }
  /// Equation index of a node (-1 for constrained boundary nodes).
  int equation(int node) const { return equation_[node]; }

  /// Values (and optionally gradients/Hessians) of all local basis
  /// functions of `cell` at physical point x. Exact for the affine map.
  void eval_basis(int cell, const Vec& x, std::vector<double>& values) const;
  void eval_basis_jet(int cell, const Vec& x, std::vector<double>& values,
                      std::vector<Vec>& grads, std::vector<Mat>& hessians) const;

 private:
  const mesh::SimplicialMesh* mesh_;
  int order_;
  int n_nodes_ = 0;
  int n_free_ = 0;
  std::vector<std::array<int, 4>> ref_exponents_;
  Eigen::MatrixXd coeffs_;  // nodal basis in barycentric monomials (shared)
  std::vector<std::vector<int>> cell_nodes_;
  std::vector<int> equation_;
  std::vector<poly::SimplexGeometry> geom_;
};

/// Compressed sparse row view of an assembled SPD system over the free
/// (non-Dirichlet) equations.
struct SparseMatrix {
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;

  int rows() const { return static_cast<int>(A.rows()); }
  std::span<const int> row_ptr() const { return {A.outerIndexPtr(), static_cast<std::size_t>(A.rows() + 1)}; }
  std::span<const int> col_idx() const { return {A.innerIndexPtr(), static_cast<std::size_t>(A.nonZeros())}; }
  std::span<const double> values() const { return {A.valuePtr(), static_cast<std::size_t>(A.nonZeros())}; }
  double symmetry_defect() const;
};

struct BiharmonicConfig {
  double penalty_scale = 10.0;  // eta = penalty_scale * order^2, weighted 1/h_F
};

/// C0 interior-penalty discretization of the biharmonic operator with
/// essential zero values on the boundary and penalized normal derivatives
/// (clamped-plate conditions).
SparseMatrix assemble_biharmonic(const LagrangeSpace& space, const BiharmonicConfig& cfg = {});

/// Load vectors <f, phi_i e_comp> for every symmetric component, from a
/// point functional (only values of the test field are sampled).
std::vector<Eigen::VectorXd> apply_functional_to_basis(const LagrangeSpace& space,
                                                       const forms::PointFunctional& f);

/// Scalar volume load int f phi_i dx.
Eigen::VectorXd assemble_scalar_load(const LagrangeSpace& space, const fields::ScalarField& f,
                                     int quad_degree);

struct SolveStats {
  std::string method;
  int iterations = 0;       // 0 for direct
  double rel_residual = 0.0;
};

/// Shared factorization for repeated solves; direct Cholesky up to 2e5
/// unknowns, diagonally preconditioned CG beyond.
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& mat, double tol = 1e-10);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, SolveStats* stats = nullptr) const;

 private:
  const Eigen::SparseMatrix<double, Eigen::RowMajor>* A_;
  Eigen::SparseMatrix<double> Acol_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  double tol_;
  bool direct_ = true;
};

Eigen::VectorXd solve_spd(const SparseMatrix& mat, const Eigen::VectorXd& rhs, double tol = 1e-10,
                          SolveStats* stats = nullptr);

struct DualNormReport {
  std::vector<double> component_norms;  // H2-type norm per solved component
  double combined = 0.0;                // root-sum-square
  int order = 0;
  long long ndof_per_component = 0;
  std::vector<SolveStats> solves;
};

/// Discrete H2-type norm sqrt(L2^2 + H1^2 + broken H2^2) of a coefficient
/// vector over the free equations.
double discrete_h2_norm(const LagrangeSpace& space, const Eigen::VectorXd& solution,
                        int quad_degree);

/// H^-2-type dual norm of an error functional: solve the componentwise
/// biharmonic problem and report the solution's H2-type norm. `order`
/// should be the Regge degree plus two.
DualNormReport hminus2_norm(const mesh::SimplicialMesh& m, const forms::PointFunctional& f,
                            int order, const BiharmonicConfig& cfg = {});

}  // namespace regge::dual
