#pragma once

#include "regge/fields.hpp"
#include "regge/geometry.hpp"
#include "regge/mesh.hpp"
#include "regge/polynomial.hpp"

#include <memory>
#include <vector>

namespace regge::fe {

using fields::ScalarField;
using fields::TensorField;
using fields::TensorJet;

/// Symmetric tensor field evaluable per cell (smooth fields, Regge fields,
/// differences, convex combinations). Jets are per-cell: across facets the
/// values may jump.
class CellTensorSource {
 public:
  virtual ~CellTensorSource() = default;
  virtual int dim() const = 0;
  virtual TensorJet jet(int cell, const Vec& x) const = 0;
  /// Error-message context for SPD failures.
  virtual std::string context(int cell) const { return "metric"; }
};

geo::MetricJet metric_jet_from(const CellTensorSource& src, int cell, const Vec& x);

class SmoothSource : public CellTensorSource {
 public:
  explicit SmoothSource(std::shared_ptr<const TensorField> f) : f_(std::move(f)) {}
  int dim() const override { return f_->dim(); }
  TensorJet jet(int, const Vec& x) const override { return f_->jet(x); }

 private:
  std::shared_ptr<const TensorField> f_;
};

/// Degree-of-freedom counts for the degree-r Regge space: on every
/// sub-simplex of dimension d there are d(d+1)/2 tangential-tangential
/// component pairs times C(r+1, d) moments.
struct DofLayout {
  int dim = 0;
  int degree = 0;
  int per_edge = 0;    // d = 1
  int per_face = 0;    // d = 2 (interior dofs of a triangle in 2D)
  int per_cell_3d = 0; // d = 3
  long long ndof = 0;
};

DofLayout dof_layout(const mesh::SimplicialMesh& m, int degree);
long long count_dofs(const mesh::SimplicialMesh& m, int degree);

/// Piecewise-polynomial symmetric tensor field with single-valued
/// tangential-tangential components across interior facets.
class ReggeMetric : public CellTensorSource {
 public:
  ReggeMetric(const mesh::SimplicialMesh& m, int degree);

  int dim() const override { return mesh_->dim; }
  int degree() const { return degree_; }
  const mesh::SimplicialMesh& mesh() const { return *mesh_; }

  TensorJet jet(int cell, const Vec& x) const override;
  std::string context(int cell) const override {
    return "Regge metric (cell " + std::to_string(cell) + ")";
  }

  /// coefficients[cell][component][basis]; component order (0,0),(0,1),...
  std::vector<std::vector<std::vector<double>>> coefficients;
  const poly::PolyBasis& basis(int cell) const { return bases_[cell]; }

  std::string dump_coefficients_json() const;

 private:
  const mesh::SimplicialMesh* mesh_;
  int degree_;
  std::vector<poly::PolyBasis> bases_;
};

/// Local L2 best-approximation per element followed by arithmetic averaging
/// of the shared tangential-tangential moments.
ReggeMetric interpolate(const TensorField& field, const mesh::SimplicialMesh& m, int degree);

/// Largest tangential-tangential jump of `src` over interior facet
/// quadrature points (should be roundoff for Regge fields).
double max_tt_jump(const mesh::SimplicialMesh& m, const CellTensorSource& src, int quad_degree);

/// Number of sampled cell quadrature points at which the field fails to be
/// SPD (warning channel; not enforced).
int count_spd_violations(const mesh::SimplicialMesh& m, const CellTensorSource& src,
                         int quad_degree);

/// g~(t) = (1-t) g + t g_h with jets combined linearly; SPD is checked
/// lazily at evaluation points, failures name the cell and t.
class ConvexCombinationSource : public CellTensorSource {
 public:
  ConvexCombinationSource(std::shared_ptr<const CellTensorSource> g,
                          std::shared_ptr<const CellTensorSource> gh, double t)
      : g_(std::move(g)), gh_(std::move(gh)), t_(t) {
    require(t >= 0.0 && t <= 1.0, "convex_combination: t must lie in [0,1]");
  }
  int dim() const override { return g_->dim(); }
  double t() const { return t_; }
  TensorJet jet(int cell, const Vec& x) const override {
    return (1.0 - t_) * g_->jet(cell, x) + t_ * gh_->jet(cell, x);
  }
  std::string context(int cell) const override {
    return "convex combination (cell " + std::to_string(cell) + ", t=" + std::to_string(t_) + ")";
  }

 private:
  std::shared_ptr<const CellTensorSource> g_, gh_;
  double t_;
};

class DifferenceSource : public CellTensorSource {
 public:
  DifferenceSource(std::shared_ptr<const CellTensorSource> a,
                   std::shared_ptr<const CellTensorSource> b)
      : a_(std::move(a)), b_(std::move(b)) {}
  int dim() const override { return a_->dim(); }
  TensorJet jet(int cell, const Vec& x) const override {
    return a_->jet(cell, x) - b_->jet(cell, x);
  }

 private:
  std::shared_ptr<const CellTensorSource> a_, b_;
};

/// v(x) * base(x) with jets by the product rule (used for rho = v g).
class ScaledSource : public CellTensorSource {
 public:
  ScaledSource(std::shared_ptr<const ScalarField> v, std::shared_ptr<const CellTensorSource> base)
      : v_(std::move(v)), base_(std::move(base)) {}
  int dim() const override { return base_->dim(); }
  TensorJet jet(int cell, const Vec& x) const override;

 private:
  std::shared_ptr<const ScalarField> v_;
  std::shared_ptr<const CellTensorSource> base_;
};

}  // namespace regge::fe
