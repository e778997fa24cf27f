#pragma once

#include "regge/fields.hpp"
#include "regge/mesh.hpp"
#include "regge/quadrature.hpp"
#include "regge/regge_space.hpp"

#include <array>
#include <memory>
#include <vector>

namespace regge::forms {

using fe::CellTensorSource;
using fields::ScalarField;
using fields::TensorField;

/// Quadrature exactness per entity codimension. Curvatures of polynomial
/// metrics are rational, so these are accuracy knobs, not exactness
/// guarantees.
struct QuadConfig {
  int volume_degree = 8;
  int facet_degree = 8;
  int ridge_degree = 6;

  static QuadConfig for_degree(int r) {
    return QuadConfig{2 * r + 6, 2 * r + 6, 2 * r + 4};
  }
};

/// Entity-type breakdown of a distributional pairing. The total is the
/// fixed-order sum volume + facet + ridge, each reduced pairwise over
/// entities in canonical order.
struct PairingReport {
  double volume_part = 0.0;
  double facet_part = 0.0;
  double ridge_part = 0.0;
  double total = 0.0;
};

/// <(G omega)_dist(g), rho>: cellwise Einstein tensor, facet jumps of the
/// trace-reversed second fundamental form, ridge angle defects. Boundary
/// facets/ridges use one-sided jumps and m_S = 1 unless `interior_only`.
PairingReport pair_einstein_dist(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                                 const CellTensorSource& rho, const QuadConfig& qc,
                                 bool interior_only = false);

/// <(R omega)_dist(g), v> with the boundary conventions that produce the
/// Gauss-Bonnet identity in dimension 2.
PairingReport pair_scalar_dist(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                               const ScalarField& v, const QuadConfig& qc);

/// Classical pairing int <G(g), rho>_g omega(g) (volume quadrature only).
double pair_classical(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                      const CellTensorSource& rho, const QuadConfig& qc);

double bilinear_Ah(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                   const CellTensorSource& sigma, const CellTensorSource& rho,
                   const QuadConfig& qc, bool interior_only = false);

enum class BhForm { simpler, expanded };

double bilinear_Bh(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                   const CellTensorSource& sigma, const CellTensorSource& rho,
                   const QuadConfig& qc, BhForm form = BhForm::expanded,
                   bool interior_only = false);

double bilinear_ah(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                   const CellTensorSource& sigma, const ScalarField& v, const QuadConfig& qc);

enum class BhScalarForm { divdiv, hessian };

double bilinear_bh(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                   const CellTensorSource& sigma, const ScalarField& v, const QuadConfig& qc,
                   BhScalarForm form = BhScalarForm::divdiv);

/// Central-difference check of d/dt <(G omega)_dist(g + t sigma), rho>
/// against B_h + A_h at parameter t.
struct EvolutionCheck {
  double fd_derivative = 0.0;
  double forms_value = 0.0;
  double residual = 0.0;
};

EvolutionCheck evolution_check(const mesh::SimplicialMesh& m,
                               std::shared_ptr<const CellTensorSource> g_base,
                               std::shared_ptr<const CellTensorSource> sigma,
                               const CellTensorSource& rho, double t, double dt,
                               const QuadConfig& qc, bool interior_only = false);

/// int_0^1 (B_h + A_h)(g~(t); g_h - g, rho) dt by Gauss quadrature with
/// n_gauss points; equals the pairing difference up to t-quadrature error.
double error_pairing(const mesh::SimplicialMesh& m, std::shared_ptr<const CellTensorSource> g,
                     std::shared_ptr<const CellTensorSource> gh, const CellTensorSource& rho,
                     int n_gauss, const QuadConfig& qc, bool interior_only = false);

/// Codimension-2 pieces of the error representation: F1 from B_h, F2 from
/// A_h, F3 = F1 + F2. Interior ridges only.
std::array<double, 3> codim2_functionals(const mesh::SimplicialMesh& m,
                                         std::shared_ptr<const CellTensorSource> g,
                                         std::shared_ptr<const CellTensorSource> gh,
                                         const CellTensorSource& rho, int n_gauss,
                                         const QuadConfig& qc);

/// Linear functional sampled at quadrature points: <f, rho> =
/// sum_q W_q : rho(x_q). Facet/ridge contributions only involve values of
/// rho, so continuous test fields are admissible.
struct WeightedPoint {
  int cell = 0;  // owner cell for basis evaluation
  Vec x;
  Mat W;
};
using PointFunctional = std::vector<WeightedPoint>;

double apply_point_functional(const PointFunctional& f, const TensorField& rho);

/// (G omega)_dist(g_h) - (G omega)(g) as a point functional.
PointFunctional einstein_error_functional(const mesh::SimplicialMesh& m,
                                          const CellTensorSource& g, const CellTensorSource& gh,
                                          const QuadConfig& qc);

enum class Codim2Part { F1, F2, F3 };

/// F1/F2/F3 as point functionals (t-quadrature folded into the weights).
PointFunctional codim2_point_functional(const mesh::SimplicialMesh& m,
                                        std::shared_ptr<const CellTensorSource> g,
                                        std::shared_ptr<const CellTensorSource> gh, int n_gauss,
                                        const QuadConfig& qc, Codim2Part part);

/// g + s * direction, for evolution sweeps.
class AffineSource : public CellTensorSource {
 public:
  AffineSource(std::shared_ptr<const CellTensorSource> base,
               std::shared_ptr<const CellTensorSource> dir, double s)
      : base_(std::move(base)), dir_(std::move(dir)), s_(s) {}
  int dim() const override { return base_->dim(); }
  fields::TensorJet jet(int cell, const Vec& x) const override {
    return base_->jet(cell, x) + s_ * dir_->jet(cell, x);
  }
  std::string context(int cell) const override {
    return "metric family (cell " + std::to_string(cell) + ", s=" + std::to_string(s_) + ")";
  }

 private:
  std::shared_ptr<const CellTensorSource> base_, dir_;
  double s_;
};

}  // namespace regge::forms
