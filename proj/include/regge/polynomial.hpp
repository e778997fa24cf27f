#pragma once

#include "regge/core.hpp"
#include "regge/quadrature.hpp"

#include <array>
#include <vector>

namespace regge::poly {

/// Affine geometry of a physical d-simplex embedded in R^d: barycentric
/// coordinate functions lambda_i(x) = bary_offset_i + bary_grad_i . x and the
/// reference-to-physical map.
struct SimplexGeometry {
  int dim = 0;
  std::array<Vec, 4> verts;
  Mat jacobian;        // columns v_i - v_0
  double abs_det_jac;  // = dim! * volume
  std::array<Vec, 4> bary_grad;
  std::array<double, 4> bary_offset;

  Vec point_from_bary(const std::array<double, 4>& lambda) const {
    Vec x = Vec::Zero(dim);
    for (int i = 0; i <= dim; ++i) x += lambda[i] * verts[i];
    return x;
  }
  std::array<double, 4> bary_from_point(const Vec& x) const {
    std::array<double, 4> lambda{0, 0, 0, 0};
    for (int i = 0; i <= dim; ++i) lambda[i] = bary_offset[i] + bary_grad[i].dot(x);
    return lambda;
  }
};

SimplexGeometry simplex_geometry(int dim, const std::array<Vec, 4>& verts);

/// Scalar polynomial on one simplex in the barycentric-monomial basis
/// {prod_i lambda_i^{alpha_i} : |alpha| = degree}. Homogenizing against
/// sum(lambda) = 1 makes this a basis of P_degree; cardinality C(dim+degree,
/// degree). Derivatives in physical coordinates are exact.
class PolyBasis {
 public:
  PolyBasis(const SimplexGeometry& geom, int degree);

  int size() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  const SimplexGeometry& geometry() const { return geom_; }

  void eval(const Vec& x, std::vector<double>& values) const;
  /// Values, gradients and Hessians of all basis functions at x.
  void eval_jet(const Vec& x, std::vector<double>& values, std::vector<Vec>& grads,
                std::vector<Mat>& hessians) const;

  /// Gram matrix int_T phi_m phi_n dx (Euclidean measure), SPD.
  Eigen::MatrixXd gram(const quad::QuadratureRule& rule) const;

 private:
  SimplexGeometry geom_;
  int degree_;
  std::vector<std::array<int, 4>> exponents_;
};

/// Coefficients of the componentwise L2(T) best approximation of an
/// arbitrary sampler. `samples(q)` must return the component values at
/// quadrature point q of `rule`.
std::vector<std::vector<double>> l2_project(
    const PolyBasis& basis, const quad::QuadratureRule& rule, int n_components,
    const std::function<void(int q, const Vec& x, std::vector<double>& comps)>& samples);

struct PolyJet {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

/// Exact jet of a polynomial given by coefficients in `basis`.
PolyJet eval_poly_jet(const PolyBasis& basis, const std::vector<double>& coeffs, const Vec& x);

}  // namespace regge::poly
