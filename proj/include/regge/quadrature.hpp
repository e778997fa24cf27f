#pragma once

#include "regge/core.hpp"

#include <vector>

namespace regge::quad {

/// Quadrature rule on the reference d-simplex. Points are stored in
/// barycentric coordinates (d+1 entries each); weights are with respect to
/// the reference measure, so they sum to 1/d!.
struct QuadratureRule {
  int dim = 0;
  int exactness_degree = 0;
  std::vector<std::array<double, 4>> points;  // barycentric, dim+1 entries used
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Legendre rule on [0,1]; exact for polynomials of degree <= 2n-1.
struct GaussLegendre01 {
  std::vector<double> points;
  std::vector<double> weights;
};

GaussLegendre01 gauss_legendre_01(int n);

/// Conical-product rule on the reference simplex of dimension 1, 2 or 3,
/// exact (to roundoff) for all polynomials of total degree
/// <= exactness_degree. All weights positive, all points interior.
QuadratureRule simplex_rule(int dim, int exactness_degree);

/// Closed-form monomial integral over the reference d-simplex,
/// prod(a_i!) / (sum(a_i) + d)!. Used as the exactness oracle.
double reference_monomial_integral(int dim, const std::array<int, 3>& exponents);

inline constexpr int kMaxExactness = 30;

}  // namespace regge::quad
