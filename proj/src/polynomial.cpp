#include "regge/polynomial.hpp"

#include <cmath>

namespace regge::poly {

SimplexGeometry simplex_geometry(int dim, const std::array<Vec, 4>& verts) {
  SimplexGeometry g;
  g.dim = dim;
  g.verts = verts;
  g.jacobian = Mat::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) g.jacobian.col(a) = verts[a + 1] - verts[0];
  double det = g.jacobian.determinant();
  require(std::abs(det) > 1e-300, "simplex_geometry: degenerate simplex");
  g.abs_det_jac = std::abs(det);

  // lambda_a (a>=1) are the rows of J^{-1} applied to (x - v0); lambda_0 is
  // the complement
  Mat jinv = g.jacobian.inverse();
  for (int a = 1; a <= dim; ++a) {
    Vec row = jinv.row(a - 1).transpose();
    g.bary_grad[a] = row;
    g.bary_offset[a] = -row.dot(verts[0]);
  }
  g.bary_grad[0] = Vec::Zero(dim);
  g.bary_offset[0] = 1.0;
  for (int a = 1; a <= dim; ++a) {
    g.bary_grad[0] -= g.bary_grad[a];
    g.bary_offset[0] -= g.bary_offset[a];
  }
  return g;
}

namespace {

void enumerate_exponents(int dim, int degree, std::vector<std::array<int, 4>>& out) {
  // all alpha in N_0^{dim+1} with |alpha| = degree, lexicographic
  std::array<int, 4> alpha{0, 0, 0, 0};
  std::function<void(int, int)> rec = [&](int slot, int remaining) {
    if (slot == dim) {
      alpha[slot] = remaining;
      out.push_back(alpha);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      alpha[slot] = k;
      rec(slot + 1, remaining - k);
    }
  };
  rec(0, degree);
}

}  // namespace

PolyBasis::PolyBasis(const SimplexGeometry& geom, int degree) : geom_(geom), degree_(degree) {
  require(degree >= 0, "PolyBasis: negative degree");
  enumerate_exponents(geom.dim, degree, exponents_);
}

void PolyBasis::eval(const Vec& x, std::vector<double>& values) const {
  const auto lambda = geom_.bary_from_point(x);
  values.resize(exponents_.size());
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    double v = 1.0;
    for (int i = 0; i <= geom_.dim; ++i)
      for (int p = 0; p < exponents_[m][i]; ++p) v *= lambda[i];
    values[m] = v;
  }
}

void PolyBasis::eval_jet(const Vec& x, std::vector<double>& values, std::vector<Vec>& grads,
                         std::vector<Mat>& hessians) const {
  const int dim = geom_.dim;
  const auto lambda = geom_.bary_from_point(x);
  const std::size_t nb = exponents_.size();
  values.resize(nb);
  grads.assign(nb, Vec::Zero(dim));
  hessians.assign(nb, Mat::Zero(dim, dim));

  auto pow_or_zero = [&](int i, int p) {
    if (p < 0) return 0.0;
    double v = 1.0;
    for (int k = 0; k < p; ++k) v *= lambda[i];
    return v;
  };

  for (std::size_t m = 0; m < nb; ++m) {
    const auto& a = exponents_[m];
    double v = 1.0;
    for (int i = 0; i <= dim; ++i) v *= pow_or_zero(i, a[i]);
    values[m] = v;

    for (int i = 0; i <= dim; ++i) {
      if (a[i] == 0) continue;
      double partial = a[i] * pow_or_zero(i, a[i] - 1);
      for (int j = 0; j <= dim; ++j)
        if (j != i) partial *= pow_or_zero(j, a[j]);
      grads[m] += partial * geom_.bary_grad[i];
    }

    for (int i = 0; i <= dim; ++i) {
      for (int j = 0; j <= dim; ++j) {
        double coeff;
        if (i == j) {
          if (a[i] < 2) continue;
          coeff = static_cast<double>(a[i]) * (a[i] - 1) * pow_or_zero(i, a[i] - 2);
          for (int k = 0; k <= dim; ++k)
            if (k != i) coeff *= pow_or_zero(k, a[k]);
        } else {
          if (a[i] == 0 || a[j] == 0) continue;
          coeff = static_cast<double>(a[i]) * a[j] * pow_or_zero(i, a[i] - 1) *
                  pow_or_zero(j, a[j] - 1);
          for (int k = 0; k <= dim; ++k)
            if (k != i && k != j) coeff *= pow_or_zero(k, a[k]);
        }
        hessians[m] += coeff * (geom_.bary_grad[i] * geom_.bary_grad[j].transpose());
      }
    }
  }
}

Eigen::MatrixXd PolyBasis::gram(const quad::QuadratureRule& rule) const {
  const int nb = size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nb, nb);
  std::vector<double> vals;
  for (int q = 0; q < rule.size(); ++q) {
    Vec x = geom_.point_from_bary(rule.points[q]);
    eval(x, vals);
    const double w = rule.weights[q] * geom_.abs_det_jac;
    for (int m = 0; m < nb; ++m)
      for (int n = 0; n <= m; ++n) G(m, n) += w * vals[m] * vals[n];
  }
  for (int m = 0; m < nb; ++m)
    for (int n = m + 1; n < nb; ++n) G(m, n) = G(n, m);
  return G;
}

std::vector<std::vector<double>> l2_project(
    const PolyBasis& basis, const quad::QuadratureRule& rule, int n_components,
    const std::function<void(int q, const Vec& x, std::vector<double>& comps)>& samples) {
  const int nb = basis.size();
  Eigen::MatrixXd G = basis.gram(rule);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, n_components);
  std::vector<double> vals, comps(n_components);
  for (int q = 0; q < rule.size(); ++q) {
    Vec x = basis.geometry().point_from_bary(rule.points[q]);
    basis.eval(x, vals);
    samples(q, x, comps);
    const double w = rule.weights[q] * basis.geometry().abs_det_jac;
    for (int m = 0; m < nb; ++m)
      for (int c = 0; c < n_components; ++c) rhs(m, c) += w * vals[m] * comps[c];
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  require(ldlt.info() == Eigen::Success, "l2_project: singular Gram matrix");
  Eigen::MatrixXd sol = ldlt.solve(rhs);
  std::vector<std::vector<double>> coeffs(n_components, std::vector<double>(nb));
  for (int c = 0; c < n_components; ++c)
    for (int m = 0; m < nb; ++m) coeffs[c][m] = sol(m, c);
  return coeffs;
}

PolyJet eval_poly_jet(const PolyBasis& basis, const std::vector<double>& coeffs, const Vec& x) {
  require(coeffs.size() == static_cast<std::size_t>(basis.size()),
          "eval_poly_jet: coefficient count mismatch");
  const int dim = basis.geometry().dim;
  std::vector<double> vals;
  std::vector<Vec> grads;
  std::vector<Mat> hessians;
  basis.eval_jet(x, vals, grads, hessians);
  PolyJet jet;
  jet.grad = Vec::Zero(dim);
  jet.hess = Mat::Zero(dim, dim);
  for (int m = 0; m < basis.size(); ++m) {
    jet.value += coeffs[m] * vals[m];
    jet.grad += coeffs[m] * grads[m];
    jet.hess += coeffs[m] * hessians[m];
  }
  return jet;
}

}  // namespace regge::poly
