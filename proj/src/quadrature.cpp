#include "regge/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace regge::quad {

namespace {

// Gauss-Jacobi rule on [-1,1] for the weight (1-t)^alpha, via Golub-Welsch
// on the symmetric Jacobi recurrence matrix.
void gauss_jacobi(int n, double alpha, std::vector<double>& t, std::vector<double>& w) {
  require(n >= 1, "gauss_jacobi: need at least one point");
  const double beta = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double ab = 2.0 * k + alpha + beta;
    double a = (k == 0) ? (beta - alpha) / (alpha + beta + 2.0)
                        : (beta * beta - alpha * alpha) / (ab * (ab + 2.0));
    J(k, k) = a;
    if (k >= 1) {
      double b = (k == 1)
                     ? 4.0 * (1.0 + alpha) * (1.0 + beta) /
                           ((2.0 + alpha + beta) * (2.0 + alpha + beta) * (3.0 + alpha + beta))
                     : 4.0 * k * (k + alpha) * (k + beta) * (k + alpha + beta) /
                           (ab * ab * (ab + 1.0) * (ab - 1.0));
      J(k, k - 1) = J(k - 1, k) = std::sqrt(b);
    }
  }
  // mu0 = integral of (1-t)^alpha over [-1,1]
  const double mu0 = std::pow(2.0, alpha + 1.0) / (alpha + 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  require(es.info() == Eigen::Success, "gauss_jacobi: eigensolver failed");
  t.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    t[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    w[i] = mu0 * v0 * v0;
  }
}

// Same rule mapped to [0,1] with weight (1-x)^alpha.
void gauss_jacobi_01(int n, double alpha, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> t, v;
  gauss_jacobi(n, alpha, t, v);
  x.resize(n);
  w.resize(n);
  const double scale = std::pow(2.0, -alpha - 1.0);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (1.0 + t[i]);
    w[i] = scale * v[i];
  }
}

}  // namespace

GaussLegendre01 gauss_legendre_01(int n) {
  GaussLegendre01 rule;
  gauss_jacobi_01(n, 0.0, rule.points, rule.weights);
  return rule;
}

QuadratureRule simplex_rule(int dim, int exactness_degree) {
  require(dim >= 1 && dim <= 3, "simplex_rule: dim must be 1, 2 or 3");
  require(exactness_degree >= 0 && exactness_degree <= kMaxExactness,
          "simplex_rule: unsupported exactness degree " + std::to_string(exactness_degree));
  const int n = (exactness_degree + 2) / 2;  // 2n-1 >= degree

  QuadratureRule rule;
  rule.dim = dim;
  rule.exactness_degree = exactness_degree;

  std::vector<double> x0, w0, x1, w1, x2, w2;
  gauss_jacobi_01(n, 0.0, x0, w0);
  if (dim >= 2) gauss_jacobi_01(n, 1.0, x1, w1);
  if (dim >= 3) gauss_jacobi_01(n, 2.0, x2, w2);

  if (dim == 1) {
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({1.0 - x0[i], x0[i], 0.0, 0.0});
      rule.weights.push_back(w0[i]);
    }
  } else if (dim == 2) {
    // collapsed map: x = u(1-v), y = v, Jacobian (1-v)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double x = x0[i] * (1.0 - x1[j]);
        double y = x1[j];
        rule.points.push_back({1.0 - x - y, x, y, 0.0});
        rule.weights.push_back(w0[i] * w1[j]);
      }
  } else {
    // collapsed map: x = u(1-v)(1-w), y = v(1-w), z = w, Jacobian (1-v)(1-w)^2
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double x = x0[i] * (1.0 - x1[j]) * (1.0 - x2[k]);
          double y = x1[j] * (1.0 - x2[k]);
          double z = x2[k];
          rule.points.push_back({1.0 - x - y - z, x, y, z});
          rule.weights.push_back(w0[i] * w1[j] * w2[k]);
        }
  }
  return rule;
}

double reference_monomial_integral(int dim, const std::array<int, 3>& e) {
  auto fact = [](int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
  };
  double num = 1.0;
  int total = 0;
  for (int c = 0; c < dim; ++c) {
    num *= fact(e[c]);
    total += e[c];
  }
  return num / fact(total + dim);
}

}  // namespace regge::quad
