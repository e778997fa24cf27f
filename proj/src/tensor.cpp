#include "regge/tensor.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace regge::tensor {

bool is_spd(const Mat& g) {
  if (g.rows() != g.cols() || g.rows() == 0) return false;
  Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(g)};
  return llt.info() == Eigen::Success;
}

Metric::Metric(const Mat& g_in) : g(g_in) {
  require(g.rows() == g.cols() && g.rows() >= 1 && g.rows() <= kMaxDim,
          "Metric: bad dimensions");
  Eigen::LLT<Eigen::MatrixXd> llt((Eigen::MatrixXd(g)));
  require(llt.info() == Eigen::Success, "Metric: matrix is not symmetric positive definite");
  ginv = g.inverse();
  sqrt_det = std::sqrt(g.determinant());
}

double inner_g(const Mat& sigma, const Mat& rho, const Metric& m) {
  return (m.ginv * sigma * m.ginv * rho).trace();
}

double trace_g(const Mat& sigma, const Metric& m) { return (m.ginv * sigma).trace(); }

double sandwich(const Mat& sigma, const Mat& middle, const Mat& rho, const Metric& m) {
  return (m.ginv * sigma * m.ginv * middle * m.ginv * rho).trace();
}

Mat J_map(const Mat& sigma, const Metric& m) { return sigma - 0.5 * trace_g(sigma, m) * m.g; }

Mat S_map(const Mat& sigma, const Metric& m) { return sigma - trace_g(sigma, m) * m.g; }

Mat SF_map(const Mat& sigma_restricted, const Metric& g_restricted) {
  return S_map(sigma_restricted, g_restricted);
}

Mat pullback(const Mat& sigma, const Mat& frame) {
  Mat gram = frame.transpose() * frame;
  require(std::abs(gram.determinant()) > 1e-14 * std::pow(frame.norm(), 2 * frame.cols()),
          "pullback: rank-deficient frame");
  return frame.transpose() * sigma * frame;
}

}  // namespace regge::tensor
