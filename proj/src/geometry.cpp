#include "regge/geometry.hpp"

#include <atomic>
#include <cmath>

namespace regge::geo {

MetricJet make_metric_jet(const TensorJet& g, const std::string& context) {
  MetricJet mj;
  mj.dim = g.dim;
  mj.g = g;
  Eigen::LLT<Eigen::MatrixXd> llt((Eigen::MatrixXd(g.value)));
  if (llt.info() != Eigen::Success)
    fail((context.empty() ? std::string("make_metric_jet") : context) +
         ": metric is not symmetric positive definite");
  mj.ginv = g.value.inverse();
  mj.sqrt_det = std::sqrt(g.value.determinant());
  for (int k = 0; k < g.dim; ++k) mj.dginv[k] = -mj.ginv * g.d1[k] * mj.ginv;
  for (int k = 0; k < g.dim; ++k)
    for (int l = 0; l < g.dim; ++l)
      mj.d2ginv[k][l] = -(mj.dginv[l] * g.d1[k] * mj.ginv + mj.ginv * g.d2[k][l] * mj.ginv +
                          mj.ginv * g.d1[k] * mj.dginv[l]);
  return mj;
}

ChristoffelJet christoffel(const MetricJet& mj) {
  const int d = mj.dim;
  ChristoffelJet cj;
  cj.dim = d;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l)
          s += mj.ginv(k, l) * (mj.g.d1[i](j, l) + mj.g.d1[j](i, l) - mj.g.d1[l](i, j));
        cj.gamma[k][i][j] = cj.gamma[k][j][i] = 0.5 * s;
      }
  for (int m = 0; m < d; ++m)
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          double s = 0.0;
          for (int l = 0; l < d; ++l) {
            s += mj.dginv[m](k, l) * (mj.g.d1[i](j, l) + mj.g.d1[j](i, l) - mj.g.d1[l](i, j));
            s += mj.ginv(k, l) * (mj.g.d2[m][i](j, l) + mj.g.d2[m][j](i, l) - mj.g.d2[m][l](i, j));
          }
          cj.dgamma[m][k][i][j] = cj.dgamma[m][k][j][i] = 0.5 * s;
        }
  return cj;
}

CurvatureData curvature(const MetricJet& mj, const ChristoffelJet& cj) {
  const int d = mj.dim;
  CurvatureData cv;
  cv.dim = d;
  // K^m_ijk = d_j Gamma^m_ik - d_i Gamma^m_jk + Gamma^p_ik Gamma^m_jp
  //           - Gamma^p_jk Gamma^m_ip,  riem_ijkl = g_ml K^m_ijk
  std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3> K{};
  for (int m = 0; m < d; ++m)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double s = cj.dgamma[j][m][i][k] - cj.dgamma[i][m][j][k];
          for (int p = 0; p < d; ++p)
            s += cj.gamma[p][i][k] * cj.gamma[m][j][p] - cj.gamma[p][j][k] * cj.gamma[m][i][p];
          K[m][i][j][k] = s;
        }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double s = 0.0;
          for (int m = 0; m < d; ++m) s += mj.g.value(m, l) * K[m][i][j][k];
          cv.riem[i][j][k][l] = s;
        }
  cv.ric = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m) s += mj.ginv(k, m) * cv.riem[m][i][k][j];
      cv.ric(i, j) = s;
    }
  cv.scalar = (mj.ginv * cv.ric).trace();
  if (d == 2)
    cv.einstein = Mat::Zero(2, 2);
  else
    cv.einstein = cv.ric - 0.5 * cv.scalar * mj.g.value;
  return cv;
}

double sandwich_riemann(const CurvatureData& cv, const MetricJet& mj, const Mat& sigma,
                        const Mat& rho) {
  const int d = mj.dim;
  Mat su = mj.ginv * sigma * mj.ginv;
  Mat ru = mj.ginv * rho * mj.ginv;
  double s = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) s += cv.riem[a][b][j][l] * su(l, a) * ru(j, b);
  return s;
}

Vec g_unit_normal(const MetricJet& mj, const Vec& euclid_outward_normal) {
  Vec w = mj.ginv * euclid_outward_normal;
  double len2 = euclid_outward_normal.dot(w);  // = g(w,w)
  require(len2 > 0.0, "g_unit_normal: degenerate metric direction");
  return w / std::sqrt(len2);
}

FacetFrameG facet_frame_g(const MetricJet& mj, const ChristoffelJet& cj, const Mat& frame,
                          const Vec& euclid_outward_normal) {
  const int d = mj.dim;
  const int fd = d - 1;
  FacetFrameG ff;
  ff.n = g_unit_normal(mj, euclid_outward_normal);
  ff.gF = frame.transpose() * mj.g.value * frame;
  ff.gFinv = ff.gF.inverse();
  ff.sqrt_det_F = std::sqrt(ff.gF.determinant());
  Vec n_low = mj.g.value * ff.n;
  ff.II = Mat::Zero(fd, fd);
  for (int a = 0; a < fd; ++a)
    for (int b = 0; b < fd; ++b) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
          for (int m = 0; m < d; ++m) s += n_low(m) * cj.gamma[m][k][l] * frame(k, a) * frame(l, b);
      ff.II(a, b) = -s;
    }
  ff.H = (ff.gFinv * ff.II).trace();
  ff.IIbar = ff.II - ff.H * ff.gF;
  return ff;
}

namespace {
std::atomic<double> g_clamp_excess{0.0};
}

double dihedral_angle(const Mat& g, const Vec& n1, const Vec& n2) {
  double c = -n1.dot(g * n2);
  double excess = std::max(0.0, std::abs(c) - 1.0);
  if (excess > 0.0) {
    double cur = g_clamp_excess.load(std::memory_order_relaxed);
    while (excess > cur &&
           !g_clamp_excess.compare_exchange_weak(cur, excess, std::memory_order_relaxed)) {
    }
    c = std::clamp(c, -1.0, 1.0);
  }
  return std::acos(c);
}

double max_arccos_clamp_excess() { return g_clamp_excess.load(); }
void reset_arccos_clamp_monitor() { g_clamp_excess.store(0.0); }

Vec conormal_nu(const Mat& g, const Mat& ridge_tangents, const Vec& toward_facet) {
  Vec nu = toward_facet;
  // g-Gram-Schmidt against the ridge tangents (at most one in dim 3)
  for (int s = 0; s < ridge_tangents.cols(); ++s) {
    Vec t = ridge_tangents.col(s);
    double tt = t.dot(g * t);
    require(tt > 0.0, "conormal_nu: degenerate ridge tangent");
    nu -= (nu.dot(g * t) / tt) * t;
  }
  double len2 = nu.dot(g * nu);
  require(len2 > 0.0, "conormal_nu: direction collapsed");
  return nu / std::sqrt(len2);
}

Tensor3Jet nabla(const TensorJet& sigma, const ChristoffelJet& cj) {
  const int d = sigma.dim;
  Tensor3Jet out;
  out.value.dim = d;
  for (int l = 0; l < d; ++l) out.d1[l].dim = d;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = sigma.d1[k](i, j);
        for (int m = 0; m < d; ++m)
          s -= cj.gamma[m][k][i] * sigma.value(m, j) + cj.gamma[m][k][j] * sigma.value(i, m);
        out.value.v[k][i][j] = s;
      }
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = sigma.d2[l][k](i, j);
          for (int m = 0; m < d; ++m) {
            s -= cj.dgamma[l][m][k][i] * sigma.value(m, j) + cj.gamma[m][k][i] * sigma.d1[l](m, j);
            s -= cj.dgamma[l][m][k][j] * sigma.value(i, m) + cj.gamma[m][k][j] * sigma.d1[l](i, m);
          }
          out.d1[l].v[k][i][j] = s;
        }
  return out;
}

Tensor4 nabla(const Tensor3Jet& t, const ChristoffelJet& cj) {
  const int d = cj.dim;
  Tensor4 out;
  out.dim = d;
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = t.d1[l].v[k][i][j];
          for (int m = 0; m < d; ++m) {
            s -= cj.gamma[m][l][k] * t.value.v[m][i][j];
            s -= cj.gamma[m][l][i] * t.value.v[k][m][j];
            s -= cj.gamma[m][l][j] * t.value.v[k][i][m];
          }
          out.v[l][k][i][j] = s;
        }
  return out;
}

Vec divergence(const Tensor3& nabla_sigma, const MetricJet& mj) {
  const int d = mj.dim;
  Vec out = Vec::Zero(d);
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i) s += mj.ginv(k, i) * nabla_sigma.v[k][i][j];
    out(j) = s;
  }
  return out;
}

Mat laplacian(const Tensor4& nabla2_sigma, const MetricJet& mj) {
  const int d = mj.dim;
  Mat out = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int l = 0; l < d; ++l)
        for (int k = 0; k < d; ++k) s += mj.ginv(l, k) * nabla2_sigma.v[l][k][i][j];
      out(i, j) = s;
    }
  return out;
}

Mat covariant_hessian(const ScalarJet& v, const ChristoffelJet& cj) {
  const int d = cj.dim;
  Mat out = v.hess;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) out(i, j) -= cj.gamma[k][i][j] * v.grad(k);
  return out;
}

ScalarJet trace_jet(const TensorJet& sigma, const MetricJet& mj) {
  const int d = mj.dim;
  ScalarJet out;
  out.grad = Vec::Zero(d);
  out.hess = Mat::Zero(d, d);
  out.value = (mj.ginv * sigma.value).trace();
  for (int k = 0; k < d; ++k)
    out.grad(k) = (mj.dginv[k] * sigma.value).trace() + (mj.ginv * sigma.d1[k]).trace();
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      out.hess(k, l) = (mj.d2ginv[k][l] * sigma.value).trace() +
                       (mj.dginv[k] * sigma.d1[l]).trace() + (mj.dginv[l] * sigma.d1[k]).trace() +
                       (mj.ginv * sigma.d2[k][l]).trace();
  return out;
}

TensorJet scalar_times_metric(const ScalarJet& s, const MetricJet& mj) {
  const int d = mj.dim;
  TensorJet out = TensorJet::zero(d);
  out.value = s.value * mj.g.value;
  for (int k = 0; k < d; ++k) out.d1[k] = s.grad(k) * mj.g.value + s.value * mj.g.d1[k];
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      out.d2[k][l] = s.hess(k, l) * mj.g.value + s.grad(k) * mj.g.d1[l] +
                     s.grad(l) * mj.g.d1[k] + s.value * mj.g.d2[k][l];
  return out;
}

TensorJet J_jet(const TensorJet& sigma, const MetricJet& mj) {
  return sigma - 0.5 * scalar_times_metric(trace_jet(sigma, mj), mj);
}

TensorJet S_jet(const TensorJet& sigma, const MetricJet& mj) {
  return sigma - scalar_times_metric(trace_jet(sigma, mj), mj);
}

Mat ein(const TensorJet& sigma, const MetricJet& mj, const ChristoffelJet& cj) {
  const int d = mj.dim;
  TensorJet jsig = J_jet(sigma, mj);
  Tensor3Jet nj = nabla(jsig, cj);
  Tensor4 nnj = nabla(nj, cj);
  Mat delta_j = laplacian(nnj, mj);

  // beta = div J sigma with exact first partials
  Vec beta = divergence(nj.value, mj);
  Mat dbeta = Mat::Zero(d, d);  // dbeta(m,j) = d_m beta_j
  for (int m = 0; m < d; ++m)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
          s += mj.dginv[m](k, i) * nj.value.v[k][i][j] + mj.ginv(k, i) * nj.d1[m].v[k][i][j];
      dbeta(m, j) = s;
    }
  Mat nabla_beta = dbeta;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) nabla_beta(i, j) -= cj.gamma[k][i][j] * beta(k);
  Mat df_beta = 0.5 * (nabla_beta + nabla_beta.transpose());

  Mat jdf = df_beta - 0.5 * (mj.ginv * df_beta).trace() * mj.g.value;
  return jdf - 0.5 * delta_j;
}

namespace {

// div of a one-form given its value and exact partials
double div_oneform(const Vec& beta, const Mat& dbeta, const MetricJet& mj,
                   const ChristoffelJet& cj) {
  const int d = mj.dim;
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double nb = dbeta(i, j);
      for (int k = 0; k < d; ++k) nb -= cj.gamma[k][i][j] * beta(k);
      s += mj.ginv(i, j) * nb;
    }
  return s;
}

void div_S_with_jet(const TensorJet& sigma, const MetricJet& mj, const ChristoffelJet& cj,
                    Vec& beta, Mat& dbeta) {
  const int d = mj.dim;
  TensorJet ssig = S_jet(sigma, mj);
  Tensor3Jet ns = nabla(ssig, cj);
  beta = divergence(ns.value, mj);
  dbeta = Mat::Zero(d, d);
  for (int m = 0; m < d; ++m)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
          s += mj.dginv[m](k, i) * ns.value.v[k][i][j] + mj.ginv(k, i) * ns.d1[m].v[k][i][j];
      dbeta(m, j) = s;
    }
}

}  // namespace

double div_div_S(const TensorJet& sigma, const MetricJet& mj, const ChristoffelJet& cj) {
  Vec beta;
  Mat dbeta;
  div_S_with_jet(sigma, mj, cj, beta, dbeta);
  return div_oneform(beta, dbeta, mj, cj);
}

Vec div_S(const TensorJet& sigma, const MetricJet& mj, const ChristoffelJet& cj) {
  Vec beta;
  Mat dbeta;
  div_S_with_jet(sigma, mj, cj, beta, dbeta);
  return beta;
}

double div_F_sigma_n(const Tensor3& nabla_sigma, const Mat& sigma, const Mat& frame,
                     const FacetFrameG& ff) {
  const int d = nabla_sigma.dim;
  const int fd = d - 1;
  double s = 0.0;
  for (int a = 0; a < fd; ++a)
    for (int b = 0; b < fd; ++b) {
      double t = 0.0;
      for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            t += nabla_sigma.v[k][i][j] * frame(k, a) * ff.n(i) * frame(j, b);
      s += ff.gFinv(a, b) * t;
    }
  Mat sigmaF = frame.transpose() * sigma * frame;
  s += (ff.gFinv * ff.II * ff.gFinv * sigmaF).trace();
  return s;
}

double div_F_oneform(const Vec& alpha, const Mat& dalpha, const ChristoffelJet& cj,
                     const Mat& frame, const FacetFrameG& ff) {
  const int d = cj.dim;
  const int fd = d - 1;
  double s = 0.0;
  for (int a = 0; a < fd; ++a)
    for (int b = 0; b < fd; ++b) {
      double t = 0.0;
      for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j) {
          double nb = dalpha(k, j);
          for (int m = 0; m < d; ++m) nb -= cj.gamma[m][k][j] * alpha(m);
          t += nb * frame(k, a) * frame(j, b);
        }
      s += ff.gFinv(a, b) * t;
    }
  return s;
}

}  // namespace regge::geo
