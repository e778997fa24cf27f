#pragma once

#include "regge/core.hpp"
#include "regge/fields.hpp"
#include "regge/tensor.hpp"

#include <array>

namespace regge::geo {

using fields::ScalarJet;
using fields::TensorJet;

/// Metric 2-jet with the cached derived data every curvature formula needs:
/// inverse, its first and second partials, and the volume density.
struct MetricJet {
  int dim = 0;
  TensorJet g;
  Mat ginv;
  std::array<Mat, 3> dginv;
  std::array<std::array<Mat, 3>, 3> d2ginv;
  double sqrt_det = 0.0;
};

/// Builds the cache; throws if g is not SPD. `context` is prepended to the
/// error message so callers can name the offending cell or parameter value.
MetricJet make_metric_jet(const TensorJet& g, const std::string& context = "");

/// Christoffel symbols of the second kind and their first partials.
/// gamma[k][i][j] = Gamma^k_ij, dgamma[l][k][i][j] = d_l Gamma^k_ij.
struct ChristoffelJet {
  int dim = 0;
  std::array<std::array<std::array<double, 3>, 3>, 3> gamma{};
  std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3> dgamma{};
};

ChristoffelJet christoffel(const MetricJet& mj);

/// Riemann tensor (all indices down), Ricci, scalar and Einstein curvature.
/// Sign convention: riem[i][j][k][l] contracts to +Ric over the first and
/// third indices; the Einstein tensor is returned exactly zero in dim 2.
struct CurvatureData {
  int dim = 0;
  std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3> riem{};
  Mat ric;
  double scalar = 0.0;
  Mat einstein;
};

CurvatureData curvature(const MetricJet& mj, const ChristoffelJet& cj);

/// sigma:Riem:rho with indices raised by the metric.
double sandwich_riemann(const CurvatureData& cv, const MetricJet& mj, const Mat& sigma,
                        const Mat& rho);

/// g-unit vector orthogonal to the span of `frame` columns, oriented along
/// the Euclidean outward normal.
Vec g_unit_normal(const MetricJet& mj, const Vec& euclid_outward_normal);

/// Hypersurface data on a facet with constant tangent frame: induced metric,
/// second fundamental form II(X,Y) = -g(n, nabla_X Y), mean curvature and
/// trace reversal.
struct FacetFrameG {
  Vec n;
  Mat gF, gFinv;
  double sqrt_det_F = 0.0;
  Mat II, IIbar;
  double H = 0.0;
};

FacetFrameG facet_frame_g(const MetricJet& mj, const ChristoffelJet& cj, const Mat& frame,
                          const Vec& euclid_outward_normal);

/// Dihedral angle between the facets with outward g-unit normals n1, n2:
/// arccos of -g(n1,n2), clamped to [-1,1]. Clamp excess is recorded.
double dihedral_angle(const Mat& g, const Vec& n1, const Vec& n2);
double max_arccos_clamp_excess();
void reset_arccos_clamp_monitor();

/// g-unit vector tangent to the facet, g-orthogonal to the ridge tangents,
/// pointing from the ridge toward `toward_facet` (Euclidean direction to the
/// facet vertex opposite the ridge).
Vec conormal_nu(const Mat& g, const Mat& ridge_tangents, const Vec& toward_facet);

// ---- covariant differentiation from exact jets ----

struct Tensor3 {
  int dim = 0;
  std::array<std::array<std::array<double, 3>, 3>, 3> v{};
};

struct Tensor3Jet {
  Tensor3 value;
  std::array<Tensor3, 3> d1;
};

struct Tensor4 {
  int dim = 0;
  std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 3> v{};
};

/// nabla sigma for a (0,2) tensor; new index first. With the 2-jet of sigma
/// the result carries exact first partials.
Tensor3Jet nabla(const TensorJet& sigma, const ChristoffelJet& cj);
Tensor4 nabla(const Tensor3Jet& t, const ChristoffelJet& cj);

/// div sigma = Tr nabla sigma (one-form), from the value of nabla sigma.
Vec divergence(const Tensor3& nabla_sigma, const MetricJet& mj);

/// Delta sigma = div nabla sigma.
Mat laplacian(const Tensor4& nabla2_sigma, const MetricJet& mj);

/// Covariant Hessian of a scalar.
Mat covariant_hessian(const ScalarJet& v, const ChristoffelJet& cj);

/// Trace Tr_g sigma as a scalar jet (needs metric inverse jets).
ScalarJet trace_jet(const TensorJet& sigma, const MetricJet& mj);

/// Product jet s * g.
TensorJet scalar_times_metric(const ScalarJet& s, const MetricJet& mj);

TensorJet J_jet(const TensorJet& sigma, const MetricJet& mj);
TensorJet S_jet(const TensorJet& sigma, const MetricJet& mj);

/// Covariant linearized Einstein operator ein sigma = J df div J sigma
/// - (1/2) Delta J sigma, assembled from exact jets.
Mat ein(const TensorJet& sigma, const MetricJet& mj, const ChristoffelJet& cj);

/// div div S sigma (scalar) and div S sigma (one-form).
double div_div_S(const TensorJet& sigma, const MetricJet& mj, const ChristoffelJet& cj);
Vec div_S(const TensorJet& sigma, const MetricJet& mj, const ChristoffelJet& cj);

/// Surface divergence of the one-form sigma(n,.) along a facet with constant
/// frame: sum_ab gF^{ab} (nabla sigma)(X_a, n, X_b) + <II, sigma|_F>.
double div_F_sigma_n(const Tensor3& nabla_sigma, const Mat& sigma, const Mat& frame,
                     const FacetFrameG& ff);

/// Surface divergence of a one-form alpha (with 1-jet alpha, dalpha packed
/// as a ScalarJet per component is awkward; pass value and Euclidean
/// Jacobian d alpha[j]/d x[i]).
double div_F_oneform(const Vec& alpha, const Mat& dalpha, const ChristoffelJet& cj,
                     const Mat& frame, const FacetFrameG& ff);

}  // namespace regge::geo
