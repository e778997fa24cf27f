#include "regge/functionals.hpp"

#include "regge/geometry.hpp"

#include <cmath>
#include <numbers>

namespace regge::forms {

namespace {

using geo::ChristoffelJet;
using geo::FacetFrameG;
using geo::MetricJet;
using fields::TensorJet;

Vec euclid_outward_normal(const mesh::SimplicialMesh& m, int cell, int fid) {
  const int dim = m.dim;
  const auto& f = m.facets[fid];
  Vec n(dim);
  if (dim == 2) {
    Vec e = m.vertices[f.v[1]] - m.vertices[f.v[0]];
    n << e(1), -e(0);
  } else {
    Vec e1 = m.vertices[f.v[1]] - m.vertices[f.v[0]];
    Vec e2 = m.vertices[f.v[2]] - m.vertices[f.v[0]];
    Eigen::Vector3d a(e1(0), e1(1), e1(2)), b(e2(0), e2(1), e2(2));
    Eigen::Vector3d c = a.cross(b);
    n << c(0), c(1), c(2);
  }
  n.normalize();
  // orient away from the cell vertex opposite the facet
  Vec centroid = Vec::Zero(dim);
  for (int a = 0; a < dim; ++a) centroid += m.vertices[f.v[a]];
  centroid /= dim;
  int opp = -1;
  for (int a = 0; a <= dim; ++a) {
    bool in_facet = false;
    for (int b = 0; b < dim; ++b)
      if (m.cells[cell][a] == f.v[b]) in_facet = true;
    if (!in_facet) opp = m.cells[cell][a];
  }
  if (n.dot(centroid - m.vertices[opp]) < 0.0) n = -n;
  return n;
}

// ---- deterministic entity walks ----

double sum_over_cells(const mesh::SimplicialMesh& m, int degree,
                      const std::function<double(int cell, const Vec& x, double w)>& kernel) {
  const auto rule = quad::simplex_rule(m.dim, degree);
  std::vector<double> slots(m.n_cells(), 0.0);
  parallel_for(m.n_cells(), [&](std::size_t c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= m.dim; ++a) verts[a] = m.cell_vertex(static_cast<int>(c), a);
    Mat J = Mat::Zero(m.dim, m.dim);
    for (int a = 0; a < m.dim; ++a) J.col(a) = verts[a + 1] - verts[0];
    const double absdet = std::abs(J.determinant());
    double acc = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      Vec x = Vec::Zero(m.dim);
      for (int i = 0; i <= m.dim; ++i) x += rule.points[q][i] * verts[i];
      acc += kernel(static_cast<int>(c), x, rule.weights[q] * absdet);
    }
    slots[c] = acc;
  });
  return pairwise_sum(slots);
}

struct FacetSide {
  int cell = -1;
  Vec euclid_normal;
};

struct FacetInfo {
  int fid = -1;
  Mat frame;  // dim x (dim-1), canonical sorted-vertex frame
  int n_sides = 0;
  std::array<FacetSide, 2> sides;
};

// kernel receives the reference weight only; metric area factors are the
// kernel's responsibility (they are side-dependent)
double sum_over_facets(const mesh::SimplicialMesh& m, int degree, bool interior_only,
                       const std::function<double(const FacetInfo&, const Vec& x, double w)>& kernel) {
  const auto rule = quad::simplex_rule(m.dim - 1, degree);
  std::vector<double> slots(m.n_facets(), 0.0);
  parallel_for(m.n_facets(), [&](std::size_t fi) {
    const auto& f = m.facets[fi];
    if (interior_only && f.boundary) return;
    FacetInfo info;
    info.fid = static_cast<int>(fi);
    info.frame = Mat::Zero(m.dim, m.dim - 1);
    for (int a = 0; a < m.dim - 1; ++a)
      info.frame.col(a) = m.vertices[f.v[a + 1]] - m.vertices[f.v[0]];
    info.n_sides = f.n_cells;
    for (int s = 0; s < f.n_cells; ++s) {
      info.sides[s].cell = f.cells[s];
      info.sides[s].euclid_normal = euclid_outward_normal(m, f.cells[s], info.fid);
    }
    double acc = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      Vec x = Vec::Zero(m.dim);
      for (int i = 0; i < m.dim; ++i) x += rule.points[q][i] * m.vertices[f.v[i]];
      acc += kernel(info, x, rule.weights[q]);
    }
    slots[fi] = acc;
  });
  return pairwise_sum(slots);
}

struct RidgeIncidence {
  int cell = -1;
  std::array<int, 2> facets{-1, -1};
  std::array<Vec, 2> euclid_normals;   // outward normals of the two facets w.r.t. cell
  std::array<Vec, 2> toward_facet;     // ridge -> opposite facet vertex
};

struct RidgeInfo {
  int rid = -1;
  Mat frame;  // dim x (dim-2)
  int multiplicity = 2;
  int canonical_cell = -1;
  std::vector<RidgeIncidence> incidences;
};

double sum_over_ridges(const mesh::SimplicialMesh& m, int degree, bool interior_only,
                       const std::function<double(const RidgeInfo&, const Vec& x, double w)>& kernel) {
  const bool point_ridges = (m.dim == 2);
  quad::QuadratureRule rule;
  if (!point_ridges) rule = quad::simplex_rule(m.dim - 2, degree);
  std::vector<double> slots(m.n_ridges(), 0.0);
  parallel_for(m.n_ridges(), [&](std::size_t ri) {
    const auto& r = m.ridges[ri];
    if (interior_only && r.boundary) return;
    RidgeInfo info;
    info.rid = static_cast<int>(ri);
    info.frame = Mat::Zero(m.dim, m.dim - 2);
    for (int a = 0; a < m.dim - 2; ++a)
      info.frame.col(a) = m.vertices[r.v[a + 1]] - m.vertices[r.v[0]];
    info.multiplicity = r.multiplicity();
    info.canonical_cell = r.cells.front();
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
      RidgeIncidence inc;
      inc.cell = r.cells[k];
      inc.facets = r.cell_facets[k];
      for (int s = 0; s < 2; ++s) {
        inc.euclid_normals[s] = euclid_outward_normal(m, inc.cell, inc.facets[s]);
        const auto& f = m.facets[inc.facets[s]];
        int opp = -1;
        for (int a = 0; a < m.dim; ++a) {
          bool in_ridge = false;
          for (int b = 0; b < m.dim - 1; ++b)
            if (f.v[a] == r.v[b]) in_ridge = true;
          if (!in_ridge) opp = f.v[a];
        }
        inc.toward_facet[s] = m.vertices[opp] - m.vertices[r.v[0]];
      }
      info.incidences.push_back(inc);
    }
    double acc = 0.0;
    if (point_ridges) {
      acc = kernel(info, m.vertices[r.v[0]], 1.0);
    } else {
      for (int q = 0; q < rule.size(); ++q) {
        Vec x = Vec::Zero(m.dim);
        for (int i = 0; i < m.dim - 1; ++i) x += rule.points[q][i] * m.vertices[r.v[i]];
        acc += kernel(info, x, rule.weights[q]);
      }
    }
    slots[ri] = acc;
  });
  return pairwise_sum(slots);
}

// ---- pointwise helpers on restricted tensors ----

double tr_rest(const Mat& A, const Mat& gFinv) {
  return A.size() == 0 ? 0.0 : (gFinv * A).trace();
}
double inner_rest(const Mat& A, const Mat& B, const Mat& gFinv) {
  return A.size() == 0 ? 0.0 : (gFinv * A * gFinv * B).trace();
}
double sand_rest(const Mat& A, const Mat& M, const Mat& B, const Mat& gFinv) {
  return A.size() == 0 ? 0.0 : (gFinv * A * gFinv * M * gFinv * B).trace();
}
Mat SF_rest(const Mat& A, const Mat& gF, const Mat& gFinv) {
  return A - tr_rest(A, gFinv) * gF;
}

struct SideEval {
  MetricJet mj;
  ChristoffelJet cj;
  FacetFrameG ff;
};

SideEval eval_side(const CellTensorSource& g, const FacetInfo& fi, int side, const Vec& x) {
  SideEval ev;
  ev.mj = fe::metric_jet_from(g, fi.sides[side].cell, x);
  ev.cj = geo::christoffel(ev.mj);
  ev.ff = geo::facet_frame_g(ev.mj, ev.cj, fi.frame, fi.sides[side].euclid_normal);
  return ev;
}

// angle defect at a ridge point: m_S pi - sum of dihedral angles
double angle_defect(const CellTensorSource& g, const RidgeInfo& ri, const Vec& x) {
  double sum = 0.0;
  for (const auto& inc : ri.incidences) {
    MetricJet mj = fe::metric_jet_from(g, inc.cell, x);
    Vec n0 = geo::g_unit_normal(mj, inc.euclid_normals[0]);
    Vec n1 = geo::g_unit_normal(mj, inc.euclid_normals[1]);
    sum += geo::dihedral_angle(mj.g.value, n0, n1);
  }
  return ri.multiplicity * std::numbers::pi - sum;
}

struct RidgeFramePull {
  Mat gS, gSinv;
  double sqrt_det = 1.0;
};

RidgeFramePull ridge_pull(const Mat& g, const Mat& frame) {
  RidgeFramePull rp;
  rp.gS = frame.transpose() * g * frame;
  if (rp.gS.size() > 0) {
    rp.gSinv = rp.gS.inverse();
    rp.sqrt_det = std::sqrt(rp.gS.determinant());
  } else {
    rp.gSinv = rp.gS;
    rp.sqrt_det = 1.0;
  }
  return rp;
}

Mat restrict_to_frame(const Mat& A, const Mat& frame) { return frame.transpose() * A * frame; }

// (nabla_n sigma)|_F and ((nabla_F sigma)(n,.))|_F in the facet frame
void facet_derivative_terms(const geo::Tensor3& nsig, const Vec& n, const Mat& frame, Mat& dn_F,
                            Mat& dFn_F) {
  const int d = nsig.dim;
  const int fd = d - 1;
  dn_F = Mat::Zero(fd, fd);
  dFn_F = Mat::Zero(fd, fd);
  for (int a = 0; a < fd; ++a)
    for (int b = 0; b < fd; ++b) {
      double s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            s1 += n(k) * nsig.v[k][i][j] * frame(i, a) * frame(j, b);
            s2 += nsig.v[k][i][j] * frame(k, a) * n(i) * frame(j, b);
          }
      dn_F(a, b) = s1;
      dFn_F(a, b) = s2;
    }
}

double sigma_nn(const Mat& sigma, const Vec& n) { return n.dot(sigma * n); }

}  // namespace

PairingReport pair_einstein_dist(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                                 const CellTensorSource& rho, const QuadConfig& qc,
                                 bool interior_only) {
  PairingReport rep;
  rep.volume_part = sum_over_cells(m, qc.volume_degree, [&](int c, const Vec& x, double w) {
    MetricJet mj = fe::metric_jet_from(g, c, x);
    ChristoffelJet cj = geo::christoffel(mj);
    geo::CurvatureData cv = geo::curvature(mj, cj);
    Mat rhov = rho.jet(c, x).value;
    return w * mj.sqrt_det * (mj.ginv * cv.einstein * mj.ginv * rhov).trace();
  });
  rep.facet_part =
      sum_over_facets(m, qc.facet_degree, interior_only, [&](const FacetInfo& fi, const Vec& x, double w) {
        double acc = 0.0;
        for (int s = 0; s < fi.n_sides; ++s) {
          SideEval ev = eval_side(g, fi, s, x);
          Mat rhoF = restrict_to_frame(rho.jet(fi.sides[s].cell, x).value, fi.frame);
          acc += w * ev.ff.sqrt_det_F * inner_rest(ev.ff.IIbar, rhoF, ev.ff.gFinv);
        }
        return acc;
      });
  rep.ridge_part =
      sum_over_ridges(m, qc.ridge_degree, interior_only, [&](const RidgeInfo& ri, const Vec& x, double w) {
        double theta = angle_defect(g, ri, x);
        MetricJet mj = fe::metric_jet_from(g, ri.canonical_cell, x);
        RidgeFramePull rp = ridge_pull(mj.g.value, ri.frame);
        Mat rhoS = restrict_to_frame(rho.jet(ri.canonical_cell, x).value, ri.frame);
        return -w * rp.sqrt_det * theta * tr_rest(rhoS, rp.gSinv);
      });
  rep.total = rep.volume_part + rep.facet_part + rep.ridge_part;
  return rep;
}

PairingReport pair_scalar_dist(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                               const ScalarField& v, const QuadConfig& qc) {
  PairingReport rep;
  rep.volume_part = sum_over_cells(m, qc.volume_degree, [&](int c, const Vec& x, double w) {
    MetricJet mj = fe::metric_jet_from(g, c, x);
    ChristoffelJet cj = geo::christoffel(mj);
    geo::CurvatureData cv = geo::curvature(mj, cj);
    return w * mj.sqrt_det * cv.scalar * v.value(x);
  });
  rep.facet_part =
      sum_over_facets(m, qc.facet_degree, false, [&](const FacetInfo& fi, const Vec& x, double w) {
        double acc = 0.0;
        for (int s = 0; s < fi.n_sides; ++s) {
          SideEval ev = eval_side(g, fi, s, x);
          acc += 2.0 * w * ev.ff.sqrt_det_F * ev.ff.H * v.value(x);
        }
        return acc;
      });
  rep.ridge_part =
      sum_over_ridges(m, qc.ridge_degree, false, [&](const RidgeInfo& ri, const Vec& x, double w) {
        double theta = angle_defect(g, ri, x);
        MetricJet mj = fe::metric_jet_from(g, ri.canonical_cell, x);
        RidgeFramePull rp = ridge_pull(mj.g.value, ri.frame);
        return 2.0 * w * rp.sqrt_det * theta * v.value(x);
      });
  rep.total = rep.volume_part + rep.facet_part + rep.ridge_part;
  return rep;
}

double pair_classical(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                      const CellTensorSource& rho, const QuadConfig& qc) {
  return sum_over_cells(m, qc.volume_degree, [&](int c, const Vec& x, double w) {
    MetricJet mj = fe::metric_jet_from(g, c, x);
    ChristoffelJet cj = geo::christoffel(mj);
    geo::CurvatureData cv = geo::curvature(mj, cj);
    Mat rhov = rho.jet(c, x).value;
    return w * mj.sqrt_det * (mj.ginv * cv.einstein * mj.ginv * rhov).trace();
  });
}

double bilinear_Ah(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                   const CellTensorSource& sigma, const CellTensorSource& rho,
                   const QuadConfig& qc, bool interior_only) {
  double vol = sum_over_cells(m, qc.volume_degree, [&](int c, const Vec& x, double w) {
    MetricJet mj = fe::metric_jet_from(g, c, x);
    ChristoffelJet cj = geo::christoffel(mj);
    geo::CurvatureData cv = geo::curvature(mj, cj);
    Mat sv = sigma.jet(c, x).value;
    Mat rv = rho.jet(c, x).value;
    auto inner = [&](const Mat& A, const Mat& B) { return (mj.ginv * A * mj.ginv * B).trace(); };
    double trs = (mj.ginv * sv).trace();
    double trr = (mj.ginv * rv).trace();
    Mat jsig = sv - 0.5 * trs * mj.g.value;
    double val = 2.0 * geo::sandwich_riemann(cv, mj, sv, rv) + inner(cv.ric, sv) * trr +
                 inner(cv.ric, rv) * trs + cv.scalar * inner(jsig, rv) -
                 2.0 * (mj.ginv * sv * mj.ginv * cv.ric * mj.ginv * rv).trace();
    return 0.5 * w * mj.sqrt_det * val;
  });
  double fac =
      sum_over_facets(m, qc.facet_degree, interior_only, [&](const FacetInfo& fi, const Vec& x, double w) {
        double acc = 0.0;
        for (int s = 0; s < fi.n_sides; ++s) {
          SideEval ev = eval_side(g, fi, s, x);
          Mat sF = restrict_to_frame(sigma.jet(fi.sides[s].cell, x).value, fi.frame);
          Mat rF = restrict_to_frame(rho.jet(fi.sides[s].cell, x).value, fi.frame);
          const Mat& gFinv = ev.ff.gFinv;
          double val = -3.0 * sand_rest(sF, ev.ff.IIbar, rF, gFinv) +
                       inner_rest(ev.ff.IIbar, sF, gFinv) * tr_rest(rF, gFinv) +
                       tr_rest(sF, gFinv) * inner_rest(ev.ff.IIbar, rF, gFinv) -
                       ev.ff.H * inner_rest(SF_rest(sF, ev.ff.gF, gFinv), rF, gFinv);
          acc += 0.5 * w * ev.ff.sqrt_det_F * val;
        }
        return acc;
      });
  double rid =
      sum_over_ridges(m, qc.ridge_degree, interior_only, [&](const RidgeInfo& ri, const Vec& x, double w) {
        double theta = angle_defect(g, ri, x);
        MetricJet mj = fe::metric_jet_from(g, ri.canonical_cell, x);
        RidgeFramePull rp = ridge_pull(mj.g.value, ri.frame);
        Mat sS = restrict_to_frame(sigma.jet(ri.canonical_cell, x).value, ri.frame);
        Mat rS = restrict_to_frame(rho.jet(ri.canonical_cell, x).value, ri.frame);
        double val = 2.0 * theta * inner_rest(sS, rS, rp.gSinv) -
                     theta * tr_rest(sS, rp.gSinv) * tr_rest(rS, rp.gSinv);
        return 0.5 * w * rp.sqrt_det * val;
      });
  return vol + fac + rid;
}

double bilinear_Bh(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                   const CellTensorSource& sigma, const CellTensorSource& rho,
                   const QuadConfig& qc, BhForm form, bool interior_only) {
  double vol = sum_over_cells(m, qc.volume_degree, [&](int c, const Vec& x, double w) {
    MetricJet mj = fe::metric_jet_from(g, c, x);
    ChristoffelJet cj = geo::christoffel(mj);
    TensorJet sj = sigma.jet(c, x);
    Mat es = geo::ein(sj, mj, cj);
    Mat rv = rho.jet(c, x).value;
    return w * mj.sqrt_det * (mj.ginv * es * mj.ginv * rv).trace();
  });
  double fac =
      sum_over_facets(m, qc.facet_degree, interior_only, [&](const FacetInfo& fi, const Vec& x, double w) {
        double acc = 0.0;
        for (int s = 0; s < fi.n_sides; ++s) {
          SideEval ev = eval_side(g, fi, s, x);
          TensorJet sj = sigma.jet(fi.sides[s].cell, x);
          geo::Tensor3Jet nsig = geo::nabla(sj, ev.cj);
          Mat dn_F, dFn_F;
          facet_derivative_terms(nsig.value, ev.ff.n, fi.frame, dn_F, dFn_F);
          Mat sF = restrict_to_frame(sj.value, fi.frame);
          Mat rF = restrict_to_frame(rho.jet(fi.sides[s].cell, x).value, fi.frame);
          const Mat& gFinv = ev.ff.gFinv;
          const double snn = sigma_nn(sj.value, ev.ff.n);
          double val;
          if (form == BhForm::expanded) {
            Mat bracket = snn * ev.ff.IIbar + SF_rest(dn_F - 2.0 * dFn_F, ev.ff.gF, gFinv);
            val = inner_rest(bracket, rF, gFinv) + inner_rest(sF, ev.ff.II, gFinv) * tr_rest(rF, gFinv) -
                  sand_rest(sF, ev.ff.II, rF, gFinv);
          } else {
            // nabla_F(sigma(n,.))|_F = (nabla_F sigma)(n,.)|_F + II gF^-1 sigmaF
            Mat weingarten_term = ev.ff.II * gFinv * sF;
            Mat bracket = snn * ev.ff.II + dn_F - 2.0 * dFn_F - weingarten_term;
            val = inner_rest(SF_rest(bracket, ev.ff.gF, gFinv), rF, gFinv);
          }
          acc += 0.5 * w * ev.ff.sqrt_det_F * val;
        }
        return acc;
      });
  double rid =
      sum_over_ridges(m, qc.ridge_degree, interior_only, [&](const RidgeInfo& ri, const Vec& x, double w) {
        MetricJet mj_can = fe::metric_jet_from(g, ri.canonical_cell, x);
        RidgeFramePull rp = ridge_pull(mj_can.g.value, ri.frame);
        Mat rS = restrict_to_frame(rho.jet(ri.canonical_cell, x).value, ri.frame);
        double trr = tr_rest(rS, rp.gSinv);
        double jump_sum = 0.0;
        for (const auto& inc : ri.incidences) {
          MetricJet mj = fe::metric_jet_from(g, inc.cell, x);
          Mat sv = sigma.jet(inc.cell, x).value;
          for (int s = 0; s < 2; ++s) {
            Vec n = geo::g_unit_normal(mj, inc.euclid_normals[s]);
            // outward conormal of the facet boundary across S; this is the
            // orientation for which the angle-defect derivative identity and
            // b_h(sigma, 1) = 0 hold
            Vec nu = -geo::conormal_nu(mj.g.value, ri.frame, inc.toward_facet[s]);
            jump_sum += n.dot(sv * nu);
          }
        }
        return -0.5 * w * rp.sqrt_det * jump_sum * trr;
      });
  return vol + fac + rid;
}

double bilinear_ah(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                   const CellTensorSource& sigma, const ScalarField& v, const QuadConfig& qc) {
  double vol = sum_over_cells(m, qc.volume_degree, [&](int c, const Vec& x, double w) {
    MetricJet mj = fe::metric_jet_from(g, c, x);
    ChristoffelJet cj = geo::christoffel(mj);
    geo::CurvatureData cv = geo::curvature(mj, cj);
    Mat sv = sigma.jet(c, x).value;
    return w * mj.sqrt_det * (mj.ginv * cv.einstein * mj.ginv * sv).trace() * v.value(x);
  });
  double fac = sum_over_facets(m, qc.facet_degree, false,
                               [&](const FacetInfo& fi, const Vec& x, double w) {
                                 double acc = 0.0;
                                 for (int s = 0; s < fi.n_sides; ++s) {
                                   SideEval ev = eval_side(g, fi, s, x);
                                   Mat sF = restrict_to_frame(sigma.jet(fi.sides[s].cell, x).value,
                                                              fi.frame);
                                   acc += w * ev.ff.sqrt_det_F *
                                          inner_rest(ev.ff.IIbar, sF, ev.ff.gFinv) * v.value(x);
                                 }
                                 return acc;
                               });
  double rid = sum_over_ridges(m, qc.ridge_degree, false,
                               [&](const RidgeInfo& ri, const Vec& x, double w) {
                                 double theta = angle_defect(g, ri, x);
                                 MetricJet mj = fe::metric_jet_from(g, ri.canonical_cell, x);
                                 RidgeFramePull rp = ridge_pull(mj.g.value, ri.frame);
                                 Mat sS = restrict_to_frame(sigma.jet(ri.canonical_cell, x).value,
                                                            ri.frame);
                                 return -w * rp.sqrt_det * theta * tr_rest(sS, rp.gSinv) * v.value(x);
                               });
  return vol + fac + rid;
}

double bilinear_bh(const mesh::SimplicialMesh& m, const CellTensorSource& g,
                   const CellTensorSource& sigma, const ScalarField& v, const QuadConfig& qc,
                   BhScalarForm form) {
  if (form == BhScalarForm::hessian) {
    double vol = sum_over_cells(m, qc.volume_degree, [&](int c, const Vec& x, double w) {
      MetricJet mj = fe::metric_jet_from(g, c, x);
      ChristoffelJet cj = geo::christoffel(mj);
      TensorJet sj = sigma.jet(c, x);
      Mat ssig = sj.value - (mj.ginv * sj.value).trace() * mj.g.value;
      Mat hess = geo::covariant_hessian(v.jet(x), cj);
      return w * mj.sqrt_det * (mj.ginv * ssig * mj.ginv * hess).trace();
    });
    double fac = sum_over_facets(
        m, qc.facet_degree, false, [&](const FacetInfo& fi, const Vec& x, double w) {
          double acc = 0.0;
          fields::ScalarJet vj = v.jet(x);
          for (int s = 0; s < fi.n_sides; ++s) {
            SideEval ev = eval_side(g, fi, s, x);
            Mat sv = sigma.jet(fi.sides[s].cell, x).value;
            double snn_S = sigma_nn(sv, ev.ff.n) - (ev.mj.ginv * sv).trace();  // (S sigma)(n,n)
            acc += -w * ev.ff.sqrt_det_F * snn_S * ev.ff.n.dot(vj.grad);
          }
          return acc;
        });
    return vol + fac;
  }

  double vol = sum_over_cells(m, qc.volume_degree, [&](int c, const Vec& x, double w) {
    MetricJet mj = fe::metric_jet_from(g, c, x);
    ChristoffelJet cj = geo::christoffel(mj);
    TensorJet sj = sigma.jet(c, x);
    return w * mj.sqrt_det * geo::div_div_S(sj, mj, cj) * v.value(x);
  });
  double fac = sum_over_facets(
      m, qc.facet_degree, false, [&](const FacetInfo& fi, const Vec& x, double w) {
        double acc = 0.0;
        for (int s = 0; s < fi.n_sides; ++s) {
          SideEval ev = eval_side(g, fi, s, x);
          TensorJet sj = sigma.jet(fi.sides[s].cell, x);
          geo::Tensor3Jet nsig = geo::nabla(sj, ev.cj);
          Vec divS = geo::div_S(sj, ev.mj, ev.cj);
          double term = divS.dot(ev.ff.n);  // one-form applied to the vector n
          term += geo::div_F_sigma_n(nsig.value, sj.value, fi.frame, ev.ff);
          term -= ev.ff.H * sigma_nn(sj.value, ev.ff.n);
          acc += -w * ev.ff.sqrt_det_F * term * v.value(x);
        }
        return acc;
      });
  double rid = sum_over_ridges(
      m, qc.ridge_degree, false, [&](const RidgeInfo& ri, const Vec& x, double w) {
        MetricJet mj_can = fe::metric_jet_from(g, ri.canonical_cell, x);
        RidgeFramePull rp = ridge_pull(mj_can.g.value, ri.frame);
        double jump_sum = 0.0;
        for (const auto& inc : ri.incidences) {
          MetricJet mj = fe::metric_jet_from(g, inc.cell, x);
          Mat sv = sigma.jet(inc.cell, x).value;
          for (int s = 0; s < 2; ++s) {
            Vec n = geo::g_unit_normal(mj, inc.euclid_normals[s]);
            // outward conormal of the facet boundary across S; this is the
            // orientation for which the angle-defect derivative identity and
            // b_h(sigma, 1) = 0 hold
            Vec nu = -geo::conormal_nu(mj.g.value, ri.frame, inc.toward_facet[s]);
            jump_sum += n.dot(sv * nu);
          }
        }
        return w * rp.sqrt_det * jump_sum * v.value(x);
      });
  return vol + fac + rid;
}

EvolutionCheck evolution_check(const mesh::SimplicialMesh& m,
                               std::shared_ptr<const CellTensorSource> g_base,
                               std::shared_ptr<const CellTensorSource> sigma,
                               const CellTensorSource& rho, double t, double dt,
                               const QuadConfig& qc, bool interior_only) {
  AffineSource plus(g_base, sigma, t + dt);
  AffineSource minus(g_base, sigma, t - dt);
  AffineSource mid(g_base, sigma, t);
  EvolutionCheck out;
  double pp = pair_einstein_dist(m, plus, rho, qc, interior_only).total;
  double pm = pair_einstein_dist(m, minus, rho, qc, interior_only).total;
  out.fd_derivative = (pp - pm) / (2.0 * dt);
  out.forms_value = bilinear_Bh(m, mid, *sigma, rho, qc, BhForm::expanded, interior_only) +
                    bilinear_Ah(m, mid, *sigma, rho, qc, interior_only);
  out.residual = std::abs(out.fd_derivative - out.forms_value);
  return out;
}

double error_pairing(const mesh::SimplicialMesh& m, std::shared_ptr<const CellTensorSource> g,
                     std::shared_ptr<const CellTensorSource> gh, const CellTensorSource& rho,
                     int n_gauss, const QuadConfig& qc, bool interior_only) {
  auto sigma = std::make_shared<fe::DifferenceSource>(gh, g);
  auto rule = quad::gauss_legendre_01(n_gauss);
  double total = 0.0;
  for (int q = 0; q < n_gauss; ++q) {
    fe::ConvexCombinationSource gt(g, gh, rule.points[q]);
    total += rule.weights[q] * (bilinear_Bh(m, gt, *sigma, rho, qc, BhForm::expanded, interior_only) +
                                bilinear_Ah(m, gt, *sigma, rho, qc, interior_only));
  }
  return total;
}

std::array<double, 3> codim2_functionals(const mesh::SimplicialMesh& m,
                                         std::shared_ptr<const CellTensorSource> g,
                                         std::shared_ptr<const CellTensorSource> gh,
                                         const CellTensorSource& rho, int n_gauss,
                                         const QuadConfig& qc) {
  auto sigma = std::make_shared<fe::DifferenceSource>(gh, g);
  auto rule = quad::gauss_legendre_01(n_gauss);
  double f1 = 0.0, f2 = 0.0;
  for (int q = 0; q < n_gauss; ++q) {
    fe::ConvexCombinationSource gt(g, gh, rule.points[q]);
    double f1_t = sum_over_ridges(
        m, qc.ridge_degree, true, [&](const RidgeInfo& ri, const Vec& x, double w) {
          MetricJet mj_can = fe::metric_jet_from(gt, ri.canonical_cell, x);
          RidgeFramePull rp = ridge_pull(mj_can.g.value, ri.frame);
          Mat sS = restrict_to_frame(sigma->jet(ri.canonical_cell, x).value, ri.frame);
          double trs = tr_rest(sS, rp.gSinv);
          double jump_sum = 0.0;
          for (const auto& inc : ri.incidences) {
            MetricJet mj = fe::metric_jet_from(gt, inc.cell, x);
            Mat rv = rho.jet(inc.cell, x).value;
            for (int s = 0; s < 2; ++s) {
              Vec n = geo::g_unit_normal(mj, inc.euclid_normals[s]);
              Vec nu = -geo::conormal_nu(mj.g.value, ri.frame, inc.toward_facet[s]);
              jump_sum += n.dot(rv * nu);
            }
          }
          return -0.5 * w * rp.sqrt_det * jump_sum * trs;
        });
    double f2_t = sum_over_ridges(
        m, qc.ridge_degree, true, [&](const RidgeInfo& ri, const Vec& x, double w) {
          double theta = angle_defect(gt, ri, x);
          MetricJet mj = fe::metric_jet_from(gt, ri.canonical_cell, x);
          RidgeFramePull rp = ridge_pull(mj.g.value, ri.frame);
          Mat sS = restrict_to_frame(sigma->jet(ri.canonical_cell, x).value, ri.frame);
          Mat rS = restrict_to_frame(rho.jet(ri.canonical_cell, x).value, ri.frame);
          double val = 2.0 * theta * inner_rest(sS, rS, rp.gSinv) -
                       theta * tr_rest(sS, rp.gSinv) * tr_rest(rS, rp.gSinv);
          return 0.5 * w * rp.sqrt_det * val;
        });
    f1 += rule.weights[q] * f1_t;
    f2 += rule.weights[q] * f2_t;
  }
  return {f1, f2, f1 + f2};
}

double apply_point_functional(const PointFunctional& f, const TensorField& rho) {
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    terms[i] = (f[i].W.array() * rho.value(f[i].x).array()).sum();
  return pairwise_sum(terms);
}

PointFunctional einstein_error_functional(const mesh::SimplicialMesh& m,
                                          const CellTensorSource& g, const CellTensorSource& gh,
                                          const QuadConfig& qc) {
  PointFunctional out;
  const auto vol_rule = quad::simplex_rule(m.dim, qc.volume_degree);

  for (int c = 0; c < m.n_cells(); ++c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= m.dim; ++a) verts[a] = m.cell_vertex(c, a);
    Mat J = Mat::Zero(m.dim, m.dim);
    for (int a = 0; a < m.dim; ++a) J.col(a) = verts[a + 1] - verts[0];
    const double absdet = std::abs(J.determinant());
    for (int q = 0; q < vol_rule.size(); ++q) {
      Vec x = Vec::Zero(m.dim);
      for (int i = 0; i <= m.dim; ++i) x += vol_rule.points[q][i] * verts[i];
      const double w = vol_rule.weights[q] * absdet;
      MetricJet mh = fe::metric_jet_from(gh, c, x);
      geo::CurvatureData cvh = geo::curvature(mh, geo::christoffel(mh));
      MetricJet mg = fe::metric_jet_from(g, c, x);
      geo::CurvatureData cvg = geo::curvature(mg, geo::christoffel(mg));
      Mat W = w * (mh.sqrt_det * (mh.ginv * cvh.einstein * mh.ginv) -
                   mg.sqrt_det * (mg.ginv * cvg.einstein * mg.ginv));
      out.push_back({c, x, W});
    }
  }

  const auto fac_rule = quad::simplex_rule(m.dim - 1, qc.facet_degree);
  for (int fi = 0; fi < m.n_facets(); ++fi) {
    const auto& f = m.facets[fi];
    FacetInfo info;
    info.fid = fi;
    info.frame = Mat::Zero(m.dim, m.dim - 1);
    for (int a = 0; a < m.dim - 1; ++a)
      info.frame.col(a) = m.vertices[f.v[a + 1]] - m.vertices[f.v[0]];
    info.n_sides = f.n_cells;
    for (int s = 0; s < f.n_cells; ++s) {
      info.sides[s].cell = f.cells[s];
      info.sides[s].euclid_normal = euclid_outward_normal(m, f.cells[s], fi);
    }
    for (int q = 0; q < fac_rule.size(); ++q) {
      Vec x = Vec::Zero(m.dim);
      for (int i = 0; i < m.dim; ++i) x += fac_rule.points[q][i] * m.vertices[f.v[i]];
      for (int s = 0; s < info.n_sides; ++s) {
        SideEval ev = eval_side(gh, info, s, x);
        Mat M = ev.ff.gFinv * ev.ff.IIbar * ev.ff.gFinv;
        Mat W = fac_rule.weights[q] * ev.ff.sqrt_det_F * (info.frame * M * info.frame.transpose());
        out.push_back({info.sides[s].cell, x, W});
      }
    }
  }

  const bool point_ridges = (m.dim == 2);
  quad::QuadratureRule rid_rule;
  if (!point_ridges) rid_rule = quad::simplex_rule(m.dim - 2, qc.ridge_degree);
  for (int ri = 0; ri < m.n_ridges(); ++ri) {
    const auto& r = m.ridges[ri];
    RidgeInfo info;
    info.rid = ri;
    info.frame = Mat::Zero(m.dim, m.dim - 2);
    for (int a = 0; a < m.dim - 2; ++a)
      info.frame.col(a) = m.vertices[r.v[a + 1]] - m.vertices[r.v[0]];
    info.multiplicity = r.multiplicity();
    info.canonical_cell = r.cells.front();
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
      RidgeIncidence inc;
      inc.cell = r.cells[k];
      inc.facets = r.cell_facets[k];
      for (int s = 0; s < 2; ++s)
        inc.euclid_normals[s] = euclid_outward_normal(m, inc.cell, inc.facets[s]);
      info.incidences.push_back(inc);
    }
    const int nq = point_ridges ? 1 : rid_rule.size();
    for (int q = 0; q < nq; ++q) {
      Vec x;
      double wq;
      if (point_ridges) {
        x = m.vertices[r.v[0]];
        wq = 1.0;
      } else {
        x = Vec::Zero(m.dim);
        for (int i = 0; i < m.dim - 1; ++i) x += rid_rule.points[q][i] * m.vertices[r.v[i]];
        wq = rid_rule.weights[q];
      }
      double theta = angle_defect(gh, info, x);
      MetricJet mj = fe::metric_jet_from(gh, info.canonical_cell, x);
      RidgeFramePull rp = ridge_pull(mj.g.value, info.frame);
      if (info.frame.cols() == 0) continue;  // empty pullback pairs to zero
      Mat W = -wq * rp.sqrt_det * theta * (info.frame * rp.gSinv * info.frame.transpose());
      out.push_back({info.canonical_cell, x, W});
    }
  }
  return out;
}

PointFunctional codim2_point_functional(const mesh::SimplicialMesh& m,
                                        std::shared_ptr<const CellTensorSource> g,
                                        std::shared_ptr<const CellTensorSource> gh, int n_gauss,
                                        const QuadConfig& qc, Codim2Part part) {
  auto sigma = std::make_shared<fe::DifferenceSource>(gh, g);
  auto trule = quad::gauss_legendre_01(n_gauss);
  PointFunctional out;
  require(m.dim == 3, "codim2_point_functional: ridge functionals need dim 3");
  const auto rid_rule = quad::simplex_rule(1, qc.ridge_degree);

  for (int ri = 0; ri < m.n_ridges(); ++ri) {
    const auto& r = m.ridges[ri];
    if (r.boundary) continue;
    RidgeInfo info;
    info.rid = ri;
    info.frame = Mat::Zero(m.dim, 1);
    info.frame.col(0) = m.vertices[r.v[1]] - m.vertices[r.v[0]];
    info.multiplicity = 2;
    info.canonical_cell = r.cells.front();
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
      RidgeIncidence inc;
      inc.cell = r.cells[k];
      inc.facets = r.cell_facets[k];
      for (int s = 0; s < 2; ++s) {
        inc.euclid_normals[s] = euclid_outward_normal(m, inc.cell, inc.facets[s]);
        const auto& f = m.facets[inc.facets[s]];
        int opp = -1;
        for (int a = 0; a < m.dim; ++a) {
          bool in_ridge = false;
          for (int b = 0; b < m.dim - 1; ++b)
            if (f.v[a] == r.v[b]) in_ridge = true;
          if (!in_ridge) opp = f.v[a];
        }
        inc.toward_facet[s] = m.vertices[opp] - m.vertices[r.v[0]];
      }
      info.incidences.push_back(inc);
    }

    for (int q = 0; q < rid_rule.size(); ++q) {
      Vec x = Vec::Zero(m.dim);
      for (int i = 0; i < 2; ++i) x += rid_rule.points[q][i] * m.vertices[r.v[i]];
      Mat W = Mat::Zero(m.dim, m.dim);
      for (int tq = 0; tq < n_gauss; ++tq) {
        auto gt = std::make_shared<fe::ConvexCombinationSource>(g, gh, trule.points[tq]);
        MetricJet mj_can = fe::metric_jet_from(*gt, info.canonical_cell, x);
        RidgeFramePull rp = ridge_pull(mj_can.g.value, info.frame);
        Mat sS = restrict_to_frame(sigma->jet(info.canonical_cell, x).value, info.frame);
        const double wt = trule.weights[tq] * rid_rule.weights[q] * rp.sqrt_det;
        if (part == Codim2Part::F1 || part == Codim2Part::F3) {
          double trs = tr_rest(sS, rp.gSinv);
          Mat nsum = Mat::Zero(m.dim, m.dim);
          for (const auto& inc : info.incidences) {
            MetricJet mj = fe::metric_jet_from(*gt, inc.cell, x);
            for (int s = 0; s < 2; ++s) {
              Vec n = geo::g_unit_normal(mj, inc.euclid_normals[s]);
              Vec nu = -geo::conormal_nu(mj.g.value, info.frame, inc.toward_facet[s]);
              nsum += 0.5 * (n * nu.transpose() + nu * n.transpose());
            }
          }
          W += -0.5 * wt * trs * nsum;
        }
        if (part == Codim2Part::F2 || part == Codim2Part::F3) {
          Mat inner_w = info.frame * (rp.gSinv * sS * rp.gSinv) * info.frame.transpose();
          Mat trace_w = info.frame * rp.gSinv * info.frame.transpose();
          double theta = angle_defect(*gt, info, x);
          double trs = tr_rest(sS, rp.gSinv);
          W += 0.5 * wt * theta * (2.0 * inner_w - trs * trace_w);
        }
      }
      out.push_back({info.canonical_cell, x, W});
    }
  }
  return out;
}

}  // namespace regge::forms
