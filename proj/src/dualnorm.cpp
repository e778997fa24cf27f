#include "regge/dualnorm.hpp"

#include "regge/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>

namespace regge::dual {

namespace {

void enumerate_exponents(int dim, int degree, std::vector<std::array<int, 4>>& out) {
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

double eval_bary_monomial(const std::array<int, 4>& e, const std::array<double, 4>& lambda,
                          int dim) {
  double v = 1.0;
  for (int i = 0; i <= dim; ++i)
    for (int p = 0; p < e[i]; ++p) v *= lambda[i];
  return v;
}

}  // namespace

LagrangeSpace::LagrangeSpace(const mesh::SimplicialMesh& m, int order)
    : mesh_(&m), order_(order) {
  require(order >= 1, "LagrangeSpace: order must be >= 1");
  require(m.connectivity_built, "LagrangeSpace: connectivity not built");
  const int dim = m.dim;
  enumerate_exponents(dim, order, ref_exponents_);
  const int nloc = static_cast<int>(ref_exponents_.size());

  // nodal coefficients in the barycentric-monomial basis: V(i,j) =
  // mono_j(node_i), nodes at lattice points alpha/p; same on every cell
  Eigen::MatrixXd V(nloc, nloc);
  for (int i = 0; i < nloc; ++i) {
    std::array<double, 4> lambda{0, 0, 0, 0};
    for (int k = 0; k <= dim; ++k) lambda[k] = static_cast<double>(ref_exponents_[i][k]) / order;
    for (int j = 0; j < nloc; ++j) V(i, j) = eval_bary_monomial(ref_exponents_[j], lambda, dim);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  require(lu.isInvertible(), "LagrangeSpace: nodal Vandermonde singular");
  coeffs_ = lu.inverse();  // basis_i = sum_j coeffs_(j,i) mono_j

  // global numbering by (supporting vertex set, exponents sorted by vertex)
  std::map<std::vector<std::pair<int, int>>, int> node_ids;
  cell_nodes_.assign(m.n_cells(), std::vector<int>(nloc, -1));
  std::vector<std::vector<std::pair<int, int>>> node_keys;
  for (int c = 0; c < m.n_cells(); ++c) {
    for (int i = 0; i < nloc; ++i) {
      std::vector<std::pair<int, int>> key;
      for (int k = 0; k <= dim; ++k)
        if (ref_exponents_[i][k] > 0) key.push_back({m.cells[c][k], ref_exponents_[i][k]});
      std::sort(key.begin(), key.end());
      auto [it, inserted] = node_ids.try_emplace(key, n_nodes_);
      if (inserted) {
        node_keys.push_back(key);
        ++n_nodes_;
      }
      cell_nodes_[c][i] = it->second;
    }
  }

  // boundary nodes: support vertex set contained in a boundary facet
  std::vector<std::vector<int>> vertex_bfacets(m.n_vertices());
  for (int f = 0; f < m.n_facets(); ++f)
    if (m.facets[f].boundary)
      for (int a = 0; a < dim; ++a) vertex_bfacets[m.facets[f].v[a]].push_back(f);
  equation_.assign(n_nodes_, -1);
  std::vector<bool> on_boundary(n_nodes_, false);
  for (int node = 0; node < n_nodes_; ++node) {
    const auto& key = node_keys[node];
    for (int f : vertex_bfacets[key.front().first]) {
      bool subset = true;
      for (const auto& [vid, exp] : key) {
        bool found = false;
        for (int a = 0; a < dim; ++a)
          if (m.facets[f].v[a] == vid) found = true;
        if (!found) subset = false;
      }
      if (subset) {
        on_boundary[node] = true;
        break;
      }
    }
  }
  for (int node = 0; node < n_nodes_; ++node)
    if (!on_boundary[node]) equation_[node] = n_free_++;

  geom_.reserve(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= dim; ++a) verts[a] = m.cell_vertex(c, a);
    geom_.push_back(poly::simplex_geometry(dim, verts));
  }
}

void LagrangeSpace::eval_basis(int cell, const Vec& x, std::vector<double>& values) const {
  const int dim = mesh_->dim;
  const int nloc = local_size();
  const auto lambda = geom_[cell].bary_from_point(x);
  std::vector<double> mono(nloc);
  for (int j = 0; j < nloc; ++j) mono[j] = eval_bary_monomial(ref_exponents_[j], lambda, dim);
  values.assign(nloc, 0.0);
  for (int i = 0; i < nloc; ++i)
    for (int j = 0; j < nloc; ++j) values[i] += coeffs_(j, i) * mono[j];
}

void LagrangeSpace::eval_basis_jet(int cell, const Vec& x, std::vector<double>& values,
                                   std::vector<Vec>& grads, std::vector<Mat>& hessians) const {
  const int dim = mesh_->dim;
  const int nloc = local_size();
  const auto& g = geom_[cell];
  const auto lambda = g.bary_from_point(x);

  auto pw = [&](int i, int p) {
    if (p < 0) return 0.0;
    double v = 1.0;
    for (int k = 0; k < p; ++k) v *= lambda[i];
    return v;
  };

  std::vector<double> mono(nloc);
  std::vector<Vec> mono_g(nloc, Vec::Zero(dim));
  std::vector<Mat> mono_h(nloc, Mat::Zero(dim, dim));
  for (int j = 0; j < nloc; ++j) {
    const auto& e = ref_exponents_[j];
    mono[j] = eval_bary_monomial(e, lambda, dim);
    for (int i = 0; i <= dim; ++i) {
      if (e[i] == 0) continue;
      double t = e[i] * pw(i, e[i] - 1);
      for (int k = 0; k <= dim; ++k)
        if (k != i) t *= pw(k, e[k]);
      mono_g[j] += t * g.bary_grad[i];
    }
    for (int i = 0; i <= dim; ++i)
      for (int k = 0; k <= dim; ++k) {
        double t;
        if (i == k) {
          if (e[i] < 2) continue;
          t = static_cast<double>(e[i]) * (e[i] - 1) * pw(i, e[i] - 2);
          for (int q = 0; q <= dim; ++q)
            if (q != i) t *= pw(q, e[q]);
        } else {
          if (e[i] == 0 || e[k] == 0) continue;
          t = static_cast<double>(e[i]) * e[k] * pw(i, e[i] - 1) * pw(k, e[k] - 1);
          for (int q = 0; q <= dim; ++q)
            if (q != i && q != k) t *= pw(q, e[q]);
        }
        mono_h[j] += t * (g.bary_grad[i] * g.bary_grad[k].transpose());
      }
  }

  values.assign(nloc, 0.0);
  grads.assign(nloc, Vec::Zero(dim));
  hessians.assign(nloc, Mat::Zero(dim, dim));
  for (int i = 0; i < nloc; ++i)
    for (int j = 0; j < nloc; ++j) {
      const double c = coeffs_(j, i);
      if (c == 0.0) continue;
      values[i] += c * mono[j];
      grads[i] += c * mono_g[j];
      hessians[i] += c * mono_h[j];
    }
}

double SparseMatrix::symmetry_defect() const {
  Eigen::SparseMatrix<double, Eigen::RowMajor> D = A - Eigen::SparseMatrix<double, Eigen::RowMajor>(A.transpose());
  double worst = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(D, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

SparseMatrix assemble_biharmonic(const LagrangeSpace& space, const BiharmonicConfig& cfg) {
  const auto& m = space.mesh();
  const int dim = m.dim;
  const int nloc = space.local_size();
  const int p = space.order();
  const double eta = cfg.penalty_scale * p * p;

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> vals;
  std::vector<Vec> grads;
  std::vector<Mat> hessians;

  // volume term: broken Hessian inner product
  const auto vol_rule = quad::simplex_rule(dim, 2 * p);
  for (int c = 0; c < m.n_cells(); ++c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= dim; ++a) verts[a] = m.cell_vertex(c, a);
    Mat J = Mat::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) J.col(a) = verts[a + 1] - verts[0];
    const double absdet = std::abs(J.determinant());
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nloc, nloc);
    for (int q = 0; q < vol_rule.size(); ++q) {
      Vec x = Vec::Zero(dim);
      for (int i = 0; i <= dim; ++i) x += vol_rule.points[q][i] * verts[i];
      space.eval_basis_jet(c, x, vals, grads, hessians);
      const double w = vol_rule.weights[q] * absdet;
      for (int i = 0; i < nloc; ++i)
        for (int j = 0; j <= i; ++j)
          local(i, j) += w * (hessians[i].array() * hessians[j].array()).sum();
    }
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) {
        const double v = j <= i ? local(i, j) : local(j, i);
        int ei = space.equation(space.cell_node(c, i));
        int ej = space.equation(space.cell_node(c, j));
        if (ei >= 0 && ej >= 0 && v != 0.0) trips.push_back({ei, ej, v});
      }
  }

  // facet terms: consistency, adjoint consistency, penalty on the jump of
  // the normal derivative; boundary facets use one-sided values
  const auto fac_rule = quad::simplex_rule(dim - 1, 2 * p);
  std::vector<double> vals2;
  std::vector<Vec> grads2;
  std::vector<Mat> hessians2;
  for (int fi = 0; fi < m.n_facets(); ++fi) {
    const auto& f = m.facets[fi];
    // fixed facet normal: outward from cells[0]
    Vec n(dim);
    {
      Mat frame = Mat::Zero(dim, dim - 1);
      for (int a = 0; a < dim - 1; ++a)
        frame.col(a) = m.vertices[f.v[a + 1]] - m.vertices[f.v[0]];
      if (dim == 2) {
        Vec e = frame.col(0);
        n << e(1), -e(0);
      } else {
        Eigen::Vector3d a(frame(0, 0), frame(1, 0), frame(2, 0)),
            b(frame(0, 1), frame(1, 1), frame(2, 1));
        Eigen::Vector3d cr = a.cross(b);
        n << cr(0), cr(1), cr(2);
      }
      n.normalize();
    }
    double h_f = 0.0;
    for (int a = 0; a < dim; ++a)
      for (int b = a + 1; b < dim; ++b)
        h_f = std::max(h_f, (m.vertices[f.v[a]] - m.vertices[f.v[b]]).norm());
    if (dim == 2) h_f = (m.vertices[f.v[0]] - m.vertices[f.v[1]]).norm();

    double area_scale;  // physical measure of the facet / reference measure
    {
      Mat frame = Mat::Zero(dim, dim - 1);
      for (int a = 0; a < dim - 1; ++a)
        frame.col(a) = m.vertices[f.v[a + 1]] - m.vertices[f.v[0]];
      area_scale = std::sqrt((frame.transpose() * frame).determinant());
    }

    const int ns = f.n_cells;
    const int c0 = f.cells[0];
    const int c1 = ns == 2 ? f.cells[1] : -1;
    const int width = ns * nloc;
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(width, width);
    for (int q = 0; q < fac_rule.size(); ++q) {
      Vec x = Vec::Zero(dim);
      for (int i = 0; i < dim; ++i) x += fac_rule.points[q][i] * m.vertices[f.v[i]];
      const double w = fac_rule.weights[q] * area_scale;
      space.eval_basis_jet(c0, x, vals, grads, hessians);
      if (ns == 2) space.eval_basis_jet(c1, x, vals2, grads2, hessians2);

      // jump of normal derivative and average of n.D2.n for the stacked
      // local dof vector (cells[0] first)
      Eigen::VectorXd jump(width), avg(width);
      for (int i = 0; i < nloc; ++i) {
        jump(i) = n.dot(grads[i]);
        avg(i) = n.dot(hessians[i] * n) * (ns == 2 ? 0.5 : 1.0);
      }
      if (ns == 2)
        for (int i = 0; i < nloc; ++i) {
          jump(nloc + i) = -n.dot(grads2[i]);
          avg(nloc + i) = 0.5 * n.dot(hessians2[i] * n);
        }
      local += w * (eta / h_f) * (jump * jump.transpose());
      local -= w * (avg * jump.transpose() + jump * avg.transpose());
    }
    auto eq_of = [&](int k) {
      int cell = k < nloc ? c0 : c1;
      return space.equation(space.cell_node(cell, k % nloc));
    };
    for (int i = 0; i < width; ++i)
      for (int j = 0; j < width; ++j) {
        int ei = eq_of(i), ej = eq_of(j);
        if (ei >= 0 && ej >= 0 && local(i, j) != 0.0) trips.push_back({ei, ej, local(i, j)});
      }
  }

  SparseMatrix out;
  out.A.resize(space.n_free(), space.n_free());
  out.A.setFromTriplets(trips.begin(), trips.end());
  out.A.makeCompressed();
  return out;
}

std::vector<Eigen::VectorXd> apply_functional_to_basis(const LagrangeSpace& space,
                                                       const forms::PointFunctional& f) {
  const int dim = space.mesh().dim;
  const int ncomp = dim * (dim + 1) / 2;
  std::vector<Eigen::VectorXd> loads(ncomp, Eigen::VectorXd::Zero(space.n_free()));
  std::vector<double> vals;
  for (const auto& wp : f) {
    space.eval_basis(wp.cell, wp.x, vals);
    int comp = 0;
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b, ++comp) {
        const double wcomp = a == b ? wp.W(a, a) : 2.0 * wp.W(a, b);
        if (wcomp == 0.0) continue;
        for (int i = 0; i < space.local_size(); ++i) {
          int eq = space.equation(space.cell_node(wp.cell, i));
          if (eq >= 0) loads[comp](eq) += wcomp * vals[i];
        }
      }
  }
  return loads;
}

Eigen::VectorXd assemble_scalar_load(const LagrangeSpace& space, const fields::ScalarField& f,
                                     int quad_degree) {
  const auto& m = space.mesh();
  const int dim = m.dim;
  const auto rule = quad::simplex_rule(dim, quad_degree);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.n_free());
  std::vector<double> vals;
  for (int c = 0; c < m.n_cells(); ++c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= dim; ++a) verts[a] = m.cell_vertex(c, a);
    Mat J = Mat::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) J.col(a) = verts[a + 1] - verts[0];
    const double absdet = std::abs(J.determinant());
    for (int q = 0; q < rule.size(); ++q) {
      Vec x = Vec::Zero(dim);
      for (int i = 0; i <= dim; ++i) x += rule.points[q][i] * verts[i];
      const double w = rule.weights[q] * absdet * f.value(x);
      space.eval_basis(c, x, vals);
      for (int i = 0; i < space.local_size(); ++i) {
        int eq = space.equation(space.cell_node(c, i));
        if (eq >= 0) load(eq) += w * vals[i];
      }
    }
  }
  return load;
}

SpdSolver::SpdSolver(const SparseMatrix& mat, double tol) : A_(&mat.A), tol_(tol) {
  direct_ = mat.rows() <= 200000;
  Acol_ = Eigen::SparseMatrix<double>(mat.A);
  if (direct_) {
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt_->compute(Acol_);
    require(ldlt_->info() == Eigen::Success, "SpdSolver: Cholesky factorization failed");
  }
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs, SolveStats* stats) const {
  Eigen::VectorXd x;
  SolveStats s;
  if (direct_) {
    x = ldlt_->solve(rhs);
    s.method = "cholesky";
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(tol_);
    cg.setMaxIterations(20000);
    cg.compute(Acol_);
    x = cg.solve(rhs);
    require(cg.info() == Eigen::Success, "SpdSolver: CG did not converge");
    s.method = "cg";
    s.iterations = static_cast<int>(cg.iterations());
  }
  const double rn = rhs.norm();
  s.rel_residual = rn == 0.0 ? 0.0 : (Acol_ * x - rhs).norm() / rn;
  require(s.rel_residual <= std::max(tol_ * 100.0, 1e-8) || rn == 0.0,
          "SpdSolver: residual too large: " + std::to_string(s.rel_residual));
  if (stats) *stats = s;
  return x;
}

Eigen::VectorXd solve_spd(const SparseMatrix& mat, const Eigen::VectorXd& rhs, double tol,
                          SolveStats* stats) {
  SpdSolver solver(mat, tol);
  return solver.solve(rhs, stats);
}

double discrete_h2_norm(const LagrangeSpace& space, const Eigen::VectorXd& solution,
                        int quad_degree) {
  const auto& m = space.mesh();
  const int dim = m.dim;
  const auto rule = quad::simplex_rule(dim, quad_degree);
  std::vector<double> vals;
  std::vector<Vec> grads;
  std::vector<Mat> hessians;
  double acc = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= dim; ++a) verts[a] = m.cell_vertex(c, a);
    Mat J = Mat::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) J.col(a) = verts[a + 1] - verts[0];
    const double absdet = std::abs(J.determinant());
    for (int q = 0; q < rule.size(); ++q) {
      Vec x = Vec::Zero(dim);
      for (int i = 0; i <= dim; ++i) x += rule.points[q][i] * verts[i];
      space.eval_basis_jet(c, x, vals, grads, hessians);
      double u = 0.0;
      Vec du = Vec::Zero(dim);
      Mat d2u = Mat::Zero(dim, dim);
      for (int i = 0; i < space.local_size(); ++i) {
        int eq = space.equation(space.cell_node(c, i));
        if (eq < 0) continue;
        u += solution(eq) * vals[i];
        du += solution(eq) * grads[i];
        d2u += solution(eq) * hessians[i];
      }
      acc += rule.weights[q] * absdet *
             (u * u + du.squaredNorm() + (d2u.array() * d2u.array()).sum());
    }
  }
  return std::sqrt(acc);
}

DualNormReport hminus2_norm(const mesh::SimplicialMesh& m, const forms::PointFunctional& f,
                            int order, const BiharmonicConfig& cfg) {
  LagrangeSpace space(m, order);
  SparseMatrix A = assemble_biharmonic(space, cfg);
  SpdSolver solver(A);
  auto loads = apply_functional_to_basis(space, f);

  DualNormReport rep;
  rep.order = order;
  rep.ndof_per_component = space.n_free();
  double sum_sq = 0.0;
  for (const auto& load : loads) {
    SolveStats stats;
    Eigen::VectorXd u = solver.solve(load, &stats);
    double nrm = discrete_h2_norm(space, u, 2 * order);
    rep.component_norms.push_back(nrm);
    rep.solves.push_back(stats);
    sum_sq += nrm * nrm;
  }
  rep.combined = std::sqrt(sum_sq);
  return rep;
}

}  // namespace regge::dual
