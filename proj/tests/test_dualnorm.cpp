#include "regge/dualnorm.hpp"

#include "regge/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace regge;
using fields::Poly;

namespace {

// Delta^2 of a polynomial, exactly
Poly bilaplacian(const Poly& p, int dim) {
  Poly lap(dim);
  for (int a = 0; a < dim; ++a) lap = lap + p.derivative(a).derivative(a);
  Poly lap2(dim);
  for (int a = 0; a < dim; ++a) lap2 = lap2 + lap.derivative(a).derivative(a);
  return lap2;
}

double analytic_h2_norm(const mesh::SimplicialMesh& m, const Poly& p) {
  auto rule = quad::simplex_rule(m.dim, 24);
  double acc = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= m.dim; ++a) verts[a] = m.cell_vertex(c, a);
    Mat J = Mat::Zero(m.dim, m.dim);
    for (int a = 0; a < m.dim; ++a) J.col(a) = verts[a + 1] - verts[0];
    double absdet = std::abs(J.determinant());
    for (int q = 0; q < rule.size(); ++q) {
      Vec x = Vec::Zero(m.dim);
      for (int i = 0; i <= m.dim; ++i) x += rule.points[q][i] * verts[i];
      auto jet = p.jet(x);
      acc += rule.weights[q] * absdet *
             (jet.value * jet.value + jet.grad.squaredNorm() +
              (jet.hess.array() * jet.hess.array()).sum());
    }
  }
  return std::sqrt(acc);
}

}  // namespace

TEST(LagrangeSpace, NodeCounts) {
  auto m = mesh::generate_box_mesh(3, 1);
  dual::LagrangeSpace p1(m, 1);
  EXPECT_EQ(p1.n_nodes(), m.n_vertices());
  dual::LagrangeSpace p2(m, 2);
  EXPECT_EQ(p2.n_nodes(), m.n_vertices() + m.n_ridges());
  dual::LagrangeSpace p3(m, 3);
  EXPECT_EQ(p3.n_nodes(), m.n_vertices() + 2 * m.n_ridges() + m.n_facets());
  EXPECT_LT(p2.n_free(), p2.n_nodes());
}

TEST(LagrangeSpace, PartitionOfUnityAndContinuity) {
  auto m = mesh::perturb_interior_vertices(mesh::generate_box_mesh(3, 1), 4);
  dual::LagrangeSpace space(m, 3);
  std::vector<double> vals;
  Vec x = 0.4 * m.cell_vertex(7, 0) + 0.3 * m.cell_vertex(7, 1) + 0.2 * m.cell_vertex(7, 2) +
          0.1 * m.cell_vertex(7, 3);
  space.eval_basis(7, x, vals);
  double sum = 0.0;
  for (double v : vals) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);

  // continuity: per-node values agree when evaluated from both cells at a
  // shared facet point
  int fi = -1;
  for (int i = 0; i < m.n_facets(); ++i)
    if (!m.facets[i].boundary) fi = i;
  ASSERT_GE(fi, 0);
  const auto& f = m.facets[fi];
  Vec y = 0.5 * m.vertices[f.v[0]] + 0.3 * m.vertices[f.v[1]] + 0.2 * m.vertices[f.v[2]];
  std::vector<double> va, vb;
  space.eval_basis(f.cells[0], y, va);
  space.eval_basis(f.cells[1], y, vb);
  std::map<int, double> ga, gb;
  for (int i = 0; i < space.local_size(); ++i) {
    ga[space.cell_node(f.cells[0], i)] = va[i];
    gb[space.cell_node(f.cells[1], i)] = vb[i];
  }
  for (const auto& [node, val] : ga)
    if (gb.count(node)) EXPECT_NEAR(val, gb[node], 1e-11);
}

TEST(Biharmonic, MatrixSymmetricSpd) {
  auto m = mesh::generate_box_mesh(3, 1);
  dual::LagrangeSpace space(m, 2);
  auto A = dual::assemble_biharmonic(space);
  EXPECT_EQ(A.rows(), space.n_free());
  EXPECT_LT(A.symmetry_defect(), 1e-12);
  dual::SpdSolver solver(A);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(A.rows());
  Eigen::VectorXd x = solver.solve(rhs);
  EXPECT_NEAR(x.norm(), 0.0, 1e-14);
}

TEST(SolveSpd, HandValues) {
  dual::SparseMatrix mat;
  mat.A.resize(2, 2);
  std::vector<Eigen::Triplet<double>> t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}};
  mat.A.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd rhs(2);
  rhs << 1.0, 0.0;
  dual::SolveStats stats;
  Eigen::VectorXd x = dual::solve_spd(mat, rhs, 1e-12, &stats);
  EXPECT_NEAR(x(0), 2.0 / 3.0, 1e-13);
  EXPECT_NEAR(x(1), -1.0 / 3.0, 1e-13);
  EXPECT_EQ(stats.method, "cholesky");
}

TEST(SolveSpd, IdentityAndRandomSpd) {
  {
    dual::SparseMatrix mat;
    mat.A.resize(3, 3);
    std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}};
    mat.A.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd rhs(3);
    rhs << 4, -2, 7;
    EXPECT_NEAR((dual::solve_spd(mat, rhs) - rhs).norm(), 0.0, 1e-13);
  }
  {
    const int n = 100;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = rng_uniform_sym(7, i * n + j) / n;
    Eigen::MatrixXd A = M.transpose() * M + Eigen::MatrixXd::Identity(n, n);
    dual::SparseMatrix mat;
    mat.A = A.sparseView();
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs(i) = rng_uniform_sym(8, i);
    dual::SolveStats stats;
    Eigen::VectorXd x = dual::solve_spd(mat, rhs, 1e-10, &stats);
    EXPECT_LT((A * x - rhs).norm() / rhs.norm(), 1e-10);
  }
}

TEST(Biharmonic, ManufacturedSolutionConverges) {
  // phi = ((1-x^2)(1-y^2)(1-z^2))^2 solves the clamped problem with
  // f = Delta^2 phi; the C0 interior-penalty solution converges in the
  // broken H2 norm at rate about order-1
  Poly phi = fields::bump_squared(3);
  Poly f = bilaplacian(phi, 3);
  fields::PolyScalarField fsrc(f);
  double errs[2];
  for (int k = 1; k <= 2; ++k) {
    auto m = mesh::generate_box_mesh(3, k);
    dual::LagrangeSpace space(m, 2);
    auto A = dual::assemble_biharmonic(space);
    Eigen::VectorXd load = dual::assemble_scalar_load(space, fsrc, 14);
    Eigen::VectorXd u = dual::solve_spd(A, load);
    auto rule = quad::simplex_rule(3, 12);
    std::vector<double> vals;
    std::vector<Vec> grads;
    std::vector<Mat> hessians;
    double acc = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) {
      std::array<Vec, 4> verts;
      for (int a = 0; a <= 3; ++a) verts[a] = m.cell_vertex(c, a);
      Mat J = Mat::Zero(3, 3);
      for (int a = 0; a < 3; ++a) J.col(a) = verts[a + 1] - verts[0];
      double absdet = std::abs(J.determinant());
      for (int q = 0; q < rule.size(); ++q) {
        Vec x = Vec::Zero(3);
        for (int i = 0; i < 4; ++i) x += rule.points[q][i] * verts[i];
        space.eval_basis_jet(c, x, vals, grads, hessians);
        double uh = 0;
        Vec duh = Vec::Zero(3);
        Mat d2uh = Mat::Zero(3, 3);
        for (int i = 0; i < space.local_size(); ++i) {
          int eq = space.equation(space.cell_node(c, i));
          if (eq < 0) continue;
          uh += u(eq) * vals[i];
          duh += u(eq) * grads[i];
          d2uh += u(eq) * hessians[i];
        }
        auto jet = phi.jet(x);
        double e0 = uh - jet.value;
        Vec e1 = duh - jet.grad;
        Mat e2 = d2uh - jet.hess;
        acc += rule.weights[q] * absdet *
               (e0 * e0 + e1.squaredNorm() + (e2.array() * e2.array()).sum());
      }
    }
    errs[k - 1] = std::sqrt(acc);
  }
  EXPECT_LT(errs[1], errs[0]);
  double ratio = errs[0] / errs[1];
  EXPECT_GT(ratio, 1.3);
  EXPECT_LT(ratio, 4.0);
}

TEST(DualNorm, ZeroFunctionalAndHomogeneity) {
  auto m = mesh::generate_box_mesh(3, 1);
  forms::PointFunctional empty;
  auto rep0 = dual::hminus2_norm(m, empty, 2);
  EXPECT_EQ(rep0.combined, 0.0);

  study::GraphMetric gf(3);
  auto gh = fe::interpolate(gf, m, 0);
  fe::SmoothSource gsrc(std::make_shared<study::GraphMetric>(3));
  auto f = forms::einstein_error_functional(m, gsrc, gh, forms::QuadConfig::for_degree(0));
  auto f3 = f;
  for (auto& wp : f3) wp.W *= -3.0;
  auto r1 = dual::hminus2_norm(m, f, 2);
  auto r3 = dual::hminus2_norm(m, f3, 2);
  EXPECT_NEAR(r3.combined, 3.0 * r1.combined, 1e-8 * r1.combined);
  EXPECT_GT(r1.combined, 0.0);
}

TEST(DualNorm, ManufacturedBiharmonicPairing) {
  // functional rho -> int (Delta^2 phi) rho_00: the dual-norm solve recovers
  // phi in component (0,0) and reports a norm near ||phi||_H2
  Poly phi = fields::bump_squared(3);
  Poly f = bilaplacian(phi, 3);
  double ratio_prev = 10.0;
  for (int k = 1; k <= 2; ++k) {
    auto m = mesh::generate_box_mesh(3, k);
    double href = analytic_h2_norm(m, phi);
    forms::PointFunctional pf;
    auto rule = quad::simplex_rule(3, 12);
    for (int c = 0; c < m.n_cells(); ++c) {
      std::array<Vec, 4> verts;
      for (int a = 0; a <= 3; ++a) verts[a] = m.cell_vertex(c, a);
      Mat J = Mat::Zero(3, 3);
      for (int a = 0; a < 3; ++a) J.col(a) = verts[a + 1] - verts[0];
      double absdet = std::abs(J.determinant());
      for (int q = 0; q < rule.size(); ++q) {
        Vec x = Vec::Zero(3);
        for (int i = 0; i < 4; ++i) x += rule.points[q][i] * verts[i];
        Mat W = Mat::Zero(3, 3);
        W(0, 0) = rule.weights[q] * absdet * f.eval(x);
        pf.push_back({c, x, W});
      }
    }
    auto rep = dual::hminus2_norm(m, pf, 2);
    EXPECT_GT(rep.component_norms[0], 1e-3);
    for (int comp = 1; comp < 6; ++comp) EXPECT_NEAR(rep.component_norms[comp], 0.0, 1e-10);
    double ratio = rep.combined / href;
    if (k == 2) {
      EXPECT_GT(ratio, 0.7);
      EXPECT_LT(ratio, 1.3);
      EXPECT_LT(std::abs(ratio - 1.0), std::abs(ratio_prev - 1.0) + 0.05);
    }
    ratio_prev = ratio;
  }
}

TEST(DualNorm, PenaltyRobustRates) {
  // doubling the penalty moves the observed order by < 0.05
  study::GraphMetric gf(3);
  fe::SmoothSource gsrc(std::make_shared<study::GraphMetric>(3));
  auto qc = forms::QuadConfig::for_degree(0);
  double eoc[2];
  int which = 0;
  for (double scale : {10.0, 20.0}) {
    dual::BiharmonicConfig cfg;
    cfg.penalty_scale = scale;
    double err[2], hs[2];
    for (int k = 1; k <= 2; ++k) {
      auto m = mesh::perturb_interior_vertices(mesh::generate_box_mesh(3, k), 42);
      auto gh = fe::interpolate(gf, m, 0);
      auto f = forms::einstein_error_functional(m, gsrc, gh, qc);
      err[k - 1] = dual::hminus2_norm(m, f, 2, cfg).combined;
      hs[k - 1] = m.max_edge_length();
    }
    eoc[which++] = std::log(err[0] / err[1]) / std::log(hs[0] / hs[1]);
  }
  EXPECT_LT(std::abs(eoc[0] - eoc[1]), 0.05);
}
