#include "regge/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace regge;
using mesh::generate_box_mesh;

TEST(Mesh, BoxCounts3D) {
  auto m0 = generate_box_mesh(3, 0);
  EXPECT_EQ(m0.n_cells(), 6);
  EXPECT_EQ(m0.n_vertices(), 8);
  EXPECT_EQ(m0.n_ridges(), 19);  // edges
  EXPECT_EQ(m0.n_facets(), 18);

  auto m1 = generate_box_mesh(3, 1);
  EXPECT_EQ(m1.n_cells(), 48);
  EXPECT_EQ(m1.n_ridges(), 98);
}

TEST(Mesh, BoxCounts2D) {
  auto m = generate_box_mesh(2, 0);
  EXPECT_EQ(m.n_cells(), 2);
  EXPECT_EQ(m.n_vertices(), 4);
  EXPECT_EQ(m.n_facets(), 5);  // edges
  int interior = 0;
  for (const auto& f : m.facets)
    if (!f.boundary) ++interior;
  EXPECT_EQ(interior, 1);
}

TEST(Mesh, EdgeLengths) {
  for (int k = 0; k <= 2; ++k) {
    auto m = generate_box_mesh(3, k);
    EXPECT_NEAR(m.max_edge_length(), std::sqrt(3.0) * std::pow(2.0, 1 - k), 1e-12);
    EXPECT_NEAR(m.min_edge_length(), std::pow(2.0, 1 - k), 1e-12);
  }
}

TEST(Mesh, ConnectivityCube) {
  auto m = generate_box_mesh(3, 0);
  int interior_facets = 0;
  for (const auto& f : m.facets) {
    EXPECT_EQ(f.n_cells, f.boundary ? 1 : 2);
    if (!f.boundary) ++interior_facets;
  }
  EXPECT_EQ(interior_facets, 6);

  // diagonal ridge is interior with a full ring of 6 cells
  for (const auto& r : m.ridges) {
    ASSERT_FALSE(r.cells.empty());
    EXPECT_EQ(r.cells.size(), r.cell_facets.size());
    if (!r.boundary) EXPECT_EQ(r.multiplicity(), 2);
  }
  int diag = -1;
  for (int i = 0; i < m.n_ridges(); ++i) {
    const auto& r = m.ridges[i];
    Vec a = m.vertices[r.v[0]], b = m.vertices[r.v[1]];
    if ((a - b).norm() > 3.0) diag = i;
  }
  ASSERT_GE(diag, 0);
  EXPECT_FALSE(m.ridges[diag].boundary);
  EXPECT_EQ(m.ridges[diag].cells.size(), 6u);
}

TEST(Mesh, EulerAndMeasures) {
  for (int k = 0; k <= 3; ++k) {
    auto m = generate_box_mesh(3, k);
    EXPECT_EQ(m.n_vertices() - m.n_ridges() + m.n_facets() - m.n_cells(), 1) << "level " << k;
    EXPECT_NEAR(m.total_volume(), 8.0, 8.0 * 1e-12);
    EXPECT_NEAR(m.boundary_area(), 24.0, 24.0 * 1e-12);
  }
  auto m2 = generate_box_mesh(2, 2);
  EXPECT_NEAR(m2.total_volume(), 4.0, 4e-12);
  EXPECT_NEAR(m2.boundary_area(), 8.0, 8e-12);
}

TEST(Mesh, EntityTuplesSortedUnique) {
  auto m = generate_box_mesh(3, 1);
  for (std::size_t i = 1; i < m.facets.size(); ++i)
    EXPECT_LT(std::vector<int>(m.facets[i - 1].v.begin(), m.facets[i - 1].v.end()),
              std::vector<int>(m.facets[i].v.begin(), m.facets[i].v.end()));
  for (const auto& f : m.facets) {
    EXPECT_LT(f.v[0], f.v[1]);
    EXPECT_LT(f.v[1], f.v[2]);
  }
  for (const auto& r : m.ridges) EXPECT_LT(r.v[0], r.v[1]);
  for (const auto& r : m.ridges) {
    // exactly two facets of each incident cell contain the ridge
    for (const auto& fp : r.cell_facets) EXPECT_NE(fp[0], fp[1]);
  }
}

TEST(Mesh, PerturbDeterminismAndBoundary) {
  auto m = generate_box_mesh(3, 1);
  auto p1 = mesh::perturb_interior_vertices(m, 42);
  auto p2 = mesh::perturb_interior_vertices(m, 42);
  for (int v = 0; v < m.n_vertices(); ++v) {
    EXPECT_EQ(p1.vertices[v](0), p2.vertices[v](0));
    EXPECT_EQ(p1.vertices[v](1), p2.vertices[v](1));
    EXPECT_EQ(p1.vertices[v](2), p2.vertices[v](2));
    if (m.vertex_on_boundary[v])
      EXPECT_TRUE((p1.vertices[v] - m.vertices[v]).norm() == 0.0);
  }
  auto p3 = mesh::perturb_interior_vertices(m, 7);
  bool moved = false;
  for (int v = 0; v < m.n_vertices(); ++v)
    if ((p3.vertices[v] - m.vertices[v]).norm() > 0) moved = true;
  EXPECT_TRUE(moved);
}

TEST(Mesh, PerturbAmplitudeBound) {
  auto m = generate_box_mesh(3, 2);
  auto p = mesh::perturb_interior_vertices(m, 7);
  const double amp = std::sqrt(3.0) * std::pow(2.0, -1) * std::pow(2.0, -3.5);
  double worst = 0.0;
  for (int v = 0; v < m.n_vertices(); ++v)
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(p.vertices[v](c) - m.vertices[v](c)));
  EXPECT_LE(worst, amp * (1.0 + 1e-12));
  EXPECT_GT(worst, 0.1 * amp);  // something close to the full range was drawn
  for (int c = 0; c < p.n_cells(); ++c) EXPECT_GT(p.cell_volume(c), 0.0);
  EXPECT_NEAR(p.total_volume(), 8.0, 8e-12);
}

TEST(Mesh, RoundTrip) {
  auto m = generate_box_mesh(3, 1);
  auto p = mesh::perturb_interior_vertices(m, 11);
  std::stringstream ss;
  mesh::write_mesh(p, ss);
  auto q = mesh::read_mesh(ss);
  ASSERT_EQ(q.n_vertices(), p.n_vertices());
  ASSERT_EQ(q.n_cells(), p.n_cells());
  for (int v = 0; v < p.n_vertices(); ++v)
    EXPECT_EQ((q.vertices[v] - p.vertices[v]).norm(), 0.0);
  for (int c = 0; c < p.n_cells(); ++c) EXPECT_EQ(q.cells[c], p.cells[c]);
}

TEST(Mesh, ReadErrors) {
  {
    std::stringstream ss("dim 3\nvertices 2\n0 0 0\n1 0 0\ncells 1\n0 1 5 2\n");
    EXPECT_THROW(mesh::read_mesh(ss), Error);
  }
  {
    std::stringstream ss("dim 2\nvertices 3\n0 0\n1 0\n0 1\ncells 0\n");
    EXPECT_THROW(mesh::read_mesh(ss), Error);
  }
  {
    std::stringstream ss("dimension 2\n");
    EXPECT_THROW(mesh::read_mesh(ss), Error);
  }
}

TEST(Mesh, RejectsBadDim) {
  EXPECT_THROW(generate_box_mesh(1, 0), Error);
  EXPECT_THROW(generate_box_mesh(4, 0), Error);
}
