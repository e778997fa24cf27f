#include "regge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace regge {

int thread_count() {
  static int n = [] {
    if (const char* env = std::getenv("REGGE_THREADS")) {
      int k = std::atoi(env);
      if (k > 0) return k;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
  }();
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int nt = thread_count();
  if (nt <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace regge

namespace regge::mesh {

namespace {

double signed_volume(const SimplicialMesh& m, const std::array<int, 4>& cell, int dim) {
  Eigen::Matrix<double, 3, 3> J = Eigen::Matrix<double, 3, 3>::Zero();
  for (int a = 0; a < dim; ++a)
    J.col(a).head(dim) = (m.vertices[cell[a + 1]] - m.vertices[cell[0]]);
  double det = dim == 2 ? J.topLeftCorner(2, 2).determinant() : J.determinant();
  double factorial = dim == 2 ? 2.0 : 6.0;
  return det / factorial;
}

}  // namespace

double SimplicialMesh::cell_volume(int c) const { return signed_volume(*this, cells[c], dim); }

double SimplicialMesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& cell : cells)
    for (int a = 0; a <= dim; ++a)
      for (int b = a + 1; b <= dim; ++b)
        h = std::max(h, (vertices[cell[a]] - vertices[cell[b]]).norm());
  return h;
}

double SimplicialMesh::min_edge_length() const {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& cell : cells)
    for (int a = 0; a <= dim; ++a)
      for (int b = a + 1; b <= dim; ++b)
        h = std::min(h, (vertices[cell[a]] - vertices[cell[b]]).norm());
  return h;
}

double SimplicialMesh::total_volume() const {
  double v = 0.0;
  for (int c = 0; c < n_cells(); ++c) v += cell_volume(c);
  return v;
}

double SimplicialMesh::boundary_area() const {
  require(connectivity_built, "boundary_area: connectivity not built");
  double area = 0.0;
  for (const auto& f : facets) {
    if (!f.boundary) continue;
    if (dim == 2) {
      area += (vertices[f.v[1]] - vertices[f.v[0]]).norm();
    } else {
      Vec e1 = vertices[f.v[1]] - vertices[f.v[0]];
      Vec e2 = vertices[f.v[2]] - vertices[f.v[0]];
      Eigen::Vector3d a(e1(0), e1(1), e1(2)), b(e2(0), e2(1), e2(2));
      area += 0.5 * a.cross(b).norm();
    }
  }
  return area;
}

SimplicialMesh generate_box_mesh(int dim, int level) {
  require(dim == 2 || dim == 3, "generate_box_mesh: dim must be 2 or 3");
  require(level >= 0, "generate_box_mesh: level must be nonnegative");

  SimplicialMesh m;
  m.dim = dim;
  const int n = 1 << level;  // subcubes per axis
  const double h = 2.0 / n;

  auto vid = [&](int i, int j, int k) {
    return dim == 2 ? i * (n + 1) + j : (i * (n + 1) + j) * (n + 1) + k;
  };

  if (dim == 2) {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        Vec p(2);
        p << -1.0 + i * h, -1.0 + j * h;
        m.vertices.push_back(p);
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // split along the (0,0)-(1,1) diagonal of the subsquare
        int v00 = vid(i, j, 0), v10 = vid(i + 1, j, 0), v01 = vid(i, j + 1, 0),
            v11 = vid(i + 1, j + 1, 0);
        m.cells.push_back({v00, v10, v11, -1});
        m.cells.push_back({v00, v11, v01, -1});
      }
  } else {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        for (int k = 0; k <= n; ++k) {
          Vec p(3);
          p << -1.0 + i * h, -1.0 + j * h, -1.0 + k * h;
          m.vertices.push_back(p);
        }
    // Kuhn split: one tet per permutation of the axes, all sharing the
    // subcube diagonal from the min corner to the max corner.
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (const auto& p : perms) {
            std::array<int, 3> c = {i, j, k};
            std::array<int, 4> tet;
            tet[0] = vid(c[0], c[1], c[2]);
            for (int s = 0; s < 3; ++s) {
              c[p[s]] += 1;
              tet[s + 1] = vid(c[0], c[1], c[2]);
            }
            m.cells.push_back(tet);
          }
  }

  // canonical cell storage: sorted tuple, last two indices swapped if the
  // sorted order is negatively oriented
  for (auto& cell : m.cells) {
    std::sort(cell.begin(), cell.begin() + dim + 1);
    if (signed_volume(m, cell, dim) < 0.0) std::swap(cell[dim - 1], cell[dim]);
  }
  std::sort(m.cells.begin(), m.cells.end(), [&](const auto& a, const auto& b) {
    auto key = [&](const std::array<int, 4>& c) {
      std::array<int, 4> s = c;
      std::sort(s.begin(), s.begin() + dim + 1);
      return s;
    };
    return key(a) < key(b);
  });

  build_connectivity(m);
  return m;
}

void build_connectivity(SimplicialMesh& m) {
  const int dim = m.dim;
  require(!m.cells.empty(), "build_connectivity: no cells");
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    for (int a = 0; a <= dim; ++a)
      require(m.cells[c][a] >= 0 && m.cells[c][a] < m.n_vertices(),
              "build_connectivity: cell " + std::to_string(c) + " has vertex index out of range");
    require(signed_volume(m, m.cells[c], dim) > 0.0,
            "build_connectivity: cell " + std::to_string(c) + " is degenerate or inverted");
  }

  m.facets.clear();
  m.ridges.clear();

  // facets: one per sorted vertex tuple; key -> facet id
  std::map<std::array<int, 3>, int> facet_ids;
  m.cell_facet_ids.assign(m.cells.size(), {-1, -1, -1, -1});
  for (int c = 0; c < m.n_cells(); ++c) {
    for (int skip = 0; skip <= dim; ++skip) {
      std::array<int, 3> key{-1, -1, -1};
      int t = 0;
      for (int a = 0; a <= dim; ++a)
        if (a != skip) key[t++] = m.cells[c][a];
      std::sort(key.begin(), key.begin() + dim);
      auto [it, inserted] = facet_ids.try_emplace(key, static_cast<int>(m.facets.size()));
      if (inserted) {
        Facet f;
        f.v = key;
        m.facets.push_back(f);
      }
      Facet& f = m.facets[it->second];
      require(f.n_cells < 2, "build_connectivity: non-manifold facet (3 or more adjacent cells)");
      f.cells[f.n_cells++] = c;
      m.cell_facet_ids[c][skip] = it->second;
    }
  }
  // lexicographic renumbering (std::map iterates in key order)
  {
    std::vector<int> perm(m.facets.size());
    std::vector<Facet> sorted;
    sorted.reserve(m.facets.size());
    int next = 0;
    for (auto& [key, old_id] : facet_ids) {
      perm[old_id] = next++;
      sorted.push_back(m.facets[old_id]);
    }
    m.facets = std::move(sorted);
    for (auto& cf : m.cell_facet_ids)
      for (int a = 0; a <= dim; ++a) cf[a] = perm[cf[a]];
  }
  for (auto& f : m.facets) f.boundary = (f.n_cells == 1);

  // ridges: sorted (dim-1)-tuples; for each incident cell, the two facets of
  // that cell containing the ridge are the facets opposite the remaining two
  // cell vertices
  std::map<std::array<int, 2>, int> ridge_ids;
  m.cell_ridge_ids.assign(m.cells.size(), {});
  for (int c = 0; c < m.n_cells(); ++c) {
    for (int s1 = 0; s1 <= dim; ++s1)
      for (int s2 = s1 + 1; s2 <= dim; ++s2) {
        // ridge spanned by the cell vertices other than s1, s2
        std::array<int, 2> key{-1, -1};
        int t = 0;
        for (int a = 0; a <= dim; ++a)
          if (a != s1 && a != s2) key[t++] = m.cells[c][a];
        std::sort(key.begin(), key.begin() + (dim - 1));
        auto [it, inserted] = ridge_ids.try_emplace(key, static_cast<int>(m.ridges.size()));
        if (inserted) {
          Ridge r;
          r.v = key;
          m.ridges.push_back(r);
        }
        Ridge& r = m.ridges[it->second];
        r.cells.push_back(c);
        r.cell_facets.push_back({m.cell_facet_ids[c][s1], m.cell_facet_ids[c][s2]});
        m.cell_ridge_ids[c].push_back(it->second);
      }
  }
  {
    std::vector<int> perm(m.ridges.size());
    std::vector<Ridge> sorted;
    sorted.reserve(m.ridges.size());
    int next = 0;
    for (auto& [key, old_id] : ridge_ids) {
      perm[old_id] = next++;
      sorted.push_back(m.ridges[old_id]);
    }
    m.ridges = std::move(sorted);
    for (auto& cr : m.cell_ridge_ids)
      for (auto& id : cr) id = perm[id];
    for (auto& cr : m.cell_ridge_ids) std::sort(cr.begin(), cr.end());
  }
  for (auto& r : m.ridges) {
    r.boundary = false;
    for (const auto& fp : r.cell_facets)
      for (int fi : fp)
        if (m.facets[fi].boundary) r.boundary = true;
  }

  m.vertex_cells.assign(m.vertices.size(), {});
  for (int c = 0; c < m.n_cells(); ++c)
    for (int a = 0; a <= dim; ++a) m.vertex_cells[m.cells[c][a]].push_back(c);

  m.vertex_on_boundary.assign(m.vertices.size(), false);
  for (const auto& f : m.facets)
    if (f.boundary)
      for (int a = 0; a < dim; ++a) m.vertex_on_boundary[f.v[a]] = true;

  m.connectivity_built = true;
}

SimplicialMesh perturb_interior_vertices(const SimplicialMesh& m, std::uint64_t seed,
                                         const PerturbConfig& cfg) {
  require(m.connectivity_built, "perturb_interior_vertices: connectivity not built");
  SimplicialMesh out = m;
  const int dim = m.dim;
  const double hmax = m.max_edge_length();
  const double factor =
      cfg.amplitude_factor > 0.0 ? cfg.amplitude_factor : std::pow(2.0, -(2.0 * dim + 1.0) / 2.0);
  const double amp = hmax * factor;

  for (int v = 0; v < m.n_vertices(); ++v) {
    if (m.vertex_on_boundary[v]) continue;
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_retries && !placed; ++attempt) {
      Vec p = m.vertices[v];
      for (int c = 0; c < dim; ++c) {
        std::uint64_t counter =
            (static_cast<std::uint64_t>(v) * 8 + c) * 1024 + static_cast<std::uint64_t>(attempt);
        p(c) += amp * rng_uniform_sym(seed, counter);
      }
      out.vertices[v] = p;
      placed = true;
      for (int c : m.vertex_cells[v])
        if (signed_volume(out, out.cells[c], dim) <= 0.0) placed = false;
      if (!placed) out.vertices[v] = m.vertices[v];
    }
    require(placed, "perturb_interior_vertices: vertex " + std::to_string(v) +
                        " could not be placed with positive cell volumes");
  }
  return out;
}

void write_mesh(const SimplicialMesh& m, std::ostream& os) {
  os.precision(17);
  os << "dim " << m.dim << "\n";
  os << "vertices " << m.n_vertices() << "\n";
  for (const auto& p : m.vertices) {
    for (int c = 0; c < m.dim; ++c) os << (c ? " " : "") << p(c);
    os << "\n";
  }
  os << "cells " << m.n_cells() << "\n";
  for (const auto& cell : m.cells) {
    for (int a = 0; a <= m.dim; ++a) os << (a ? " " : "") << cell[a];
    os << "\n";
  }
}

void write_mesh(const SimplicialMesh& m, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), "write_mesh: cannot open " + path);
  write_mesh(m, os);
  require(os.good(), "write_mesh: write failed for " + path);
}

SimplicialMesh read_mesh(std::istream& is) {
  SimplicialMesh m;
  std::string tok;
  int line = 1;
  auto expect = [&](const std::string& kw) {
    require(static_cast<bool>(is >> tok) && tok == kw,
            "read_mesh: malformed header, expected '" + kw + "' at line " + std::to_string(line));
  };
  expect("dim");
  require(static_cast<bool>(is >> m.dim) && (m.dim == 2 || m.dim == 3),
          "read_mesh: bad dimension at line 1");
  ++line;
  expect("vertices");
  int nv = 0;
  require(static_cast<bool>(is >> nv) && nv > 0, "read_mesh: bad vertex count at line 2");
  ++line;
  for (int v = 0; v < nv; ++v, ++line) {
    Vec p(m.dim);
    for (int c = 0; c < m.dim; ++c)
      require(static_cast<bool>(is >> p(c)),
              "read_mesh: bad vertex coordinates at line " + std::to_string(line));
    m.vertices.push_back(p);
  }
  expect("cells");
  int nc = 0;
  require(static_cast<bool>(is >> nc), "read_mesh: bad cell count at line " + std::to_string(line));
  require(nc > 0, "read_mesh: no cells");
  ++line;
  for (int c = 0; c < nc; ++c, ++line) {
    std::array<int, 4> cell{-1, -1, -1, -1};
    for (int a = 0; a <= m.dim; ++a) {
      require(static_cast<bool>(is >> cell[a]),
              "read_mesh: bad cell indices at line " + std::to_string(line));
      require(cell[a] >= 0 && cell[a] < nv,
              "read_mesh: cell index out of range at line " + std::to_string(line));
    }
    m.cells.push_back(cell);
  }
  build_connectivity(m);
  return m;
}

SimplicialMesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "read_mesh: cannot open " + path);
  return read_mesh(is);
}

}  // namespace regge::mesh
