#include "regge/regge_space.hpp"

#include "regge/quadrature.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace regge::fe {

geo::MetricJet metric_jet_from(const CellTensorSource& src, int cell, const Vec& x) {
  return geo::make_metric_jet(src.jet(cell, x), src.context(cell));
}

namespace {

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// moments per entity of dimension d: C(r+1, d); pairs: d(d+1)/2
int moments_per_entity(int degree, int d) { return static_cast<int>(binomial(degree + 1, d)); }
int pairs_per_entity(int d) { return d * (d + 1) / 2; }
int dofs_per_entity(int degree, int d) { return pairs_per_entity(d) * moments_per_entity(degree, d); }

// barycentric-monomial moment set of homogeneous degree (r+1-d) on a
// d-simplex; spans P_{r+1-d}
std::vector<std::array<int, 4>> moment_exponents(int degree, int d) {
  std::vector<std::array<int, 4>> out;
  const int D = degree + 1 - d;
  if (D < 0) return out;
  std::array<int, 4> e{0, 0, 0, 0};
  std::function<void(int, int)> rec = [&](int slot, int remaining) {
    if (slot == d) {
      e[slot] = remaining;
      out.push_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[slot] = k;
      rec(slot + 1, remaining - k);
    }
  };
  rec(0, D);
  return out;
}

struct EntityRef {
  int d = 0;                 // entity dimension
  std::array<int, 4> verts;  // sorted global vertex ids, d+1 used
  long long dof_offset = 0;
};

// Per-mesh description of all degree-r Regge dofs.
struct DofTable {
  int dim = 0;
  int degree = 0;
  long long ndof = 0;
  std::vector<EntityRef> entities;                 // d ascending, lexicographic within d
  std::vector<std::vector<int>> cell_entities;     // per cell: entity indices
};

DofTable build_dof_table(const mesh::SimplicialMesh& m, int degree) {
  DofTable t;
  t.dim = m.dim;
  t.degree = degree;
  t.cell_entities.assign(m.n_cells(), {});

  auto add_entities = [&](int d, auto&& entity_count, auto&& entity_verts,
                          auto&& cells_of_entity) {
    if (moments_per_entity(degree, d) == 0) return;
    int base = static_cast<int>(t.entities.size());
    for (int e = 0; e < entity_count(); ++e) {
      EntityRef ref;
      ref.d = d;
      ref.verts = entity_verts(e);
      t.entities.push_back(ref);
      for (int c : cells_of_entity(e)) t.cell_entities[c].push_back(base + e);
    }
  };

  if (m.dim == 3) {
    add_entities(
        1, [&] { return m.n_ridges(); },
        [&](int e) {
          return std::array<int, 4>{m.ridges[e].v[0], m.ridges[e].v[1], -1, -1};
        },
        [&](int e) { return m.ridges[e].cells; });
    add_entities(
        2, [&] { return m.n_facets(); },
        [&](int e) {
          return std::array<int, 4>{m.facets[e].v[0], m.facets[e].v[1], m.facets[e].v[2], -1};
        },
        [&](int e) {
          std::vector<int> cs(m.facets[e].cells.begin(),
                              m.facets[e].cells.begin() + m.facets[e].n_cells);
          return cs;
        });
    add_entities(
        3, [&] { return m.n_cells(); },
        [&](int e) {
          std::array<int, 4> v{m.cells[e][0], m.cells[e][1], m.cells[e][2], m.cells[e][3]};
          std::sort(v.begin(), v.end());
          return v;
        },
        [&](int e) { return std::vector<int>{e}; });
  } else {
    add_entities(
        1, [&] { return m.n_facets(); },
        [&](int e) {
          return std::array<int, 4>{m.facets[e].v[0], m.facets[e].v[1], -1, -1};
        },
        [&](int e) {
          std::vector<int> cs(m.facets[e].cells.begin(),
                              m.facets[e].cells.begin() + m.facets[e].n_cells);
          return cs;
        });
    add_entities(
        2, [&] { return m.n_cells(); },
        [&](int e) {
          std::array<int, 4> v{m.cells[e][0], m.cells[e][1], m.cells[e][2], -1};
          std::sort(v.begin(), v.begin() + 3);
          return v;
        },
        [&](int e) { return std::vector<int>{e}; });
  }

  long long offset = 0;
  for (auto& e : t.entities) {
    e.dof_offset = offset;
    offset += dofs_per_entity(degree, e.d);
  }
  t.ndof = offset;
  return t;
}

// Rows of the local dof-evaluation matrix for one cell: each local dof is an
// entity moment of a tangential-tangential component pair.
struct LocalDofs {
  std::vector<long long> global_ids;
  Eigen::MatrixXd M;  // (local dofs) x (ncomp * nbasis)
};

LocalDofs build_local_dofs(const mesh::SimplicialMesh& m, const DofTable& table,
                           const poly::PolyBasis& basis, int cell) {
  const int dim = m.dim;
  const int degree = table.degree;
  const int ncomp = dim * (dim + 1) / 2;
  const int nbasis = basis.size();

  LocalDofs out;
  std::vector<std::pair<std::array<int, 2>, Mat>> comp_mats;  // (i,j) -> symmetric unit
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      Mat e = Mat::Zero(dim, dim);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      comp_mats.push_back({{i, j}, e});
    }

  std::vector<std::vector<double>> rows;

  for (int ei : table.cell_entities[cell]) {
    const EntityRef& ent = table.entities[ei];
    const int d = ent.d;
    const auto moments = moment_exponents(degree, d);
    const auto rule = quad::simplex_rule(d, 2 * degree + 2);

    Mat frame = Mat::Zero(dim, d);
    for (int a = 0; a < d; ++a)
      frame.col(a) = m.vertices[ent.verts[a + 1]] - m.vertices[ent.verts[0]];

    // physical quadrature points on the entity
    std::vector<Vec> pts(rule.size());
    for (int q = 0; q < rule.size(); ++q) {
      Vec x = Vec::Zero(dim);
      for (int i = 0; i <= d; ++i) x += rule.points[q][i] * m.vertices[ent.verts[i]];
      pts[q] = x;
    }
    std::vector<std::vector<double>> basis_vals(rule.size());
    for (int q = 0; q < rule.size(); ++q) basis.eval(pts[q], basis_vals[q]);

    int pair_idx = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b, ++pair_idx) {
        Vec ta = frame.col(a), tb = frame.col(b);
        for (std::size_t n = 0; n < moments.size(); ++n) {
          out.global_ids.push_back(ent.dof_offset + pair_idx * moments.size() + n);
          std::vector<double> row(ncomp * nbasis, 0.0);
          for (int q = 0; q < rule.size(); ++q) {
            double qn = 1.0;
            for (int i = 0; i <= d; ++i)
              for (int p = 0; p < moments[n][i]; ++p) qn *= rule.points[q][i];
            const double w = rule.weights[q] * qn;
            for (int comp = 0; comp < ncomp; ++comp) {
              const double pairval = ta.dot(comp_mats[comp].second * tb);
              if (pairval == 0.0) continue;
              for (int mb = 0; mb < nbasis; ++mb)
                row[comp * nbasis + mb] += w * pairval * basis_vals[q][mb];
            }
          }
          rows.push_back(std::move(row));
        }
      }
  }

  require(static_cast<int>(rows.size()) == ncomp * nbasis,
          "build_local_dofs: dof count mismatch on cell " + std::to_string(cell));
  out.M.resize(rows.size(), ncomp * nbasis);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < ncomp * nbasis; ++c) out.M(r, c) = rows[r][c];
  return out;
}

}  // namespace

DofLayout dof_layout(const mesh::SimplicialMesh& m, int degree) {
  require(degree >= 0, "dof_layout: negative degree");
  DofLayout l;
  l.dim = m.dim;
  l.degree = degree;
  l.per_edge = dofs_per_entity(degree, 1);
  l.per_face = dofs_per_entity(degree, 2);
  l.per_cell_3d = m.dim == 3 ? dofs_per_entity(degree, 3) : 0;
  if (m.dim == 3)
    l.ndof = static_cast<long long>(m.n_ridges()) * l.per_edge +
             static_cast<long long>(m.n_facets()) * l.per_face +
             static_cast<long long>(m.n_cells()) * l.per_cell_3d;
  else
    l.ndof = static_cast<long long>(m.n_facets()) * l.per_edge +
             static_cast<long long>(m.n_cells()) * l.per_face;
  return l;
}

long long count_dofs(const mesh::SimplicialMesh& m, int degree) {
  return dof_layout(m, degree).ndof;
}

ReggeMetric::ReggeMetric(const mesh::SimplicialMesh& m, int degree)
    : mesh_(&m), degree_(degree) {
  require(m.connectivity_built, "ReggeMetric: connectivity not built");
  bases_.reserve(m.n_cells());
  for (int c = 0; c < m.n_cells(); ++c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= m.dim; ++a) verts[a] = m.cell_vertex(c, a);
    bases_.emplace_back(poly::simplex_geometry(m.dim, verts), degree);
  }
  const int ncomp = m.dim * (m.dim + 1) / 2;
  coefficients.assign(m.n_cells(),
                      std::vector<std::vector<double>>(ncomp, std::vector<double>(bases_[0].size(), 0.0)));
}

TensorJet ReggeMetric::jet(int cell, const Vec& x) const {
  const int dim = mesh_->dim;
  std::vector<double> vals;
  std::vector<Vec> grads;
  std::vector<Mat> hessians;
  bases_[cell].eval_jet(x, vals, grads, hessians);

  TensorJet out = TensorJet::zero(dim);
  int comp = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j, ++comp) {
      const auto& co = coefficients[cell][comp];
      double v = 0.0;
      Vec g = Vec::Zero(dim);
      Mat h = Mat::Zero(dim, dim);
      for (std::size_t mb = 0; mb < co.size(); ++mb) {
        v += co[mb] * vals[mb];
        g += co[mb] * grads[mb];
        h += co[mb] * hessians[mb];
      }
      out.value(i, j) = out.value(j, i) = v;
      for (int k = 0; k < dim; ++k) {
        out.d1[k](i, j) = g(k);
        out.d1[k](j, i) = g(k);
      }
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          out.d2[k][l](i, j) = h(k, l);
          out.d2[k][l](j, i) = h(k, l);
        }
    }
  return out;
}

std::string ReggeMetric::dump_coefficients_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"degree\":" << degree_ << ",\"cells\":[";
  for (std::size_t c = 0; c < coefficients.size(); ++c) {
    os << (c ? "," : "") << "[";
    for (std::size_t comp = 0; comp < coefficients[c].size(); ++comp) {
      os << (comp ? "," : "") << "[";
      for (std::size_t mb = 0; mb < coefficients[c][comp].size(); ++mb)
        os << (mb ? "," : "") << coefficients[c][comp][mb];
      os << "]";
    }
    os << "]";
  }
  os << "]}";
  return os.str();
}

ReggeMetric interpolate(const TensorField& field, const mesh::SimplicialMesh& m, int degree) {
  require(degree >= 0 && degree <= 2, "interpolate: degree must be 0, 1 or 2");
  require(field.dim() == m.dim, "interpolate: field/mesh dimension mismatch");

  ReggeMetric gh(m, degree);
  const int dim = m.dim;
  const int ncomp = dim * (dim + 1) / 2;
  const DofTable table = build_dof_table(m, degree);
  const auto cell_rule = quad::simplex_rule(dim, 2 * degree + 4);

  // local projections and dof evaluations, cell-parallel
  std::vector<LocalDofs> local(m.n_cells());
  std::vector<Eigen::VectorXd> dof_values(m.n_cells());
  parallel_for(m.n_cells(), [&](std::size_t c) {
    const auto& basis = gh.basis(static_cast<int>(c));
    auto coeffs = poly::l2_project(basis, cell_rule, ncomp,
                                   [&](int, const Vec& x, std::vector<double>& comps) {
                                     Mat v = field.value(x);
                                     int k = 0;
                                     for (int i = 0; i < dim; ++i)
                                       for (int j = i; j < dim; ++j) comps[k++] = v(i, j);
                                   });
    local[c] = build_local_dofs(m, table, basis, static_cast<int>(c));
    Eigen::VectorXd cvec(ncomp * basis.size());
    for (int comp = 0; comp < ncomp; ++comp)
      for (int mb = 0; mb < basis.size(); ++mb) cvec(comp * basis.size() + mb) = coeffs[comp][mb];
    dof_values[c] = local[c].M * cvec;
    gh.coefficients[c].assign(ncomp, std::vector<double>(basis.size(), 0.0));
    for (int comp = 0; comp < ncomp; ++comp)
      for (int mb = 0; mb < basis.size(); ++mb) gh.coefficients[c][comp][mb] = coeffs[comp][mb];
  });

  // arithmetic mean of each shared dof over its incident cells
  std::vector<double> global_sum(table.ndof, 0.0);
  std::vector<int> global_count(table.ndof, 0);
  for (int c = 0; c < m.n_cells(); ++c)
    for (std::size_t k = 0; k < local[c].global_ids.size(); ++k) {
      global_sum[local[c].global_ids[k]] += dof_values[c](k);
      global_count[local[c].global_ids[k]] += 1;
    }
  for (long long i = 0; i < table.ndof; ++i) {
    require(global_count[i] > 0, "interpolate: unused dof");
    global_sum[i] /= global_count[i];
  }

  // reconstruct each element from the averaged dof values
  parallel_for(m.n_cells(), [&](std::size_t c) {
    const auto& basis = gh.basis(static_cast<int>(c));
    Eigen::VectorXd d(local[c].global_ids.size());
    for (std::size_t k = 0; k < local[c].global_ids.size(); ++k)
      d(k) = global_sum[local[c].global_ids[k]];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(local[c].M);
    require(lu.isInvertible(),
            "interpolate: local dof matrix singular on cell " + std::to_string(c));
    Eigen::VectorXd cvec = lu.solve(d);
    for (int comp = 0; comp < ncomp; ++comp)
      for (int mb = 0; mb < basis.size(); ++mb)
        gh.coefficients[c][comp][mb] = cvec(comp * basis.size() + mb);
  });

  return gh;
}

double max_tt_jump(const mesh::SimplicialMesh& m, const CellTensorSource& src, int quad_degree) {
  const int dim = m.dim;
  const auto rule = quad::simplex_rule(dim - 1, quad_degree);
  double worst = 0.0;
  for (const auto& f : m.facets) {
    if (f.boundary) continue;
    Mat frame = Mat::Zero(dim, dim - 1);
    for (int a = 0; a < dim - 1; ++a)
      frame.col(a) = m.vertices[f.v[a + 1]] - m.vertices[f.v[0]];
    for (int q = 0; q < rule.size(); ++q) {
      Vec x = Vec::Zero(dim);
      for (int i = 0; i < dim; ++i) x += rule.points[q][i] * m.vertices[f.v[i]];
      Mat a = frame.transpose() * src.jet(f.cells[0], x).value * frame;
      Mat b = frame.transpose() * src.jet(f.cells[1], x).value * frame;
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

int count_spd_violations(const mesh::SimplicialMesh& m, const CellTensorSource& src,
                         int quad_degree) {
  const auto rule = quad::simplex_rule(m.dim, quad_degree);
  int bad = 0;
  for (int c = 0; c < m.n_cells(); ++c) {
    std::array<Vec, 4> verts;
    for (int a = 0; a <= m.dim; ++a) verts[a] = m.cell_vertex(c, a);
    for (int q = 0; q < rule.size(); ++q) {
      Vec x = Vec::Zero(m.dim);
      for (int i = 0; i <= m.dim; ++i) x += rule.points[q][i] * verts[i];
      if (!tensor::is_spd(src.jet(c, x).value)) ++bad;
    }
  }
  return bad;
}

TensorJet ScaledSource::jet(int cell, const Vec& x) const {
  const int d = dim();
  fields::ScalarJet s = v_->jet(x);
  TensorJet t = base_->jet(cell, x);
  TensorJet out = TensorJet::zero(d);
  out.value = s.value * t.value;
  for (int k = 0; k < d; ++k) out.d1[k] = s.grad(k) * t.value + s.value * t.d1[k];
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      out.d2[k][l] = s.hess(k, l) * t.value + s.grad(k) * t.d1[l] + s.grad(l) * t.d1[k] +
                     s.value * t.d2[k][l];
  return out;
}

}  // namespace regge::fe
