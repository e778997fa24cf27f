#include "regge/harness.hpp"

#include "regge/geometry.hpp"
#include "regge/quadrature.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace regge::study {

namespace {

double phi(double t) { return t - t * t * t / 3.0; }     // f' in one variable
double dphi(double t) { return 1.0 - t * t; }
double d2phi(double t) { return -2.0 * t; }
double qpoly(double t) {
  double s = t * t - 3.0;
  return t * t * s * s;
}

}  // namespace

fields::TensorJet GraphMetric::jet(const Vec& x) const {
  const int d = dim_;
  fields::TensorJet out = fields::TensorJet::zero(d);
  Vec p(d), dp(d), d2p(d);
  for (int i = 0; i < d; ++i) {
    p(i) = phi(x(i));
    dp(i) = dphi(x(i));
    d2p(i) = d2phi(x(i));
  }
  out.value = Mat::Identity(d, d) + p * p.transpose();
  for (int k = 0; k < d; ++k) {
    Mat dk = Mat::Zero(d, d);
    for (int j = 0; j < d; ++j) {
      dk(k, j) += dp(k) * p(j);
      dk(j, k) += p(j) * dp(k);
    }
    out.d1[k] = dk;
  }
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      Mat m = Mat::Zero(d, d);
      // d_l d_k (p_i p_j) with p_i depending on x_i only
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double v = 0.0;
          if (i == k && i == l) v += d2p(i) * p(j);
          if (i == k && j == l) v += dp(i) * dp(j);
          if (j == k && i == l) v += dp(i) * dp(j);
          if (j == k && j == l) v += p(i) * d2p(j);
          m(i, j) = v;
        }
      out.d2[k][l] = m;
    }
  return out;
}

double GraphMetric::det_identity_rhs(const Vec& x) {
  double s = 9.0;
  for (int i = 0; i < x.size(); ++i) s += qpoly(x(i));
  return s;
}

double GraphMetric::exact_scalar_curvature(const Vec& x) {
  const double X = x(0), Y = x(1), Z = x(2);
  const double D = 9.0 + qpoly(X) + qpoly(Y) + qpoly(Z);
  const double num = 18.0 * ((1 - X * X) * (1 - Y * Y) * (9 + qpoly(Z)) +
                             (1 - Y * Y) * (1 - Z * Z) * (9 + qpoly(X)) +
                             (1 - Z * Z) * (1 - X * X) * (9 + qpoly(Y)));
  return num / (D * D);
}

Mat GraphMetric::exact_ricci(const Vec& x) {
  const double X = x(0), Y = x(1), Z = x(2);
  const double D = 9.0 + qpoly(X) + qpoly(Y) + qpoly(Z);
  const double D2 = D * D;
  Mat ric(3, 3);
  ric(0, 0) = 9.0 * (X * X - 1) *
              ((Y * Y + Z * Z - 2) * (qpoly(X) + 9) + (Z * Z - 1) * qpoly(Y) +
               qpoly(Z) * (Y * Y - 1)) /
              D2;
  ric(1, 1) = 9.0 * (Y * Y - 1) *
              ((X * X + Z * Z - 2) * (qpoly(Y) + 9) + (Z * Z - 1) * qpoly(X) +
               qpoly(Z) * (X * X - 1)) /
              D2;
  ric(2, 2) = 9.0 * (Z * Z - 1) *
              ((Y * Y + X * X - 2) * (qpoly(Z) + 9) + (X * X - 1) * qpoly(Y) +
               qpoly(X) * (Y * Y - 1)) /
              D2;
  ric(0, 1) = ric(1, 0) = 9.0 * (Y * Y - 3) * Y * (X * X - 3) * X * (X * X - 1) * (Y * Y - 1) / D2;
  ric(0, 2) = ric(2, 0) = 9.0 * (Z * Z - 3) * Z * (X * X - 3) * X * (X * X - 1) * (Z * Z - 1) / D2;
  ric(1, 2) = ric(2, 1) = 9.0 * (Y * Y - 3) * Y * (Z * Z - 3) * Z * (Z * Z - 1) * (Y * Y - 1) / D2;
  return ric;
}

Mat GraphMetric::exact_einstein(const Vec& x) {
  GraphMetric g(3);
  Mat gv = g.jet(x).value;
  return exact_ricci(x) - 0.5 * exact_scalar_curvature(x) * gv;
}

std::vector<std::optional<double>> compute_eoc(const std::vector<double>& errors,
                                               const std::vector<double>& hs) {
  require(errors.size() == hs.size(), "compute_eoc: length mismatch");
  std::vector<std::optional<double>> eoc(errors.size());
  for (std::size_t k = 1; k < errors.size(); ++k) {
    if (errors[k - 1] > 0.0 && errors[k] > 0.0 && hs[k - 1] > 0.0 && hs[k] > 0.0 &&
        hs[k - 1] != hs[k])
      eoc[k] = std::log(errors[k - 1] / errors[k]) / std::log(hs[k - 1] / hs[k]);
  }
  return eoc;
}

void emit_csv(const ConvergenceTable& table, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), "emit_csv: cannot open " + path);
  os << "level,h,ndof,error,eoc\n";
  os << std::setprecision(16);
  for (const auto& r : table.rows) {
    os << r.level << "," << r.h << "," << r.ndof << "," << r.error << ",";
    if (r.eoc) os << *r.eoc;
    os << "\n";
  }
  require(os.good(), "emit_csv: write failed");
}

void emit_json(const ConvergenceTable& table, const std::string& path) {
  nlohmann::json j;
  j["metadata"] = nlohmann::json::object();
  for (const auto& [k, v] : table.metadata) j["metadata"][k] = v;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json row;
    row["level"] = r.level;
    row["h"] = r.h;
    row["ndof"] = r.ndof;
    row["error"] = r.error;
    if (r.eoc)
      row["eoc"] = *r.eoc;
    else
      row["eoc"] = nullptr;
    j["rows"].push_back(row);
  }
  std::ofstream os(path);
  require(os.good(), "emit_json: cannot open " + path);
  os << j.dump(2) << "\n";
}

ConvergenceTable read_table_json(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "read_table_json: cannot open " + path);
  nlohmann::json j;
  is >> j;
  ConvergenceTable t;
  for (auto& [k, v] : j["metadata"].items()) t.metadata.push_back({k, v.get<std::string>()});
  for (auto& row : j["rows"]) {
    TableRow r;
    r.level = row["level"].get<int>();
    r.h = row["h"].get<double>();
    r.ndof = row["ndof"].get<long long>();
    r.error = row["error"].get<double>();
    if (!row["eoc"].is_null()) r.eoc = row["eoc"].get<double>();
    t.rows.push_back(r);
  }
  return t;
}

std::shared_ptr<const fields::TensorField> make_study_metric(const StudyConfig& cfg) {
  if (cfg.metric == "graph3d" || cfg.metric == "graph")
    return std::make_shared<GraphMetric>(cfg.dim);
  if (cfg.metric == "euclidean")
    return std::make_shared<fields::PolyTensorField>(
        fields::PolyTensorField::constant(Mat::Identity(cfg.dim, cfg.dim)));
  fail("unknown metric '" + cfg.metric + "' (expected graph3d or euclidean)");
}

mesh::SimplicialMesh study_mesh(const StudyConfig& cfg, int level) {
  mesh::SimplicialMesh m = mesh::generate_box_mesh(cfg.dim, level);
  if (cfg.perturb) m = mesh::perturb_interior_vertices(m, rng_word(cfg.seed, 1000 + level));
  return m;
}

ConvergenceTable run_convergence(const StudyConfig& cfg) {
  require(cfg.norm_mode == "biharmonic" || cfg.norm_mode == "fixed-test-fields",
          "run_convergence: unknown norm mode " + cfg.norm_mode);
  auto metric = make_study_metric(cfg);
  ConvergenceTable table;
  std::vector<double> errors, hs;
  for (int level = 0; level <= cfg.max_level; ++level) {
    mesh::SimplicialMesh m = study_mesh(cfg, level);
    fe::ReggeMetric gh = fe::interpolate(*metric, m, cfg.order);
    fe::SmoothSource gsrc(metric);
    auto f = forms::einstein_error_functional(m, gsrc, gh, cfg.quad());
    double error;
    if (cfg.norm_mode == "biharmonic")
      error = dual::hminus2_norm(m, f, cfg.order + 2).combined;
    else
      error = fixed_test_field_norm(m, f);
    TableRow row;
    row.level = level;
    row.h = m.max_edge_length();
    row.ndof = fe::count_dofs(m, cfg.order);
    row.error = error;
    errors.push_back(error);
    hs.push_back(row.h);
    table.rows.push_back(row);
  }
  auto eoc = compute_eoc(errors, hs);
  for (std::size_t k = 0; k < table.rows.size(); ++k) table.rows[k].eoc = eoc[k];
  table.metadata = {{"metric", cfg.metric},
                    {"order", std::to_string(cfg.order)},
                    {"levels", std::to_string(cfg.max_level)},
                    {"seed", std::to_string(cfg.seed)},
                    {"perturb", cfg.perturb ? "true" : "false"},
                    {"norm", cfg.norm_mode},
                    {"gauss", std::to_string(cfg.gauss)},
                    {"note", "absolute error values depend on the dual-norm discretization "
                             "and the random perturbation; convergence orders are the "
                             "reproducible quantity"}};
  return table;
}

std::vector<StagnationRow> run_stagnation_study(const StudyConfig& cfg,
                                                const std::vector<int>& gauss_counts) {
  require(cfg.dim == 3, "run_stagnation_study: dim 3 only");
  auto metric = make_study_metric(cfg);
  std::vector<StagnationRow> rows;
  for (int level = 0; level <= cfg.max_level; ++level) {
    mesh::SimplicialMesh m = study_mesh(cfg, level);
    auto gh = std::make_shared<fe::ReggeMetric>(fe::interpolate(*metric, m, cfg.order));
    auto gsrc = std::make_shared<fe::SmoothSource>(metric);

    dual::LagrangeSpace space(m, cfg.order + 2);
    dual::SparseMatrix A = dual::assemble_biharmonic(space);
    dual::SpdSolver solver(A);
    auto norm_of = [&](const forms::PointFunctional& f) {
      auto loads = dual::apply_functional_to_basis(space, f);
      double sum_sq = 0.0;
      for (const auto& load : loads) {
        Eigen::VectorXd u = solver.solve(load);
        double nrm = dual::discrete_h2_norm(space, u, 2 * space.order());
        sum_sq += nrm * nrm;
      }
      return std::sqrt(sum_sq);
    };

    for (int gp : gauss_counts) {
      StagnationRow row;
      row.level = level;
      row.h = m.max_edge_length();
      row.ndof = fe::count_dofs(m, cfg.order);
      row.gauss = gp;
      row.f1 = norm_of(
          forms::codim2_point_functional(m, gsrc, gh, gp, cfg.quad(), forms::Codim2Part::F1));
      row.f2 = norm_of(
          forms::codim2_point_functional(m, gsrc, gh, gp, cfg.quad(), forms::Codim2Part::F2));
      row.f3 = norm_of(
          forms::codim2_point_functional(m, gsrc, gh, gp, cfg.quad(), forms::Codim2Part::F3));
      rows.push_back(row);
    }
  }
  return rows;
}

void emit_stagnation_csv(const std::vector<StagnationRow>& rows, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), "emit_stagnation_csv: cannot open " + path);
  os << "level,h,ndof,gauss,F1,F2,F3\n";
  os << std::setprecision(16);
  for (const auto& r : rows)
    os << r.level << "," << r.h << "," << r.ndof << "," << r.gauss << "," << r.f1 << "," << r.f2
       << "," << r.f3 << "\n";
}

double fixed_test_field_norm(const mesh::SimplicialMesh& m, const forms::PointFunctional& f) {
  const int dim = m.dim;
  const auto rule = quad::simplex_rule(dim, 12);
  double best = 0.0;
  for (int idx = 0; idx < 6; ++idx) {
    fields::TestField rho = fields::make_bump_test_field(dim, idx);
    double val = std::abs(forms::apply_point_functional(f, *rho.field));
    // H2 norm of the analytic field over the box
    double h2 = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) {
      std::array<Vec, 4> verts;
      for (int a = 0; a <= dim; ++a) verts[a] = m.cell_vertex(c, a);
      Mat J = Mat::Zero(dim, dim);
      for (int a = 0; a < dim; ++a) J.col(a) = verts[a + 1] - verts[0];
      const double absdet = std::abs(J.determinant());
      for (int q = 0; q < rule.size(); ++q) {
        Vec x = Vec::Zero(dim);
        for (int i = 0; i <= dim; ++i) x += rule.points[q][i] * verts[i];
        fields::TensorJet jet = rho.field->jet(x);
        double val2 = (jet.value.array() * jet.value.array()).sum();
        for (int k = 0; k < dim; ++k) val2 += (jet.d1[k].array() * jet.d1[k].array()).sum();
        for (int k = 0; k < dim; ++k)
          for (int l = 0; l < dim; ++l)
            val2 += (jet.d2[k][l].array() * jet.d2[k][l].array()).sum();
        h2 += rule.weights[q] * absdet * val2;
      }
    }
    best = std::max(best, val / std::sqrt(h2));
  }
  return best;
}

int run_check_suite(std::ostream& os) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    os << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    GraphMetric g(3);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Vec x(3);
      for (int c = 0; c < 3; ++c) x(c) = rng_uniform_sym(99, 3 * i + c);
      double lhs = g.jet(x).value.determinant() * 9.0;
      double rhs = GraphMetric::det_identity_rhs(x);
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    check("graph-metric determinant identity (1000 points)", worst < 1e-12);
  }
  {
    GraphMetric g(3);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Vec x(3);
      for (int c = 0; c < 3; ++c) x(c) = rng_uniform_sym(7, 3 * i + c);
      auto mj = geo::make_metric_jet(g.jet(x));
      auto cv = geo::curvature(mj, geo::christoffel(mj));
      worst = std::max(worst, std::abs(cv.scalar - GraphMetric::exact_scalar_curvature(x)) /
                                  std::abs(GraphMetric::exact_scalar_curvature(x)));
      worst = std::max(worst, (cv.ric - GraphMetric::exact_ricci(x)).norm() /
                                  GraphMetric::exact_ricci(x).norm());
    }
    check("curvature kernel vs closed forms (100 points)", worst < 1e-9);
  }
  {
    bool ok = true;
    for (int k = 0; k <= 3; ++k) {
      auto m = mesh::generate_box_mesh(3, k);
      long long euler = m.n_vertices() - m.n_ridges() + m.n_facets() - m.n_cells();
      if (euler != 1) ok = false;
      if (std::abs(m.total_volume() - 8.0) > 1e-12 * 8.0) ok = false;
    }
    check("box mesh Euler characteristic and volume (k<=3)", ok);
  }
  {
    auto rule = quad::simplex_rule(3, 8);
    double worst = 0.0;
    for (int a = 0; a <= 8; ++a)
      for (int b = 0; a + b <= 8; ++b)
        for (int c = 0; a + b + c <= 8; ++c) {
          double val = 0.0;
          for (int q = 0; q < rule.size(); ++q) {
            double x = rule.points[q][1], y = rule.points[q][2], z = rule.points[q][3];
            val += rule.weights[q] * std::pow(x, a) * std::pow(y, b) * std::pow(z, c);
          }
          worst = std::max(worst, std::abs(val - quad::reference_monomial_integral(3, {a, b, c})));
        }
    check("tetrahedron quadrature exactness (degree 8)", worst < 1e-14);
  }
  return failures;
}

}  // namespace regge::study
