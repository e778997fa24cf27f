#pragma once

#include "regge/dualnorm.hpp"
#include "regge/fields.hpp"
#include "regge/functionals.hpp"
#include "regge/mesh.hpp"
#include "regge/regge_space.hpp"

#include <optional>
#include <string>
#include <vector>

namespace regge::study {

/// Metric induced by the graph embedding x -> (x, f(x)) with
/// f = |x|^2/2 - sum_i x_i^4/12: g = I + grad f grad f^T. Defined for
/// dim 2 and 3; closed-form curvature is available in dim 3.
class GraphMetric : public fields::TensorField {
 public:
  explicit GraphMetric(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  fields::TensorJet jet(const Vec& x) const override;

  /// det g * 9 = 9 + q(x)+q(y)+q(z) with q(t) = t^2 (t^2-3)^2 (dim 3).
  static double det_identity_rhs(const Vec& x);

  /// Closed-form scalar curvature and Ricci tensor (dim 3 only).
  static double exact_scalar_curvature(const Vec& x);
  static Mat exact_ricci(const Vec& x);
  static Mat exact_einstein(const Vec& x);

 private:
  int dim_;
};

struct TableRow {
  int level = 0;
  double h = 0.0;
  long long ndof = 0;
  double error = 0.0;
  std::optional<double> eoc;
};

struct ConvergenceTable {
  std::vector<TableRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
};

/// EOC_k = log(e_{k-1}/e_k) / log(h_{k-1}/h_k); null where an error is
/// not positive.
std::vector<std::optional<double>> compute_eoc(const std::vector<double>& errors,
                                               const std::vector<double>& hs);

void emit_csv(const ConvergenceTable& table, const std::string& path);
void emit_json(const ConvergenceTable& table, const std::string& path);
ConvergenceTable read_table_json(const std::string& path);

struct StudyConfig {
  std::string metric = "graph3d";  // graph3d | euclidean
  int dim = 3;
  int order = 1;
  int max_level = 3;
  std::uint64_t seed = 42;
  bool perturb = true;
  std::string norm_mode = "biharmonic";  // biharmonic | fixed-test-fields
  int gauss = 5;
  forms::QuadConfig quad() const { return forms::QuadConfig::for_degree(order); }
};

std::shared_ptr<const fields::TensorField> make_study_metric(const StudyConfig& cfg);

/// Per-level mesh for a study: structured level-k box mesh, perturbed with a
/// level-fresh stream of the study seed.
mesh::SimplicialMesh study_mesh(const StudyConfig& cfg, int level);

/// Full error study: interpolate, assemble the error functional, measure it
/// in the configured norm, tabulate EOC.
ConvergenceTable run_convergence(const StudyConfig& cfg);

struct StagnationRow {
  int level = 0;
  double h = 0.0;
  long long ndof = 0;
  int gauss = 0;
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
};

/// Norms of the codimension-2 functionals F1, F2, F3 per level, for each
/// requested Gauss point count.
std::vector<StagnationRow> run_stagnation_study(const StudyConfig& cfg,
                                                const std::vector<int>& gauss_counts);

void emit_stagnation_csv(const std::vector<StagnationRow>& rows, const std::string& path);

/// Lower bound of the dual norm: max_i |<f, rho_i>| / ||rho_i||_{H2} over a
/// fixed catalog of compactly supported fields.
double fixed_test_field_norm(const mesh::SimplicialMesh& m, const forms::PointFunctional& f);

/// Fast invariant battery for `check --suite all`; returns the number of
/// failures and prints one line per check.
int run_check_suite(std::ostream& os);

}  // namespace regge::study
