#include "regge/dualnorm.hpp"
#include "regge/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace regge;

void apply_config_file(CLI::App& app, std::string& config_path) {
  app.add_option("--config", config_path, "JSON file mirroring the command-line flags");
}

void merge_config(const std::string& path, study::StudyConfig& cfg) {
  if (path.empty()) return;
  std::ifstream is(path);
  regge::require(is.good(), "cannot open config file " + path);
  nlohmann::json j;
  is >> j;
  if (j.contains("metric")) cfg.metric = j["metric"].get<std::string>();
  if (j.contains("order")) cfg.order = j["order"].get<int>();
  if (j.contains("levels")) cfg.max_level = j["levels"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("perturb")) cfg.perturb = j["perturb"].get<bool>();
  if (j.contains("norm")) cfg.norm_mode = j["norm"].get<std::string>();
  if (j.contains("gauss")) cfg.gauss = j["gauss"].get<int>();
}

int cmd_mesh_gen(int dim, int level, bool perturb, std::uint64_t seed, const std::string& out) {
  auto m = mesh::generate_box_mesh(dim, level);
  if (perturb) m = mesh::perturb_interior_vertices(m, seed);
  if (out.empty())
    mesh::write_mesh(m, std::cout);
  else
    mesh::write_mesh(m, out);
  std::cerr << "cells " << m.n_cells() << " vertices " << m.n_vertices() << " facets "
            << m.n_facets() << " ridges " << m.n_ridges() << " hmax " << m.max_edge_length()
            << "\n";
  return 0;
}

int cmd_pair(const study::StudyConfig& cfg, const std::string& functional,
             const std::string& out) {
  auto metric = study::make_study_metric(cfg);
  mesh::SimplicialMesh m = study::study_mesh(cfg, cfg.max_level);
  auto gh = std::make_shared<fe::ReggeMetric>(fe::interpolate(*metric, m, cfg.order));
  auto gsrc = std::make_shared<fe::SmoothSource>(metric);

  nlohmann::json rep;
  rep["metric"] = cfg.metric;
  rep["order"] = cfg.order;
  rep["level"] = cfg.max_level;
  rep["seed"] = cfg.seed;
  rep["gauss"] = cfg.gauss;
  rep["ndof"] = fe::count_dofs(m, cfg.order);
  rep["h"] = m.max_edge_length();

  if (functional == "einstein") {
    fields::TestField rho = fields::make_bump_test_field(cfg.dim, 0);
    fe::SmoothSource rsrc(rho.field);
    auto pr = forms::pair_einstein_dist(m, *gh, rsrc, cfg.quad(), true);
    rep["volume_part"] = pr.volume_part;
    rep["facet_part"] = pr.facet_part;
    rep["ridge_part"] = pr.ridge_part;
    rep["total"] = pr.total;
  } else if (functional == "scalar") {
    auto one = std::make_shared<fields::PolyScalarField>(fields::Poly::constant(cfg.dim, 1.0));
    auto pr = forms::pair_scalar_dist(m, *gh, *one, cfg.quad());
    rep["volume_part"] = pr.volume_part;
    rep["facet_part"] = pr.facet_part;
    rep["ridge_part"] = pr.ridge_part;
    rep["total"] = pr.total;
    rep["half_total"] = 0.5 * pr.total;
  } else if (functional == "F123") {
    fields::TestField rho = fields::make_bump_test_field(cfg.dim, 0);
    fe::SmoothSource rsrc(rho.field);
    auto f = forms::codim2_functionals(m, gsrc, gh, rsrc, cfg.gauss, cfg.quad());
    rep["F1"] = f[0];
    rep["F2"] = f[1];
    rep["F3"] = f[2];
  } else {
    std::cerr << "unknown functional " << functional << "\n";
    return 2;
  }
  if (out.empty())
    std::cout << rep.dump(2) << "\n";
  else {
    std::ofstream os(out);
    os << rep.dump(2) << "\n";
  }
  return 0;
}

int cmd_norm(const study::StudyConfig& cfg, const std::string& out) {
  auto metric = study::make_study_metric(cfg);
  mesh::SimplicialMesh m = study::study_mesh(cfg, cfg.max_level);
  fe::ReggeMetric gh = fe::interpolate(*metric, m, cfg.order);
  fe::SmoothSource gsrc(metric);
  auto f = forms::einstein_error_functional(m, gsrc, gh, cfg.quad());
  auto rep = dual::hminus2_norm(m, f, cfg.order + 2);
  nlohmann::json j;
  j["level"] = cfg.max_level;
  j["order"] = cfg.order;
  j["dual_order"] = rep.order;
  j["ndof_per_component"] = rep.ndof_per_component;
  j["combined"] = rep.combined;
  j["components"] = rep.component_norms;
  for (const auto& s : rep.solves)
    j["solves"].push_back({{"method", s.method},
                           {"iterations", s.iterations},
                           {"rel_residual", s.rel_residual}});
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else {
    std::ofstream os(out);
    os << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributional Einstein curvature of Regge metrics: experiments and tools"};
  app.require_subcommand(1);

  // mesh-gen
  auto* sc_mesh = app.add_subcommand("mesh-gen", "generate a structured box mesh");
  int mg_dim = 3, mg_level = 0;
  bool mg_perturb = false;
  std::uint64_t mg_seed = 42;
  std::string mg_out;
  sc_mesh->add_option("--dim", mg_dim, "spatial dimension (2 or 3)");
  sc_mesh->add_option("--level", mg_level, "refinement level k");
  sc_mesh->add_flag("--perturb", mg_perturb, "randomly perturb interior vertices");
  sc_mesh->add_option("--seed", mg_seed, "perturbation seed");
  sc_mesh->add_option("--out", mg_out, "output file (stdout if omitted)");

  study::StudyConfig cfg;
  std::string config_path, out_path, functional = "einstein", gauss_list = "5";

  auto add_study_flags = [&](CLI::App* sc) {
    sc->add_option("--metric", cfg.metric, "graph3d or euclidean");
    sc->add_option("--order", cfg.order, "Regge polynomial degree r");
    sc->add_option("--levels", cfg.max_level, "finest refinement level");
    sc->add_option("--level", cfg.max_level, "refinement level (single-level commands)");
    sc->add_option("--seed", cfg.seed, "study seed");
    sc->add_option("--norm", cfg.norm_mode, "biharmonic or fixed-test-fields");
    sc->add_flag("--no-perturb", [&](std::int64_t) { cfg.perturb = false; },
                 "disable vertex perturbation");
    sc->add_option("--out", out_path, "output file");
    apply_config_file(*sc, config_path);
  };

  auto* sc_pair = app.add_subcommand("pair", "evaluate a distributional pairing");
  add_study_flags(sc_pair);
  sc_pair->add_option("--functional", functional, "einstein | scalar | F123");
  sc_pair->add_option("--gauss", cfg.gauss, "Gauss points for the parameter integral (5 or 7)");

  auto* sc_norm = app.add_subcommand("norm", "H^-2 norm of the error functional at one level");
  add_study_flags(sc_norm);

  auto* sc_conv = app.add_subcommand("converge", "run the convergence study");
  add_study_flags(sc_conv);
  sc_conv->add_option("--gauss", cfg.gauss, "Gauss points (recorded in metadata)");

  auto* sc_f123 = app.add_subcommand("f123", "codimension-2 functional study");
  add_study_flags(sc_f123);
  sc_f123->add_option("--gauss", gauss_list, "comma-separated Gauss point counts, e.g. 5,7");

  auto* sc_check = app.add_subcommand("check", "run the invariant battery");
  std::string suite = "all";
  sc_check->add_option("--suite", suite, "which suite (all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc_mesh->parsed()) return cmd_mesh_gen(mg_dim, mg_level, mg_perturb, mg_seed, mg_out);
    merge_config(config_path, cfg);
    if (sc_pair->parsed()) return cmd_pair(cfg, functional, out_path);
    if (sc_norm->parsed()) return cmd_norm(cfg, out_path);
    if (sc_conv->parsed()) {
      auto table = study::run_convergence(cfg);
      for (const auto& r : table.rows) {
        std::cout << "level " << r.level << "  h " << r.h << "  ndof " << r.ndof << "  error "
                  << r.error << "  eoc " << (r.eoc ? std::to_string(*r.eoc) : std::string("-"))
                  << "\n";
      }
      if (!out_path.empty()) {
        if (out_path.size() > 5 && out_path.substr(out_path.size() - 5) == ".json")
          study::emit_json(table, out_path);
        else
          study::emit_csv(table, out_path);
      }
      return 0;
    }
    if (sc_f123->parsed()) {
      std::vector<int> gps;
      std::stringstream ss(gauss_list);
      std::string tok;
      while (std::getline(ss, tok, ',')) gps.push_back(std::stoi(tok));
      auto rows = study::run_stagnation_study(cfg, gps);
      for (const auto& r : rows)
        std::cout << "level " << r.level << "  gauss " << r.gauss << "  |F1| " << r.f1 << "  |F2| "
                  << r.f2 << "  |F3| " << r.f3 << "\n";
      if (!out_path.empty()) study::emit_stagnation_csv(rows, out_path);
      return 0;
    }
    if (sc_check->parsed()) {
      int failures = study::run_check_suite(std::cout);
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
