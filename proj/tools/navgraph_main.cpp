// navgraph: Gaussian graphical model inference with node-level auxiliary
// variables. Subcommands: simulate, fit, elicit, evaluate, reproduce.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "navgraph/ecm.hpp"
#include "navgraph/elicit.hpp"
#include "navgraph/grid.hpp"
#include "navgraph/io.hpp"
#include "navgraph/postprocess.hpp"
#include "navgraph/reproduce.hpp"
#include "navgraph/simgen.hpp"
#include "navgraph/special.hpp"
#include "navgraph/vbecm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace navgraph;

namespace {

int default_workers() {
  if (const char* env = std::getenv("NAVGRAPH_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json config_to_json(const ModelConfig& cfg) {
  return json{{"variant", to_string(cfg.variant)},
              {"lambda", cfg.lambda},
              {"nu0", cfg.nu0},
              {"nu1", cfg.nu1},
              {"a_tau", cfg.a_tau},
              {"b_tau", cfg.b_tau},
              {"a_sigma", cfg.a_sigma},
              {"b_sigma", cfg.b_sigma},
              {"a_o", cfg.a_o},
              {"b_o", cfg.b_o},
              {"n0", cfg.n0},
              {"t0_sq", cfg.t0_sq},
              {"max_iter", cfg.max_iter},
              {"elbo_tol", cfg.elbo_tol},
              {"seed", cfg.seed},
              {"scale_columns", cfg.scale_columns}};
}

struct FitCli {
  std::string data_path;
  std::string aux_path;
  std::string out_dir = ".";
  std::string model = "gmss";
  std::string engine = "vbecm";
  std::string criterion = "aic";
  std::vector<double> nu0_grid;
  double ebic_gamma = 0.5;
  double fdr = -1.0;
  double mean_edges = -1.0, sd_edges = -1.0;
  int workers = default_workers();
  std::uint64_t seed = 1;
  bool no_scale = false;
  int max_iter = 1000;
  double elbo_tol = 1e-5;
};

int run_fit(const FitCli& args) {
  DataMatrix data = read_data_csv(args.data_path);
  AuxiliaryMatrix aux;
  if (!args.aux_path.empty()) {
    aux = read_aux_csv(args.aux_path, data.node_names);
  }

  ModelConfig cfg;
  if (args.model == "gmstar") {
    cfg.variant = ModelVariant::GMStar;
  } else if (args.model == "gmn") {
    cfg.variant = ModelVariant::GMN;
  } else if (args.model == "gmss") {
    cfg.variant = ModelVariant::GMSS;
  } else {
    std::cerr << "unknown model: " << args.model << "\n";
    return 1;
  }
  cfg.seed = args.seed;
  cfg.scale_columns = !args.no_scale;
  cfg.max_iter = args.max_iter;
  cfg.elbo_tol = args.elbo_tol;

  EdgePriorTarget target =
      default_edge_target(static_cast<int>(data.n_nodes()));
  if (args.mean_edges > 0.0) target.mean_edges = args.mean_edges;
  if (args.sd_edges > 0.0) target.sd_edges = args.sd_edges;
  const auto [n0, t0_sq] = elicit_hyperparams(target);
  cfg.n0 = n0;
  cfg.t0_sq = t0_sq;

  const ValidationReport report = validate_inputs(data, aux, cfg);
  for (const auto& issue : report.issues) {
    std::cerr << (issue.severity == ValidationIssue::Severity::Error
                      ? "error: "
                      : "warning: ")
              << issue.message << "\n";
  }
  if (!report.ok()) return 1;

  GridSpec grid;
  if (!args.nu0_grid.empty()) grid.nu0_values = args.nu0_grid;
  if (args.criterion == "aic") {
    grid.criterion = SelectionCriterion::AIC;
  } else if (args.criterion == "bic") {
    grid.criterion = SelectionCriterion::BIC;
  } else if (args.criterion == "ebic") {
    grid.criterion = SelectionCriterion::EBIC;
  } else {
    std::cerr << "unknown criterion: " << args.criterion << "\n";
    return 1;
  }
  grid.ebic_gamma = args.ebic_gamma;
  grid.workers = args.workers;

  const EngineKind engine =
      args.engine == "ecm" ? EngineKind::ECM : EngineKind::VBECM;

  const auto t0 = std::chrono::steady_clock::now();
  const GridOutcome outcome = run_grid(data, aux, cfg, grid, engine);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const FitResult& best = outcome.best();

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);

  // edges.csv
  const Eigen::Index p = data.n_nodes();
  std::vector<double> ppis = upper_triangle(best.edge_ppi);
  const double kappa = args.fdr > 0.0 ? fdr_threshold(ppis, args.fdr) : 1.0;
  const Matrix& omega = best.vb ? best.vb->omega : best.pt->omega;
  std::vector<EdgeRecord> edges;
  int mpm_count = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      EdgeRecord e;
      e.node_i = data.node_names[i];
      e.node_j = data.node_names[j];
      e.ppi = best.edge_ppi(i, j);
      e.omega = omega(i, j);
      e.selected_mpm = e.ppi >= 0.5;
      e.selected_fdr = args.fdr > 0.0 && e.ppi > kappa;
      mpm_count += e.selected_mpm;
      edges.push_back(e);
    }
  }
  write_edges_csv(dir / "edges.csv", edges);

  // variables.csv
  std::vector<VariableRecord> vars;
  if (best.vb && best.vb->n_vars() > 0) {
    for (Eigen::Index q = 0; q < best.vb->n_vars(); ++q) {
      VariableRecord v;
      v.name = q < static_cast<Eigen::Index>(aux.var_names.size())
                   ? aux.var_names[q]
                   : "var_" + std::to_string(q + 1);
      v.ppi = best.vb->gamma1[q];
      v.beta_mean = best.vb->beta_mean[q];
      v.beta_sd = std::sqrt(best.vb->beta_var[q]);
      v.ci_low = v.beta_mean - 1.959963984540054 * v.beta_sd;
      v.ci_high = v.beta_mean + 1.959963984540054 * v.beta_sd;
      vars.push_back(v);
    }
  } else if (best.pt && best.pt->n_vars() > 0) {
    for (Eigen::Index q = 0; q < best.pt->n_vars(); ++q) {
      VariableRecord v;
      v.name = q < static_cast<Eigen::Index>(aux.var_names.size())
                   ? aux.var_names[q]
                   : "var_" + std::to_string(q + 1);
      v.ppi = best.pt->e_gamma[q];
      v.beta_mean = best.pt->beta[q];
      vars.push_back(v);
    }
  }
  write_variables_csv(dir / "variables.csv", vars);
  write_trace_csv(dir / "elbo_trace.csv", best.elbo_trace);

  // summary.json
  Vector degrees = Vector::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i != j && best.edge_ppi(i, j) >= 0.5) degrees[i] += 1.0;
    }
  }
  json grid_json = json::array();
  for (const auto& pt : outcome.points) {
    json gj{{"nu0", pt.nu0}, {"ok", pt.ok}, {"pd_ok", pt.pd_ok}};
    if (engine == EngineKind::ECM) gj["sigma0"] = pt.sigma0;
    if (pt.ok) {
      gj["aic"] = pt.fit.criteria.aic;
      gj["bic"] = pt.fit.criteria.bic;
      gj["ebic"] = pt.fit.criteria.ebic;
      gj["iterations"] = pt.fit.iterations;
      gj["converged"] = pt.fit.converged;
      gj["objective"] =
          pt.fit.elbo_trace.empty() ? 0.0 : pt.fit.elbo_trace.back();
    }
    if (!pt.error.empty()) gj["error"] = pt.error;
    grid_json.push_back(std::move(gj));
  }
  json degrees_json = json::array();
  for (Eigen::Index i = 0; i < p; ++i) degrees_json.push_back(degrees[i]);
  const double sparsity =
      static_cast<double>(mpm_count) / (0.5 * p * (p - 1.0));
  json summary{{"model", args.model},
               {"engine", args.engine},
               {"selected_nu0", best.nu0_used},
               {"criteria",
                {{"aic", best.criteria.aic},
                 {"bic", best.criteria.bic},
                 {"ebic", best.criteria.ebic}}},
               {"criterion", args.criterion},
               {"converged", best.converged},
               {"iterations", best.iterations},
               {"sparsity", sparsity},
               {"selected_edges", mpm_count},
               {"degrees", degrees_json},
               {"runtime_seconds", wall},
               {"grid", grid_json}};
  if (engine == EngineKind::ECM) {
    summary["selected_sigma0"] = best.sigma0_used;
  }
  if (args.fdr > 0.0) summary["fdr_threshold"] = kappa;
  write_json(dir / "summary.json", summary);

  // manifest.json
  json manifest{{"version", software_version()},
                {"created", timestamp()},
                {"seed", args.seed},
                {"workers", args.workers},
                {"engine", args.engine},
                {"criterion", args.criterion},
                {"config", config_to_json(cfg)},
                {"grid", grid_json},
                {"inputs",
                 {{"data",
                   {{"path", args.data_path},
                    {"digest", file_digest(args.data_path)}}}}}};
  if (!args.aux_path.empty()) {
    manifest["inputs"]["aux"] = {{"path", args.aux_path},
                                 {"digest", file_digest(args.aux_path)}};
  }
  write_json(dir / "manifest.json", manifest);

  return best.converged ? 0 : 2;
}

int run_simulate(const std::string& scenario, int replicates,
                 const std::string& out_dir, std::uint64_t seed) {
  ScenarioSpec spec = scenario_by_name(scenario, seed);
  const double zeta = tune_zeta(spec);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  for (int r = 0; r < replicates; ++r) {
    const Replicate rep = gen_replicate(spec, r, zeta);
    const fs::path rdir = dir / ("replicate_" + std::to_string(r + 1));
    fs::create_directories(rdir);
    write_data_csv(rdir / "Y.csv", rep.data);
    if (rep.aux.n_vars() > 0) {
      write_aux_csv(rdir / "V.csv", rep.aux, rep.data.node_names);
    }
    write_square_csv(rdir / "truth_adjacency.csv", rep.adjacency,
                     rep.data.node_names);
    write_effects_csv(rdir / "truth_effects.csv", rep.effects,
                      rep.aux.var_names);
    json manifest{
        {"version", software_version()},
        {"created", timestamp()},
        {"scenario", scenario},
        {"replicate", r + 1},
        {"replicate_seed", rep.seed},
        {"tuned_zeta", zeta},
        {"effect_distribution",
         "abs lognormal, parameters of the underlying normal"},
        {"noise_rule",
         "ceil(noise_level * threshold_edges); ceil(noise_level * pairs) "
         "when the thresholded part is structurally empty"},
        {"spec",
         {{"n_samples", spec.n_samples},
          {"n_nodes", spec.n_nodes},
          {"n_candidate_vars", spec.n_candidate_vars},
          {"n_active_vars", spec.n_active_vars},
          {"sparsity_target", spec.sparsity_target},
          {"noise_level", spec.noise_level},
          {"effect_mode", to_string(spec.effect_mode)},
          {"effect_meanlog", spec.effect_meanlog},
          {"effect_sdlog", spec.effect_sdlog},
          {"misspecified_similarity", spec.misspecified_similarity},
          {"bernoulli_adjacency", spec.uses_bernoulli()},
          {"seed", spec.seed}}}};
    write_json(rdir / "manifest.json", manifest);
  }
  std::cout << "wrote " << replicates << " replicate(s) of '" << scenario
            << "' to " << out_dir << "\n";
  return 0;
}

int run_evaluate(const std::string& truth_path, const std::string& ppis_path,
                 double max_fpr, const std::string& roc_out) {
  std::vector<std::string> names;
  const Matrix truth = read_square_csv(truth_path, &names);
  const auto edges = read_edges_csv(ppis_path);
  std::map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < names.size(); ++i) {
    index[names[i]] = static_cast<Eigen::Index>(i);
  }
  Matrix scores = Matrix::Zero(truth.rows(), truth.cols());
  for (const auto& e : edges) {
    const auto a = index.find(e.node_i), b = index.find(e.node_j);
    if (a == index.end() || b == index.end()) {
      std::cerr << "error: edge (" << e.node_i << ", " << e.node_j
                << ") names a node absent from the truth matrix\n";
      return 1;
    }
    scores(a->second, b->second) = scores(b->second, a->second) = e.ppi;
  }
  const auto truth_mask = upper_triangle_mask(truth, 0.5);
  const auto score_vec = upper_triangle(scores);
  const double value = pauc(truth_mask, score_vec, max_fpr);
  if (!roc_out.empty()) {
    const RocCurve curve = roc_curve(truth_mask, score_vec, max_fpr);
    std::ofstream out(roc_out);
    out << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : curve.points) {
      out << format_double(fpr) << ',' << format_double(tpr) << '\n';
    }
  }
  json j{{"pauc", value}, {"max_fpr", max_fpr}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_reproduce(const std::string& scenario, int replicates, int workers,
                  std::uint64_t seed, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (scenario == "ecm-vs-vbecm") {
    const EngineComparison cmp =
        run_engine_comparison(replicates, 20, workers, seed);
    json j{{"scenario", scenario},
           {"gm_variant",
            {{"vbecm_paucs", cmp.vbecm_paucs},
             {"ecm_paucs", cmp.ecm_paucs}}},
           {"multistart",
            {{"var_vbecm_elbo", cmp.var_vbecm_optima},
             {"var_ecm_objective", cmp.var_ecm_optima}}}};
    write_json(dir / "results.json", j);
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::vector<ModelVariant> models{ModelVariant::GMStar, ModelVariant::GMN,
                                   ModelVariant::GMSS};
  if (scenario == "null" || scenario == "similarity") {
    models = {ModelVariant::GMSS};
  }
  const ReplicatedStudy study = run_replicated_study(
      scenario, replicates, models, workers, seed, GridSpec{});
  std::ofstream table(dir / "results_table.csv");
  table << "scenario,model,edge_pauc_mean,edge_pauc_se,var_pauc_mean,"
           "var_pauc_se,replicates\n";
  json j{{"scenario", scenario},
         {"tuned_zeta", study.tuned_zeta},
         {"models", json::array()}};
  for (const auto& m : study.models) {
    table << scenario << ',' << m.model << ','
          << format_double(m.edge_pauc_mean) << ','
          << format_double(m.edge_pauc_se) << ','
          << format_double(m.var_pauc_mean) << ','
          << format_double(m.var_pauc_se) << ',' << m.n_replicates << '\n';
    j["models"].push_back(
        {{"model", m.model},
         {"edge_pauc_mean", m.edge_pauc_mean},
         {"edge_pauc_se", m.edge_pauc_se},
         {"var_pauc_mean", m.var_pauc_mean},
         {"var_pauc_se", m.var_pauc_se},
         {"edge_paucs", m.edge_paucs},
         {"var_paucs", m.var_paucs},
         {"selected_nu0", m.selected_nu0},
         {"frac_var_ppi_below_0.1", m.frac_var_ppi_below_01}});
  }
  write_json(dir / "results.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian graphical models with node-level auxiliary "
               "variables: spike-and-slab edge selection, probit "
               "hub-propensity submodel, VBECM/ECM inference"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "generate synthetic scenarios");
  std::string sim_scenario = "reference";
  int sim_replicates = 1;
  std::string sim_out = "sim_out";
  std::uint64_t sim_seed = 1;
  sim->add_option("--scenario", sim_scenario,
                  "reference|null|negative|combined|similarity|table1-rowK");
  sim->add_option("--replicates", sim_replicates);
  sim->add_option("--out", sim_out);
  sim->add_option("--seed", sim_seed);

  auto* fit = app.add_subcommand("fit", "fit a model to data");
  FitCli fit_args;
  fit->add_option("--data", fit_args.data_path, "Y.csv")->required();
  fit->add_option("--aux", fit_args.aux_path, "V.csv");
  fit->add_option("--out", fit_args.out_dir);
  fit->add_option("--model", fit_args.model, "gmstar|gmn|gmss");
  fit->add_option("--engine", fit_args.engine, "vbecm|ecm");
  fit->add_option("--nu0-grid", fit_args.nu0_grid)->delimiter(',');
  fit->add_option("--criterion", fit_args.criterion, "aic|bic|ebic");
  fit->add_option("--ebic-gamma", fit_args.ebic_gamma);
  fit->add_option("--fdr", fit_args.fdr, "FDR target for edge calling");
  fit->add_option("--mean-edges", fit_args.mean_edges);
  fit->add_option("--sd-edges", fit_args.sd_edges);
  fit->add_option("--workers", fit_args.workers);
  fit->add_option("--seed", fit_args.seed);
  fit->add_option("--max-iter", fit_args.max_iter);
  fit->add_option("--elbo-tol", fit_args.elbo_tol);
  fit->add_flag("--no-scale", fit_args.no_scale,
                "skip unit-variance scaling of the data columns");

  auto* eli =
      app.add_subcommand("elicit", "edge-count prior to (n0, t0_sq)");
  int eli_nodes = 0;
  double eli_mean = -1.0, eli_sd = -1.0;
  eli->add_option("--nodes", eli_nodes)->required();
  eli->add_option("--mean-edges", eli_mean);
  eli->add_option("--sd-edges", eli_sd);

  auto* eva = app.add_subcommand("evaluate", "pAUC of PPIs against truth");
  std::string eva_truth, eva_ppis, eva_roc;
  double eva_max_fpr = 0.1;
  eva->add_option("--truth", eva_truth)->required();
  eva->add_option("--ppis", eva_ppis)->required();
  eva->add_option("--max-fpr", eva_max_fpr);
  eva->add_option("--roc-out", eva_roc, "write ROC points CSV");

  auto* rep =
      app.add_subcommand("reproduce", "replicated synthetic experiments");
  std::string rep_scenario = "table1-row1";
  int rep_replicates = 20;
  int rep_workers = default_workers();
  std::uint64_t rep_seed = 1;
  std::string rep_out = "reproduce_out";
  rep->add_option("scenario", rep_scenario,
                  "table1-row1..12|null|similarity|ecm-vs-vbecm");
  rep->add_option("--replicates", rep_replicates);
  rep->add_option("--workers", rep_workers);
  rep->add_option("--seed", rep_seed);
  rep->add_option("--out", rep_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return run_simulate(sim_scenario, sim_replicates, sim_out, sim_seed);
    }
    if (fit->parsed()) return run_fit(fit_args);
    if (eli->parsed()) {
      EdgePriorTarget target = default_edge_target(eli_nodes);
      if (eli_mean > 0.0) target.mean_edges = eli_mean;
      if (eli_sd > 0.0) target.sd_edges = eli_sd;
      const auto [n0, t0_sq] = elicit_hyperparams(target);
      json j{{"n0", n0},
             {"t0_sq", t0_sq},
             {"mean_edges", target.mean_edges},
             {"sd_edges", target.sd_edges},
             {"nodes", eli_nodes}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (eva->parsed()) {
      return run_evaluate(eva_truth, eva_ppis, eva_max_fpr, eva_roc);
    }
    if (rep->parsed()) {
      return run_reproduce(rep_scenario, rep_replicates, rep_workers,
                           rep_seed, rep_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
