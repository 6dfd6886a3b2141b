#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navgraph/grid.hpp"
#include "navgraph/simgen.hpp"
#include "navgraph/types.hpp"

namespace navgraph {

// Per-model summary of a replicated synthetic experiment: mean and standard
// error of the standardised partial AUCs for edge selection and (GMSS)
// variable selection.
struct ModelSummary {
  std::string model;
  int n_replicates = 0;
  double edge_pauc_mean = 0.0, edge_pauc_se = 0.0;
  double var_pauc_mean = 0.0, var_pauc_se = 0.0;
  std::vector<double> edge_paucs, var_paucs;
  std::vector<double> selected_nu0;
  // Fraction of auxiliary PPIs below 0.1 (null/similarity diagnostics).
  std::vector<double> frac_var_ppi_below_01;
};

struct ReplicatedStudy {
  std::string scenario;
  ScenarioSpec spec;
  double tuned_zeta = 0.0;
  std::vector<ModelSummary> models;
};

// Runs R replicates of a named scenario and fits the requested model
// variants with the grid search; tasks are distributed over `workers`
// threads and seeded deterministically from `seed`.
ReplicatedStudy run_replicated_study(const std::string& scenario_name,
                                     int replicates,
                                     const std::vector<ModelVariant>& models,
                                     int workers, std::uint64_t seed,
                                     const GridSpec& grid_template,
                                     int max_iter = 1000);

// Paired VBECM-versus-ECM comparison on no-auxiliary data plus the
// multi-start dispersion experiment on one reference replicate.
struct EngineComparison {
  std::vector<double> vbecm_paucs, ecm_paucs;  // per replicate, GM variant
  std::vector<double> vbecm_optima, ecm_optima;  // multi-start objectives
  double var_vbecm_optima = 0.0, var_ecm_optima = 0.0;
};

EngineComparison run_engine_comparison(int replicates, int starts,
                                       int workers, std::uint64_t seed);

}  // namespace navgraph
