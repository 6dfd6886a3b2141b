#pragma once

#include <functional>
#include <string>
#include <vector>

#include "navgraph/ecm.hpp"
#include "navgraph/types.hpp"

namespace navgraph {

enum class SelectionCriterion { AIC, BIC, EBIC };

std::string to_string(SelectionCriterion c);

struct GridSpec {
  std::vector<double> nu0_values;     // empty -> default grid
  double nu1 = 100.0;
  SelectionCriterion criterion = SelectionCriterion::AIC;
  double ebic_gamma = 0.5;
  int workers = 1;
  // Spike sds of the top-level continuous spike-and-slab explored by the
  // ECM double grid; ignored by the VBECM engine and by variants without
  // auxiliary effects.
  std::vector<double> sigma0_values;
};

// Nine log-spaced spike sds between 0.01 and 1.
std::vector<double> default_nu0_grid();

// {1e-6, 1e-3, 1e-2, 1e-1}; the smallest value mimics a discrete spike.
std::vector<double> default_sigma0_grid();

// Thresholded precision matrix: off-diagonal entries are kept only where the
// edge PPI reaches 0.5; the diagonal is always kept.
Matrix threshold_precision(const FitResult& fit);

// Model-selection criteria on the thresholded precision matrix:
//   AIC  = -N log|O*| + tr(Y'Y O*) + 2 k
//   BIC  = -N log|O*| + tr(Y'Y O*) + log(N) k
//   EBIC = BIC + 4 gamma log(P) k
// with k the number of selected edges. A thresholded matrix that loses
// positive definiteness disqualifies the grid point (+inf criteria).
Criteria compute_criteria(const FitResult& fit, const Matrix& gram,
                          double n_samples, double ebic_gamma,
                          bool* pd_ok = nullptr);

struct GridPoint {
  double nu0 = 0.0;
  double sigma0 = 0.0;  // 0 when not applicable
  bool ok = false;
  bool pd_ok = true;
  std::string error;
  FitResult fit;
};

struct GridOutcome {
  int best_index = -1;
  std::vector<GridPoint> points;

  const FitResult& best() const { return points.at(best_index).fit; }
};

// Runs one independent fit per grid point across a worker pool and picks the
// point minimising the requested criterion. Grid point k is seeded with
// cfg.seed + k, so the result set does not depend on worker scheduling.
// Individual failures are recorded; only an all-failed grid throws.
GridOutcome run_grid(const DataMatrix& data, const AuxiliaryMatrix& aux,
                     const ModelConfig& cfg, const GridSpec& grid,
                     EngineKind engine, double ecm_sigma1 = 1.0);

// Minimal fixed-size worker pool: runs tasks 0..n-1, each task claimed by an
// atomic counter. Results must be written to caller-owned slots.
void parallel_for(int n_tasks, int workers,
                  const std::function<void(int)>& task);

}  // namespace navgraph
