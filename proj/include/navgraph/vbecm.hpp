#pragma once

#include "navgraph/types.hpp"

namespace navgraph {

// Node-sum cache for the probit linear predictor
//   alpha_ij = zeta^(1) + sum_q V_iq beta_q^(1) + sum_q V_jq beta_q^(1).
// node_sums holds sum_q V_iq beta_q^(1) and is maintained incrementally as
// individual beta factors move.
struct LinearPredictorCache {
  Vector node_sums;  // length P
  double zeta = 0.0;

  double alpha(Eigen::Index i, Eigen::Index j) const {
    return zeta + node_sums[i] + node_sums[j];
  }
  // Dense materialisation (upper triangle mirrored), mainly for checks.
  Matrix alpha_matrix() const;
};

inline constexpr int kMaxInnerRounds = 200;

// Coordinate-ascent variational engine for the GM*/GMN/GMSS family:
// closed-form updates for every factor except the precision matrix, which is
// handled by conditional-maximisation column sweeps. A single engine object
// owns its state exclusively; independent fits may run concurrently.
class VbecmEngine {
 public:
  VbecmEngine(const DataMatrix& data, const AuxiliaryMatrix& aux,
              const ModelConfig& cfg);

  FitResult run();

  // Individual update steps, exposed for the per-factor test oracles. Each
  // one maximises the ELBO over its own factor with the others held fixed.
  void update_edges();
  void update_tau();
  void update_beta_gamma(Eigen::Index q);
  void update_zeta();
  void update_sigma();
  void update_o();
  void cm_omega();

  // ELBO of the current state. Exact at any point of the sweep: the edge
  // factor terms keep the linear predictor frozen at its last refresh, so no
  // consistency between the edge factor and the current (zeta, beta) moments
  // is assumed.
  double elbo() const;

  // One pass over the variational factors in the pinned order (edges ->
  // tau -> (beta, gamma)_q -> zeta -> sigma -> o).
  void vbe_pass();
  // VBE-step: repeats vbe_pass until the bound stabilises (omega fixed).
  void vbe_step();
  // One VBE pass plus a CM sweep (used by the single-step tests).
  void full_sweep();

  const VariationalState& state() const { return state_; }
  VariationalState& state() { return state_; }

  // Replaces the state (test hook); derived caches are refreshed.
  void set_state(const VariationalState& s);

  const LinearPredictorCache& cache() const { return cache_; }
  void refresh_cache();

  // True when the variant carries auxiliary slab effects (GMN/GMSS with
  // Q > 0), resp. the discrete variable-selection layer (GMSS only).
  bool has_slab() const { return q_eff_ > 0; }
  bool has_selection() const { return selection_; }

  Eigen::Index n_vars() const { return q_eff_; }
  const Matrix& gram() const { return gram_; }

 private:
  void init_state();
  void refresh_z_sums();

  ModelConfig cfg_;
  Matrix v_;      // P x q_eff
  Matrix gram_;   // Y^T Y of the centred data
  double n_ = 0;
  Eigen::Index p_ = 0, q_eff_ = 0;
  bool selection_ = false;

  // Column statistics of V reused by every beta update.
  Vector v_col_sum_, v_col_sq_sum_, v_pair_cross_;

  VariationalState state_;
  LinearPredictorCache cache_;
  Vector z_row_sums_;
  double z_sum_all_ = 0.0;
};

// Fits the model end to end: validation is assumed done, data is centred
// (and by default scaled) internally. Each outer iteration runs the
// VBE-step to convergence in the factor order
//   edges -> tau -> (beta, gamma)_q -> zeta -> sigma -> o,
// then one CM column sweep for Omega; the loop stops when the relative
// ELBO change stays below cfg.elbo_tol on two consecutive iterations or
// max_iter is reached (non-convergence is reported, not thrown).
FitResult run_vbecm(const DataMatrix& data, const AuxiliaryMatrix& aux,
                    const ModelConfig& cfg);

}  // namespace navgraph
