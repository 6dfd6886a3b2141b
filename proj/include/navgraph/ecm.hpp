#pragma once

#include "navgraph/types.hpp"

namespace navgraph {

// ECM configuration: the continuous spike-and-slab on the auxiliary effects
// needs its own pair of scale parameters on top of the shared ModelConfig.
struct EcmConfig : ModelConfig {
  double sigma0 = 1e-2;  // top-level spike sd
  double sigma1 = 1.0;   // top-level slab sd
};

// Point-estimate engine: expectation step over the latent indicators and
// probit latents, conditional-maximisation steps for all parameters, Omega
// handled by the shared column sweep. Tracks the marginal log-posterior
// (latent indicators and probit latents integrated out) as the convergence
// objective.
class EcmEngine {
 public:
  EcmEngine(const DataMatrix& data, const AuxiliaryMatrix& aux,
            const EcmConfig& cfg);

  FitResult run();

  void e_step();
  // CM updates in order tau1 -> tau2 -> zeta -> beta_q -> o -> Omega.
  void cm_step();

  // Individual CM coordinates, exposed for the numeric oracles.
  void cm_tau1();
  void cm_tau2();
  void cm_zeta();
  void cm_beta(Eigen::Index q);
  void cm_o();
  void cm_omega();

  // Marginal log-posterior (up to an additive constant); the EM objective.
  double objective() const;

  // Complete-data objective given the current E-step caches (the classical
  // EM Q-function, additive constant dropped); used by the per-coordinate
  // maximisation oracles.
  double q_function() const;

  const PointState& state() const { return state_; }
  PointState& state() { return state_; }
  void set_state(const PointState& s);

  bool has_slab() const { return q_eff_ > 0; }
  bool has_selection() const {
    return q_eff_ > 0 && cfg_.variant == ModelVariant::GMSS &&
           !cfg_.pin_gamma_to_one;
  }
  Eigen::Index n_vars() const { return q_eff_; }

 private:
  void init_state();
  double alpha(Eigen::Index i, Eigen::Index j) const;

  EcmConfig cfg_;
  Matrix v_;
  Matrix gram_;
  double n_ = 0;
  Eigen::Index p_ = 0, q_eff_ = 0;
  Vector v_col_sum_, v_col_sq_sum_, v_pair_cross_;
  Vector node_sums_;
  PointState state_;
};

FitResult run_ecm(const DataMatrix& data, const AuxiliaryMatrix& aux,
                  const EcmConfig& cfg);

}  // namespace navgraph
