#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navgraph/types.hpp"

namespace navgraph {

enum class EffectMode { Positive, Negative, Combined };

std::string to_string(EffectMode m);

// Synthetic-network scenario. Realised networks combine auxiliary-induced
// edges (via the probit submodel on node annotations) with a fraction of
// uniformly placed "noise" edges, and the sparsity level zeta is tuned so
// that the expected overall edge fraction hits sparsity_target.
struct ScenarioSpec {
  int n_samples = 200;
  int n_nodes = 100;
  int n_candidate_vars = 50;
  int n_active_vars = 3;
  double sparsity_target = 0.03;
  double noise_level = 0.10;
  EffectMode effect_mode = EffectMode::Positive;
  bool misspecified_similarity = false;
  std::uint64_t seed = 1;

  // Active effect sizes are |LogNormal(effect_meanlog, effect_sdlog)| draws
  // (parameters of the underlying normal).
  double effect_meanlog = 0.5;
  double effect_sdlog = 0.1;

  // Edge generation: thresholding the probit probability at 0.5 (the
  // default) or Bernoulli draws from it. Repressing (negative/combined)
  // effects only register under Bernoulli draws, so those modes force it.
  bool bernoulli_adjacency = false;

  bool uses_bernoulli() const {
    return bernoulli_adjacency || misspecified_similarity ||
           effect_mode != EffectMode::Positive;
  }
};

struct Replicate {
  DataMatrix data;
  AuxiliaryMatrix aux;
  Matrix adjacency;   // symmetric 0/1 truth
  Matrix precision;   // the generating precision matrix
  Vector effects;     // true auxiliary effects (length Q)
  std::vector<int> active_vars;
  double zeta = 0.0;
  std::uint64_t seed = 0;
};

// P x Q right-skewed annotations: iid Beta(0.05, 0.2) draws.
AuxiliaryMatrix gen_auxiliary(const ScenarioSpec& spec, std::uint64_t seed);

// Q0 active indices drawn without replacement; active magnitudes from the
// log-normal above, signs per effect_mode (combined alternates, first
// active variable positive). Inactive entries are zero.
Vector gen_effects(const ScenarioSpec& spec, std::uint64_t seed,
                   std::vector<int>* active_out = nullptr);

// Adjacency by thresholding Phi(zeta + v_i beta + v_j beta) at 0.5, then
// turning a noise fraction of the remaining zero pairs into edges:
// ceil(noise_level * #threshold-edges) when threshold edges exist,
// ceil(noise_level * #zero-pairs) when the thresholded part is empty (the
// null construction). Noise edges are disjoint from threshold edges.
Matrix gen_adjacency(const Matrix& v, const Vector& beta, double zeta,
                     double noise_level, std::uint64_t seed);

// Same contract with Bernoulli edge draws instead of thresholding.
Matrix gen_adjacency_bernoulli(const Matrix& v, const Vector& beta,
                               double zeta, double noise_level,
                               std::uint64_t seed);

// Precision matrix on the support of A: symmetric +/- Unif(0.25, 0.75)
// entries where A_ij = 1, then a diagonal shift of 0.1 minus the smallest
// eigenvalue, which makes the result positive definite with smallest
// eigenvalue 0.1.
Matrix gen_precision(const Matrix& adjacency, std::uint64_t seed);

// N draws from the zero-mean Gaussian with precision omega, via triangular
// solves against the Cholesky factor (the covariance is never formed).
DataMatrix gen_samples(const Matrix& omega, int n_samples,
                       std::uint64_t seed);

// Tuned sparsity intercept: bisection on zeta so that the expected realised
// edge fraction (threshold or Bernoulli part plus noise) matches
// sparsity_target, averaged over 50 annotation draws from a fixed tuner
// stream. Pure function of the scenario's structural fields.
double tune_zeta(const ScenarioSpec& spec);

// Full replicate: annotations, effects, adjacency, precision, samples.
// Stream seed is spec.seed + replicate_index.
Replicate gen_replicate(const ScenarioSpec& spec, int replicate_index,
                        double tuned_zeta);

// The misspecified similarity-based generator: two active variables (columns
// 2 and 44) drawn from three bivariate-normal node groups, inactive
// variables standard normal, and edges Bernoulli with predictor
// zeta + sum_q exp(-|V_iq - V_jq|) beta_q. Requires P = 100, Q = 50.
Replicate gen_similarity_scenario(const ScenarioSpec& spec,
                                  int replicate_index, double tuned_zeta);

// Named scenario presets used by the CLI: "reference", "null", "negative",
// "combined", "similarity", "table1-row1" ... "table1-row12".
ScenarioSpec scenario_by_name(const std::string& name, std::uint64_t seed);

}  // namespace navgraph
