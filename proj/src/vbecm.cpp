#include "navgraph/vbecm.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "navgraph/omega.hpp"
#include "navgraph/rng.hpp"
#include "navgraph/special.hpp"

namespace navgraph {

namespace {
constexpr double kLogitClamp = 700.0;

double sigmoid(double logit) {
  if (logit > kLogitClamp) logit = kLogitClamp;
  if (logit < -kLogitClamp) logit = -kLogitClamp;
  return 1.0 / (1.0 + std::exp(-logit));
}
}  // namespace

Matrix LinearPredictorCache::alpha_matrix() const {
  const Eigen::Index p = node_sums.size();
  Matrix a(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      a(i, j) = zeta + node_sums[i] + node_sums[j];
    }
    a(i, i) = 0.0;
  }
  return a;
}

VbecmEngine::VbecmEngine(const DataMatrix& data, const AuxiliaryMatrix& aux,
                         const ModelConfig& cfg)
    : cfg_(cfg) {
  const DataMatrix centred = center_columns(
      cfg.scale_columns ? scale_columns(data) : data);
  p_ = centred.n_nodes();
  n_ = static_cast<double>(centred.n_samples());
  gram_ = centred.values.transpose() * centred.values;

  q_eff_ = (cfg_.variant == ModelVariant::GMStar) ? 0 : aux.n_vars();
  v_ = q_eff_ > 0 ? Matrix(aux.values.leftCols(q_eff_))
                  : Matrix::Zero(p_, 0).eval();
  selection_ = q_eff_ > 0 && cfg_.variant == ModelVariant::GMSS &&
               !cfg_.pin_gamma_to_one;

  v_col_sum_ = Vector::Zero(q_eff_);
  v_col_sq_sum_ = Vector::Zero(q_eff_);
  v_pair_cross_ = Vector::Zero(q_eff_);
  for (Eigen::Index q = 0; q < q_eff_; ++q) {
    v_col_sum_[q] = v_.col(q).sum();
    v_col_sq_sum_[q] = v_.col(q).squaredNorm();
    v_pair_cross_[q] =
        0.5 * (v_col_sum_[q] * v_col_sum_[q] - v_col_sq_sum_[q]);
  }
  init_state();
}

void VbecmEngine::init_state() {
  VariationalState& s = state_;
  // Data-driven start: the ridge-regularised inverse sample covariance is
  // positive definite and puts the off-diagonals on the scale the data
  // support. Starting from the identity parks every edge in the spike,
  // which lets the scale factor tau blow up to alpha_tau/b_tau on the
  // first sweep and locks the whole fit into the empty graph.
  Matrix ridge = gram_ / n_;
  ridge.diagonal().array() += cfg_.lambda / n_;
  s.omega = ridge.llt().solve(Matrix::Identity(p_, p_));
  s.omega = (0.5 * (s.omega + s.omega.transpose())).eval();
  s.delta1 = Matrix::Constant(p_, p_, 0.5);
  s.delta1.diagonal().setZero();
  s.z1 = Matrix::Zero(p_, p_);
  s.z2 = Matrix::Ones(p_, p_);
  s.alpha_hat = Matrix::Zero(p_, p_);
  s.alpha_tau = cfg_.a_tau;
  s.beta_tau = cfg_.b_tau;
  s.zeta_mean = cfg_.n0;
  s.zeta_var = cfg_.t0_sq;
  s.beta_mean = Vector::Zero(q_eff_);
  s.beta_var = Vector::Ones(q_eff_);
  s.gamma1 = Vector::Constant(q_eff_, selection_ ? 0.5 : 1.0);
  s.gamma_logit = Vector::Constant(q_eff_, selection_ ? 0.0 : 7000.0);
  s.alpha_sigma = cfg_.a_sigma;
  s.beta_sigma = cfg_.b_sigma;
  s.alpha_o = cfg_.a_o;
  s.beta_o = cfg_.effective_b_o(q_eff_);
  s.elbo = -std::numeric_limits<double>::infinity();

  if (cfg_.init_jitter_sd > 0.0 && q_eff_ > 0) {
    Rng rng(cfg_.seed);
    for (Eigen::Index q = 0; q < q_eff_; ++q) {
      s.beta_mean[q] += rng.normal(0.0, cfg_.init_jitter_sd);
    }
  }
  refresh_cache();
  refresh_z_sums();
}

void VbecmEngine::set_state(const VariationalState& s) {
  state_ = s;
  refresh_cache();
  refresh_z_sums();
}

void VbecmEngine::refresh_cache() {
  cache_.zeta = state_.zeta_mean;
  cache_.node_sums = Vector::Zero(p_);
  for (Eigen::Index q = 0; q < q_eff_; ++q) {
    cache_.node_sums += v_.col(q) * state_.beta1(q);
  }
}

void VbecmEngine::refresh_z_sums() {
  z_row_sums_ = state_.z1.rowwise().sum();
  z_sum_all_ = 0.0;
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) {
      z_sum_all_ += state_.z1(i, j);
    }
  }
}

void VbecmEngine::update_edges() {
  VariationalState& s = state_;
  const double log_ratio = std::log(cfg_.nu1 / cfg_.nu0);
  const double inv_gap =
      1.0 / (cfg_.nu1 * cfg_.nu1) - 1.0 / (cfg_.nu0 * cfg_.nu0);
  const double tau1 = s.tau_mean();
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) {
      const double alpha = cache_.alpha(i, j);
      const double w = s.omega(i, j);
      // 1/delta = 1 + exp[log(nu1/nu0) + tau w^2 (nu1^-2 - nu0^-2)/2
      //               + log(1 - Phi(alpha)) - log Phi(alpha)]
      const double logit = -(log_ratio + 0.5 * tau1 * w * w * inv_gap +
                             norm_log_ccdf(alpha) - norm_log_cdf(alpha));
      const double delta = sigmoid(logit);
      const double m1 = inverse_mills(alpha, 1);
      const double m0 = inverse_mills(alpha, 0);
      const double z1 = alpha + m0 + delta * (m1 - m0);
      const double z2 = alpha * z1 + 1.0;
      s.delta1(i, j) = s.delta1(j, i) = delta;
      s.z1(i, j) = s.z1(j, i) = z1;
      s.z2(i, j) = s.z2(j, i) = z2;
      s.alpha_hat(i, j) = s.alpha_hat(j, i) = alpha;
    }
  }
  refresh_z_sums();
}

void VbecmEngine::update_tau() {
  VariationalState& s = state_;
  const double inv_nu1_sq = 1.0 / (cfg_.nu1 * cfg_.nu1);
  const double inv_nu0_sq = 1.0 / (cfg_.nu0 * cfg_.nu0);
  double quad = 0.0;
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) {
      const double w2 = s.omega(i, j) * s.omega(i, j);
      quad += w2 * (s.delta1(i, j) * inv_nu1_sq +
                    (1.0 - s.delta1(i, j)) * inv_nu0_sq);
    }
  }
  s.alpha_tau = 0.25 * p_ * (p_ - 1.0) + cfg_.a_tau;
  s.beta_tau = 0.5 * quad + cfg_.b_tau;
}

void VbecmEngine::update_beta_gamma(Eigen::Index q) {
  VariationalState& s = state_;
  const double beta1_old = s.beta1(q);
  const double u_total = cache_.node_sums.sum();

  // Slab precision and mean.
  const double prec = s.sigma2_inv_mean() + (p_ - 1.0) * v_col_sq_sum_[q] +
                      2.0 * v_pair_cross_[q];
  const double var = 1.0 / prec;

  const double z_term = v_.col(q).dot(z_row_sums_);
  const double zeta_term = (p_ - 1.0) * s.zeta_mean * v_col_sum_[q];
  // Contributions of the other beta factors through the shared predictor.
  const double own = v_.col(q).dot(cache_.node_sums) -
                     beta1_old * v_col_sq_sum_[q];
  const double same_node = (p_ - 1.0) * own;
  const double cross_node = v_col_sum_[q] * u_total -
                            v_.col(q).dot(cache_.node_sums) -
                            2.0 * beta1_old * v_pair_cross_[q];
  const double mu = var * (z_term - zeta_term - same_node - cross_node);

  double gamma = 1.0, logit = 7000.0;
  if (selection_) {
    const double log_o = digamma(s.alpha_o) - digamma(s.alpha_o + s.beta_o);
    const double log_1mo =
        digamma(s.beta_o) - digamma(s.alpha_o + s.beta_o);
    const double log_sigma_inv =
        digamma(s.alpha_sigma) - std::log(s.beta_sigma);
    // 1/gamma = 1 + exp[(log(1-o)) - (log o) - (log sigma^-2)/2
    //                   - mu^2/(2 var) + log(1/var)/2]
    logit = -(log_1mo - log_o - 0.5 * log_sigma_inv -
              0.5 * mu * mu * prec + 0.5 * std::log(prec));
    gamma = sigmoid(logit);
  }
  s.beta_mean[q] = mu;
  s.beta_var[q] = var;
  s.gamma1[q] = gamma;
  s.gamma_logit[q] = logit;

  const double beta1_new = s.beta1(q);
  cache_.node_sums += v_.col(q) * (beta1_new - beta1_old);
}

void VbecmEngine::update_zeta() {
  VariationalState& s = state_;
  const double m = 0.5 * p_ * (p_ - 1.0);
  const double prec = 1.0 / cfg_.t0_sq + m;
  s.zeta_var = 1.0 / prec;
  const double u_total = cache_.node_sums.sum();
  s.zeta_mean = s.zeta_var *
                (z_sum_all_ - (p_ - 1.0) * u_total + cfg_.n0 / cfg_.t0_sq);
  cache_.zeta = s.zeta_mean;
}

void VbecmEngine::update_sigma() {
  if (!has_slab()) return;
  VariationalState& s = state_;
  double sum_gamma = 0.0, sum_gb2 = 0.0;
  for (Eigen::Index q = 0; q < q_eff_; ++q) {
    sum_gamma += s.gamma1[q];
    sum_gb2 += s.gamma1[q] *
               (s.beta_mean[q] * s.beta_mean[q] + s.beta_var[q]);
  }
  s.alpha_sigma = 0.5 * sum_gamma + cfg_.a_sigma;
  s.beta_sigma = 0.5 * sum_gb2 + cfg_.b_sigma;
}

void VbecmEngine::update_o() {
  if (!selection_) return;
  VariationalState& s = state_;
  const double sum_gamma = s.gamma1.sum();
  s.alpha_o = sum_gamma + cfg_.a_o;
  s.beta_o = (q_eff_ - sum_gamma) + cfg_.effective_b_o(q_eff_);
}

void VbecmEngine::cm_omega() {
  VariationalState& s = state_;
  const double inv_nu1_sq = 1.0 / (cfg_.nu1 * cfg_.nu1);
  const double inv_nu0_sq = 1.0 / (cfg_.nu0 * cfg_.nu0);
  const double tau1 = s.tau_mean();
  Matrix shrink(p_, p_);
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = 0; j < p_; ++j) {
      shrink(i, j) = tau1 * (s.delta1(i, j) * inv_nu1_sq +
                             (1.0 - s.delta1(i, j)) * inv_nu0_sq);
    }
  }
  cm_sweep_omega(s.omega, gram_, n_, cfg_.lambda, shrink);
}

double VbecmEngine::elbo() const {
  const VariationalState& s = state_;
  const double inv_nu1_sq = 1.0 / (cfg_.nu1 * cfg_.nu1);
  const double inv_nu0_sq = 1.0 / (cfg_.nu0 * cfg_.nu0);
  const double log_nu1 = std::log(cfg_.nu1), log_nu0 = std::log(cfg_.nu0);
  const double tau1 = s.tau_mean();
  const double log_tau1 = digamma(s.alpha_tau) - std::log(s.beta_tau);

  // Likelihood and precision-matrix prior.
  double l_y = 0.5 * n_ * log_det_pd(s.omega) -
               0.5 * gram_.cwiseProduct(s.omega).sum();
  double l_omega = -0.5 * cfg_.lambda * s.omega.diagonal().sum() +
                   0.25 * p_ * (p_ - 1.0) * log_tau1;

  // Edge factor: the truncated-normal pieces stay parameterised by the
  // linear predictor frozen at the last edge refresh (alpha_hat), so this
  // expression is the exact lower bound even mid-sweep; with a freshly
  // refreshed edge factor it reduces to the usual simplified form.
  // Var(alpha_ij) = Var(zeta) + sum_q (V_iq + V_jq)^2 Var(beta_q); summed
  // over pairs the quadratic coefficient is (P-1) sum_i V_iq^2 +
  // 2 sum_{i<j} V_iq V_jq, the same one that drives the slab precision.
  double var_beta_pairsum = 0.0;
  for (Eigen::Index q = 0; q < q_eff_; ++q) {
    const double var_q = s.beta2(q) - s.beta1(q) * s.beta1(q);
    var_beta_pairsum +=
        ((p_ - 1.0) * v_col_sq_sum_[q] + 2.0 * v_pair_cross_[q]) * var_q;
  }
  const double m_pairs = 0.5 * p_ * (p_ - 1.0);
  double l_edges = -0.5 * (m_pairs * s.zeta_var + var_beta_pairsum);
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) {
      const double d = s.delta1(i, j);
      const double w2 = s.omega(i, j) * s.omega(i, j);
      l_omega -= d * log_nu1 + (1.0 - d) * log_nu0 +
                 0.5 * tau1 * w2 * (d * inv_nu1_sq + (1.0 - d) * inv_nu0_sq);
      const double a_hat = s.alpha_hat(i, j);
      const double a_cur = cache_.alpha(i, j);
      l_edges += (a_cur - a_hat) * s.z1(i, j) + 0.5 * a_hat * a_hat -
                 0.5 * a_cur * a_cur + d * norm_log_cdf(a_hat) +
                 (1.0 - d) * norm_log_ccdf(a_hat) - xlogx(d) -
                 xlogx(1.0 - d);
    }
  }

  double l_tau = (cfg_.a_tau - s.alpha_tau) * log_tau1 -
                 (cfg_.b_tau - s.beta_tau) * tau1 -
                 s.alpha_tau * std::log(s.beta_tau) +
                 std::lgamma(s.alpha_tau);

  const double zeta2 = s.zeta_mean * s.zeta_mean + s.zeta_var;
  double l_zeta = -0.5 * zeta2 / cfg_.t0_sq +
                  cfg_.n0 * s.zeta_mean / cfg_.t0_sq +
                  0.5 * (1.0 + std::log(2.0 * M_PI * s.zeta_var));

  double l_beta_gamma = 0.0, l_sigma = 0.0, l_o = 0.0;
  if (has_slab()) {
    const double sigma_inv = s.sigma2_inv_mean();
    const double log_sigma_inv =
        digamma(s.alpha_sigma) - std::log(s.beta_sigma);
    double log_o = 0.0, log_1mo = 0.0;
    if (selection_) {
      log_o = digamma(s.alpha_o) - digamma(s.alpha_o + s.beta_o);
      log_1mo = digamma(s.beta_o) - digamma(s.alpha_o + s.beta_o);
    }
    for (Eigen::Index q = 0; q < q_eff_; ++q) {
      const double g = s.gamma1[q];
      const double slab2 = s.beta_mean[q] * s.beta_mean[q] + s.beta_var[q];
      // The slab prior's -log(2 pi)/2 and the slab entropy's +log(2 pi)/2
      // both carry a factor gamma1 and cancel; neither may be dropped alone.
      l_beta_gamma += g * (0.5 * log_sigma_inv - 0.5 * sigma_inv * slab2) +
                      0.5 * g * (1.0 + std::log(s.beta_var[q]));
      if (selection_) {
        l_beta_gamma += g * log_o + (1.0 - g) * log_1mo - xlogx(g) -
                        xlogx(1.0 - g);
      }
    }
    l_sigma = (cfg_.a_sigma - s.alpha_sigma) * log_sigma_inv -
              (cfg_.b_sigma - s.beta_sigma) * sigma_inv -
              s.alpha_sigma * std::log(s.beta_sigma) +
              std::lgamma(s.alpha_sigma);
    if (selection_) {
      const double b_o = cfg_.effective_b_o(q_eff_);
      l_o = (cfg_.a_o - s.alpha_o) * log_o + (b_o - s.beta_o) * log_1mo +
            log_beta(s.alpha_o, s.beta_o);
    }
  }

  return l_y + l_omega + l_edges + l_tau + l_zeta + l_beta_gamma + l_sigma +
         l_o;
}

void VbecmEngine::vbe_pass() {
  update_edges();
  update_tau();
  for (Eigen::Index q = 0; q < q_eff_; ++q) update_beta_gamma(q);
  update_zeta();
  update_sigma();
  update_o();
}

void VbecmEngine::vbe_step() {
  // The VBE-step iterates the variational factors to convergence with the
  // precision matrix held fixed, so the probit side equilibrates against
  // the current omega before each conditional-maximisation sweep.
  double prev = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < kMaxInnerRounds; ++r) {
    vbe_pass();
    const double cur = elbo();
    if (std::isfinite(prev) &&
        std::fabs(cur - prev) < cfg_.elbo_tol * std::max(1.0, std::fabs(cur))) {
      break;
    }
    prev = cur;
  }
}

void VbecmEngine::full_sweep() {
  vbe_pass();
  cm_omega();
}

FitResult VbecmEngine::run() {
  const auto t0 = std::chrono::steady_clock::now();
  FitResult res;
  res.nu0_used = cfg_.nu0;
  double prev = -std::numeric_limits<double>::infinity();
  int consecutive_small = 0;
  int it = 0;
  for (; it < cfg_.max_iter; ++it) {
    vbe_step();
    cm_omega();
    const double cur = elbo();
    state_.elbo = cur;
    res.elbo_trace.push_back(cur);
    if (std::isfinite(prev)) {
      const double rel =
          std::fabs(cur - prev) / std::max(1.0, std::fabs(cur));
      consecutive_small = rel < cfg_.elbo_tol ? consecutive_small + 1 : 0;
      if (consecutive_small >= 2) {
        res.converged = true;
        ++it;
        break;
      }
    }
    prev = cur;
  }
  res.iterations = it;
  res.vb = state_;
  res.edge_ppi = state_.delta1;
  res.var_ppi = state_.gamma1;
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

FitResult run_vbecm(const DataMatrix& data, const AuxiliaryMatrix& aux,
                    const ModelConfig& cfg) {
  VbecmEngine engine(data, aux, cfg);
  return engine.run();
}

}  // namespace navgraph
