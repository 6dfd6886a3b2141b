#include "navgraph/ecm.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "navgraph/omega.hpp"
#include "navgraph/rng.hpp"
#include "navgraph/special.hpp"

namespace navgraph {

namespace {
double sigmoid(double logit) {
  if (logit > 700.0) logit = 700.0;
  if (logit < -700.0) logit = -700.0;
  return 1.0 / (1.0 + std::exp(-logit));
}

// log of w N(x; 0, v1) + (1-w) N(x; 0, v0) with log-domain mixing.
double log_normal_mixture(double x, double w, double v1, double v0) {
  const double l1 = std::log(w) - 0.5 * std::log(v1) - 0.5 * x * x / v1;
  const double l0 =
      std::log1p(-w) - 0.5 * std::log(v0) - 0.5 * x * x / v0;
  const double hi = std::max(l1, l0);
  return hi + std::log(std::exp(l1 - hi) + std::exp(l0 - hi));
}
}  // namespace

EcmEngine::EcmEngine(const DataMatrix& data, const AuxiliaryMatrix& aux,
                     const EcmConfig& cfg)
    : cfg_(cfg) {
  if (!(cfg.sigma0 > 0.0) || !(cfg.sigma0 < cfg.sigma1)) {
    throw std::invalid_argument("ecm: need 0 < sigma0 < sigma1");
  }
  const DataMatrix centred =
      center_columns(cfg.scale_columns ? scale_columns(data) : data);
  p_ = centred.n_nodes();
  n_ = static_cast<double>(centred.n_samples());
  gram_ = centred.values.transpose() * centred.values;
  q_eff_ = (cfg_.variant == ModelVariant::GMStar) ? 0 : aux.n_vars();
  v_ = q_eff_ > 0 ? Matrix(aux.values.leftCols(q_eff_))
                  : Matrix::Zero(p_, 0).eval();
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

void EcmEngine::init_state() {
  PointState& s = state_;
  // Same data-driven start as the variational engine (see there for why
  // the identity start collapses to the empty graph).
  Matrix ridge = gram_ / n_;
  ridge.diagonal().array() += cfg_.lambda / n_;
  s.omega = ridge.llt().solve(Matrix::Identity(p_, p_));
  s.omega = (0.5 * (s.omega + s.omega.transpose())).eval();
  s.tau1 = cfg_.a_tau / cfg_.b_tau;
  s.tau2 = cfg_.a_sigma / cfg_.b_sigma;
  s.zeta = cfg_.n0;
  s.beta = Vector::Zero(q_eff_);
  const double b_o = cfg_.effective_b_o(q_eff_);
  s.o = cfg_.a_o / (cfg_.a_o + b_o);
  s.e_delta = Matrix::Constant(p_, p_, 0.5);
  s.e_delta.diagonal().setZero();
  s.d_star = Matrix::Zero(p_, p_);
  s.e_z = Matrix::Zero(p_, p_);
  s.e_gamma = Vector::Constant(q_eff_, has_selection() ? 0.5 : 1.0);
  s.g_star = Vector::Zero(q_eff_);
  if (cfg_.init_jitter_sd > 0.0 && q_eff_ > 0) {
    Rng rng(cfg_.seed);
    for (Eigen::Index q = 0; q < q_eff_; ++q) {
      s.beta[q] += rng.normal(0.0, cfg_.init_jitter_sd);
    }
  }
  node_sums_ = v_ * s.beta;
}

void EcmEngine::set_state(const PointState& s) {
  state_ = s;
  node_sums_ = v_ * state_.beta;
}

double EcmEngine::alpha(Eigen::Index i, Eigen::Index j) const {
  return state_.zeta + node_sums_[i] + node_sums_[j];
}

void EcmEngine::e_step() {
  PointState& s = state_;
  const double inv_nu1_sq = 1.0 / (cfg_.nu1 * cfg_.nu1);
  const double inv_nu0_sq = 1.0 / (cfg_.nu0 * cfg_.nu0);
  const double log_nu_ratio = std::log(cfg_.nu0 / cfg_.nu1);
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) {
      const double a = alpha(i, j);
      const double w2 = s.omega(i, j) * s.omega(i, j);
      // E(delta) from the density ratio of the two edge mixture components
      // weighted by the probit prior at the current linear predictor.
      const double logit = log_nu_ratio -
                           0.5 * s.tau1 * w2 * (inv_nu1_sq - inv_nu0_sq) +
                           norm_log_cdf(a) - norm_log_ccdf(a);
      const double ed = sigmoid(logit);
      const double m1 = inverse_mills(a, 1);
      const double m0 = inverse_mills(a, 0);
      s.e_delta(i, j) = s.e_delta(j, i) = ed;
      s.d_star(i, j) = s.d_star(j, i) =
          ed * inv_nu1_sq + (1.0 - ed) * inv_nu0_sq;
      const double ez = a + m0 + ed * (m1 - m0);
      s.e_z(i, j) = s.e_z(j, i) = ez;
    }
  }
  if (has_slab()) {
    const double inv_s1_sq = 1.0 / (cfg_.sigma1 * cfg_.sigma1);
    const double inv_s0_sq = 1.0 / (cfg_.sigma0 * cfg_.sigma0);
    const double log_s_ratio = std::log(cfg_.sigma0 / cfg_.sigma1);
    for (Eigen::Index q = 0; q < q_eff_; ++q) {
      double eg = 1.0;
      if (has_selection()) {
        const double b2 = s.beta[q] * s.beta[q];
        const double logit = std::log(s.o) - std::log1p(-s.o) +
                             log_s_ratio -
                             0.5 * s.tau2 * b2 * (inv_s1_sq - inv_s0_sq);
        eg = sigmoid(logit);
      }
      s.e_gamma[q] = eg;
      s.g_star[q] = eg * inv_s1_sq + (1.0 - eg) * inv_s0_sq;
    }
  }
}

void EcmEngine::cm_tau1() {
  PointState& s = state_;
  double quad = 0.0;
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) {
      quad += s.omega(i, j) * s.omega(i, j) * s.d_star(i, j);
    }
  }
  s.tau1 = (0.5 * p_ * (p_ - 1.0) + 2.0 * cfg_.a_tau - 2.0) /
           (quad + 2.0 * cfg_.b_tau);
}

void EcmEngine::cm_tau2() {
  if (!has_slab()) return;
  PointState& s = state_;
  double quad = 0.0;
  for (Eigen::Index q = 0; q < q_eff_; ++q) {
    quad += s.beta[q] * s.beta[q] * s.g_star[q];
  }
  s.tau2 = (q_eff_ + 2.0 * cfg_.a_sigma - 2.0) / (quad + 2.0 * cfg_.b_sigma);
}

void EcmEngine::cm_zeta() {
  PointState& s = state_;
  const double m = 0.5 * p_ * (p_ - 1.0);
  double ez_sum = 0.0;
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) ez_sum += s.e_z(i, j);
  }
  const double u_total = node_sums_.sum();
  s.zeta = (cfg_.n0 + cfg_.t0_sq * (ez_sum - (p_ - 1.0) * u_total)) /
           (m * cfg_.t0_sq + 1.0);
}

void EcmEngine::cm_beta(Eigen::Index q) {
  PointState& s = state_;
  const double beta_old = s.beta[q];
  const Vector ez_row_sums = s.e_z.rowwise().sum();
  const double u_total = node_sums_.sum();
  const double denom = (p_ - 1.0) * v_col_sq_sum_[q] +
                       2.0 * v_pair_cross_[q] + s.tau2 * s.g_star[q];
  const double z_term = v_.col(q).dot(ez_row_sums);
  const double zeta_term = (p_ - 1.0) * s.zeta * v_col_sum_[q];
  const double own = v_.col(q).dot(node_sums_) - beta_old * v_col_sq_sum_[q];
  const double same_node = (p_ - 1.0) * own;
  const double cross_node = v_col_sum_[q] * u_total -
                            v_.col(q).dot(node_sums_) -
                            2.0 * beta_old * v_pair_cross_[q];
  s.beta[q] = (z_term - zeta_term - same_node - cross_node) / denom;
  node_sums_ += v_.col(q) * (s.beta[q] - beta_old);
}

void EcmEngine::cm_o() {
  if (!has_selection()) return;
  PointState& s = state_;
  const double b_o = cfg_.effective_b_o(q_eff_);
  double o = (s.e_gamma.sum() + cfg_.a_o - 1.0) /
             (q_eff_ + cfg_.a_o + b_o - 2.0);
  s.o = std::min(std::max(o, 1e-12), 1.0 - 1e-12);
}

void EcmEngine::cm_omega() {
  PointState& s = state_;
  Matrix shrink = s.tau1 * s.d_star;
  cm_sweep_omega(s.omega, gram_, n_, cfg_.lambda, shrink);
}

void EcmEngine::cm_step() {
  cm_tau1();
  cm_tau2();
  cm_zeta();
  for (Eigen::Index q = 0; q < q_eff_; ++q) cm_beta(q);
  cm_o();
  cm_omega();
}

double EcmEngine::objective() const {
  const PointState& s = state_;
  const double nu1_sq = cfg_.nu1 * cfg_.nu1;
  const double nu0_sq = cfg_.nu0 * cfg_.nu0;
  double obj = 0.5 * n_ * log_det_pd(s.omega) -
               0.5 * gram_.cwiseProduct(s.omega).sum() -
               0.5 * cfg_.lambda * s.omega.diagonal().sum();
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) {
      const double a = alpha(i, j);
      const double rho = norm_cdf(a);
      obj += log_normal_mixture(s.omega(i, j),
                                std::min(std::max(rho, 1e-300), 1.0 - 1e-16),
                                nu1_sq / s.tau1, nu0_sq / s.tau1);
    }
  }
  obj += (cfg_.a_tau - 1.0) * std::log(s.tau1) - cfg_.b_tau * s.tau1;
  obj += -0.5 * s.zeta * s.zeta / cfg_.t0_sq + cfg_.n0 * s.zeta / cfg_.t0_sq;
  if (has_slab()) {
    const double s1_sq = cfg_.sigma1 * cfg_.sigma1;
    const double s0_sq = cfg_.sigma0 * cfg_.sigma0;
    for (Eigen::Index q = 0; q < q_eff_; ++q) {
      const double w = has_selection() ? s.o : 1.0 - 1e-16;
      obj += log_normal_mixture(s.beta[q], w, s1_sq / s.tau2, s0_sq / s.tau2);
    }
    obj += (cfg_.a_sigma - 1.0) * std::log(s.tau2) - cfg_.b_sigma * s.tau2;
    if (has_selection()) {
      const double b_o = cfg_.effective_b_o(q_eff_);
      obj += (cfg_.a_o - 1.0) * std::log(s.o) +
             (b_o - 1.0) * std::log1p(-s.o);
    }
  }
  return obj;
}

double EcmEngine::q_function() const {
  const PointState& s = state_;
  double q = 0.5 * n_ * log_det_pd(s.omega) -
             0.5 * gram_.cwiseProduct(s.omega).sum() -
             0.5 * cfg_.lambda * s.omega.diagonal().sum();
  double e_delta_sum = 0.0;
  for (Eigen::Index i = 0; i < p_; ++i) {
    for (Eigen::Index j = i + 1; j < p_; ++j) {
      const double ed = s.e_delta(i, j);
      const double w2 = s.omega(i, j) * s.omega(i, j);
      e_delta_sum += ed;
      q += -0.5 * s.tau1 * w2 * s.d_star(i, j);
      // probit part: E{-(z - alpha)^2 / 2} up to E(z^2) terms constant in
      // the parameters; E(z^2) itself is absorbed in the dropped constant.
      const double a = alpha(i, j);
      q += s.e_z(i, j) * a - 0.5 * a * a;
    }
  }
  const double m = 0.5 * p_ * (p_ - 1.0);
  q += -std::log(cfg_.nu1) * e_delta_sum -
       std::log(cfg_.nu0) * (m - e_delta_sum);
  q += (0.5 * m + cfg_.a_tau - 1.0) * std::log(s.tau1) - cfg_.b_tau * s.tau1;
  q += -0.5 * s.zeta * s.zeta / cfg_.t0_sq + cfg_.n0 * s.zeta / cfg_.t0_sq;
  if (has_slab()) {
    double e_gamma_sum = 0.0;
    for (Eigen::Index qi = 0; qi < q_eff_; ++qi) {
      e_gamma_sum += s.e_gamma[qi];
      q += -0.5 * s.tau2 * s.beta[qi] * s.beta[qi] * s.g_star[qi];
    }
    q += -std::log(cfg_.sigma1) * e_gamma_sum -
         std::log(cfg_.sigma0) * (q_eff_ - e_gamma_sum);
    q += (0.5 * q_eff_ + cfg_.a_sigma - 1.0) * std::log(s.tau2) -
         cfg_.b_sigma * s.tau2;
    if (has_selection()) {
      const double b_o = cfg_.effective_b_o(q_eff_);
      q += std::log(s.o) * (e_gamma_sum + cfg_.a_o - 1.0) +
           std::log1p(-s.o) * (q_eff_ - e_gamma_sum + b_o - 1.0);
    }
  }
  return q;
}

FitResult EcmEngine::run() {
  const auto t0 = std::chrono::steady_clock::now();
  FitResult res;
  res.nu0_used = cfg_.nu0;
  res.sigma0_used = has_slab() ? cfg_.sigma0 : 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  int consecutive_small = 0;
  int it = 0;
  for (; it < cfg_.max_iter; ++it) {
    e_step();
    cm_step();
    const double cur = objective();
    state_.objective = cur;
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
  res.pt = state_;
  res.edge_ppi = state_.e_delta;
  res.var_ppi = state_.e_gamma;
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

FitResult run_ecm(const DataMatrix& data, const AuxiliaryMatrix& aux,
                  const EcmConfig& cfg) {
  EcmEngine engine(data, aux, cfg);
  return engine.run();
}

}  // namespace navgraph
