#include <doctest.h>

#include <cmath>

#include "navgraph/rng.hpp"
#include "navgraph/special.hpp"
#include "navgraph/vbecm.hpp"
#include "oracles.hpp"

using namespace navgraph;

namespace {
// Sample w ~ N(0,1) conditioned on w > -a, by inverse cdf.
double sample_tn_lower(Rng& rng, double a) {
  const double u = rng.uniform();
  const double tail = std::max((1.0 - u) * norm_cdf(a), 1e-300);
  return -norm_quantile(std::min(tail, 1.0 - 1e-16));
}

double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

double log_normal_pdf(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * M_PI * var) -
         0.5 * (x - mean) * (x - mean) / var;
}

double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         log_beta(a, b);
}

struct McResult {
  double mean = 0.0;
  double se = 0.0;
};

// One Monte Carlo draw of log p(Y, Omega, Theta) - log q(Theta), with
// Theta ~ q. Parameter-free constants are kept on both sides; they cancel
// when differencing two states.
McResult mc_elbo(const VariationalState& s, const Matrix& gram, double n,
                 const Matrix& v, const ModelConfig& cfg, int n_draws,
                 std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index p = s.omega.rows();
  const Eigen::Index nq = v.cols();
  const double b_o = cfg.effective_b_o(nq);
  const double logdet = 2.0 * Eigen::LLT<Matrix>(s.omega)
                                  .matrixL()
                                  .toDenseMatrix()
                                  .diagonal()
                                  .array()
                                  .log()
                                  .sum();
  const double const_y =
      0.5 * n * logdet - 0.5 * gram.cwiseProduct(s.omega).sum() -
      0.5 * cfg.lambda * s.omega.trace();

  double acc = 0.0, acc2 = 0.0;
  for (int d = 0; d < n_draws; ++d) {
    double lp = const_y, lq = 0.0;

    const double tau = rng.gamma(s.alpha_tau, s.beta_tau);
    lq += log_gamma_pdf(tau, s.alpha_tau, s.beta_tau);
    lp += log_gamma_pdf(tau, cfg.a_tau, cfg.b_tau);

    const double zeta = rng.normal(s.zeta_mean, std::sqrt(s.zeta_var));
    lq += log_normal_pdf(zeta, s.zeta_mean, s.zeta_var);
    lp += log_normal_pdf(zeta, cfg.n0, cfg.t0_sq);

    const double sigma_inv = rng.gamma(s.alpha_sigma, s.beta_sigma);
    const double o = rng.beta(s.alpha_o, s.beta_o);
    Vector beta = Vector::Zero(nq);
    if (nq > 0) {
      lq += log_gamma_pdf(sigma_inv, s.alpha_sigma, s.beta_sigma);
      lp += log_gamma_pdf(sigma_inv, cfg.a_sigma, cfg.b_sigma);
      lq += log_beta_pdf(o, s.alpha_o, s.beta_o);
      lp += log_beta_pdf(o, cfg.a_o, b_o);
      for (Eigen::Index q = 0; q < nq; ++q) {
        const bool inc = rng.uniform() < s.gamma1[q];
        lq += inc ? std::log(s.gamma1[q]) : std::log1p(-s.gamma1[q]);
        lp += inc ? std::log(o) : std::log1p(-o);
        if (inc) {
          beta[q] = rng.normal(s.beta_mean[q], std::sqrt(s.beta_var[q]));
          lq += log_normal_pdf(beta[q], s.beta_mean[q], s.beta_var[q]);
          lp += log_normal_pdf(beta[q], 0.0, 1.0 / sigma_inv);
        }
        // beta = 0 under exclusion: the Dirac factors cancel between p
        // and q exactly.
      }
    }

    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const double a_hat = s.alpha_hat(i, j);
        const bool edge = rng.uniform() < s.delta1(i, j);
        lq += edge ? std::log(s.delta1(i, j))
                   : std::log1p(-s.delta1(i, j));
        double z;
        if (edge) {
          z = a_hat + sample_tn_lower(rng, a_hat);
          lq += log_normal_pdf(z, a_hat, 1.0) - norm_log_cdf(a_hat);
        } else {
          z = a_hat - sample_tn_lower(rng, -a_hat);
          lq += log_normal_pdf(z, a_hat, 1.0) - norm_log_ccdf(a_hat);
        }
        double alpha = zeta;
        for (Eigen::Index q = 0; q < nq; ++q) {
          alpha += (v(i, q) + v(j, q)) * beta[q];
        }
        lp += log_normal_pdf(z, alpha, 1.0);
        const double nu = edge ? cfg.nu1 : cfg.nu0;
        lp += log_normal_pdf(s.omega(i, j), 0.0, nu * nu / tau);
      }
    }
    acc += lp - lq;
    acc2 += (lp - lq) * (lp - lq);
  }
  McResult r;
  r.mean = acc / n_draws;
  const double var = acc2 / n_draws - r.mean * r.mean;
  r.se = std::sqrt(std::max(var, 0.0) / n_draws);
  return r;
}
}  // namespace

TEST_CASE("ELBO differences match Monte Carlo within 3 standard errors") {
  Rng rng(2024);
  DataMatrix data;
  data.values = Matrix(8, 2);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 2; ++j) data.values(i, j) = rng.normal();
  }
  AuxiliaryMatrix aux;
  aux.values = Matrix(2, 1);
  aux.values << 0.9, 0.05;
  ModelConfig cfg;
  cfg.variant = ModelVariant::GMSS;
  cfg.nu0 = 0.1;
  cfg.nu1 = 100.0;
  cfg.n0 = -1.0;
  cfg.t0_sq = 0.5;

  VbecmEngine eng(data, aux, cfg);
  eng.update_edges();  // makes the z moments consistent with alpha_hat
  const VariationalState state_a = eng.state();
  const double elbo_a = eng.elbo();
  eng.full_sweep();
  eng.full_sweep();
  eng.full_sweep();
  const VariationalState state_b = eng.state();
  const double elbo_b = eng.elbo();

  const int n_draws = 1000000;
  const McResult mc_a = mc_elbo(state_a, eng.gram(), 8, aux.values, cfg,
                                n_draws, 555);
  const McResult mc_b = mc_elbo(state_b, eng.gram(), 8, aux.values, cfg,
                                n_draws, 777);
  const double se = std::sqrt(mc_a.se * mc_a.se + mc_b.se * mc_b.se);
  const double got = elbo_b - elbo_a;
  const double want = mc_b.mean - mc_a.mean;
  INFO("analytic ", got, " mc ", want, " se ", se);
  CHECK(std::fabs(got - want) <= 3.0 * se + 1e-9);
}

TEST_CASE("prior-equals-posterior inclusion factor has zero KL") {
  // The o-factor contribution at variational parameters equal to the prior
  // collapses to log B(a_o, b_o): the Kullback-Leibler term vanishes.
  const double a_o = 1.0, b_o = 50.0;
  auto l_o = [&](double alpha, double beta) {
    const double lo = digamma(alpha) - digamma(alpha + beta);
    const double l1mo = digamma(beta) - digamma(alpha + beta);
    return (a_o - alpha) * lo + (b_o - beta) * l1mo + log_beta(alpha, beta);
  };
  CHECK(l_o(a_o, b_o) == doctest::Approx(log_beta(a_o, b_o)).epsilon(1e-14));
  // and it is the unique maximum: any other parameters give a smaller value
  // (positive KL against the prior).
  for (double da : {-0.5, 0.4, 2.0}) {
    for (double db : {-10.0, 5.0, 40.0}) {
      CHECK(l_o(a_o + std::max(da, -0.9), b_o + db) <
            log_beta(a_o, b_o) + 1e-12);
    }
  }
}
