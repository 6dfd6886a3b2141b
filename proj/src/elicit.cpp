#include "navgraph/elicit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "navgraph/special.hpp"

namespace navgraph {

namespace {
double pair_count(int p) { return 0.5 * p * (p - 1.0); }

// sd of the edge count as a function of t0_sq with n0 eliminated so that the
// mean constraint M Phi(n0/sqrt(1+t0^2)) = mean holds exactly.
double sd_given_t0sq(double t0_sq, double mean, int p) {
  const double m = pair_count(p);
  const double n0 = norm_quantile(mean / m) * std::sqrt(1.0 + t0_sq);
  return prior_edge_moments(n0, t0_sq, p).sd;
}
}  // namespace

EdgeMoments prior_edge_moments(double n0, double t0_sq, int n_nodes) {
  if (!(t0_sq > 0.0)) {
    throw std::domain_error("prior_edge_moments: t0_sq must be positive");
  }
  if (n_nodes < 2) {
    throw std::domain_error("prior_edge_moments: need at least 2 nodes");
  }
  const double m = pair_count(n_nodes);
  const double s = std::sqrt(1.0 + t0_sq);
  const double e_phi = norm_cdf(n0 / s);
  // E{Phi(zeta)^2} = Phi2(h, h; rho) with h = n0/sqrt(1+t0^2) and
  // rho = t0^2/(1+t0^2), reduced through Owen's T as Phi(h) - 2 T(h, a),
  // a = sqrt((1-rho)/(1+rho)) = 1/sqrt(1+2 t0^2). Sanity anchor: zeta ~
  // N(0,1) makes Phi(zeta) uniform, and the reduction gives exactly 1/3.
  const double e_phi2 =
      e_phi - 2.0 * owen_t(n0 / s, 1.0 / std::sqrt(1.0 + 2.0 * t0_sq));
  const double var = m * (e_phi - e_phi2) +
                     m * m * (e_phi2 - e_phi * e_phi);
  return {m * e_phi, std::sqrt(std::max(var, 0.0))};
}

EdgePriorTarget default_edge_target(int n_nodes) {
  const double m = pair_count(n_nodes);
  return {0.01 * m, 0.03 * m, n_nodes};
}

std::pair<double, double> elicit_hyperparams(const EdgePriorTarget& target) {
  const int p = target.n_nodes;
  const double m = pair_count(p);
  if (p < 2) throw std::invalid_argument("elicit: need at least 2 nodes");
  if (!(target.mean_edges > 0.0 && target.mean_edges < m)) {
    throw std::invalid_argument(
        "elicit: mean_edges must lie strictly between 0 and P(P-1)/2");
  }
  if (!(target.sd_edges > 0.0)) {
    throw std::invalid_argument("elicit: sd_edges must be positive");
  }

  const double prob = target.mean_edges / m;
  const double floor_sd = std::sqrt(m * prob * (1.0 - prob));
  if (target.sd_edges <= floor_sd * (1.0 + 1e-9)) {
    throw std::invalid_argument(
        "elicit: target sd " + std::to_string(target.sd_edges) +
        " is not above the binomial floor " + std::to_string(floor_sd) +
        " implied by the target mean; no t0_sq > 0 can reach it");
  }
  // The sd saturates at sqrt(M) times the floor as t0_sq grows without
  // bound (the edge probability degenerates to a two-point mixture).
  const double cap_sd = m * std::sqrt(prob * (1.0 - prob));
  if (target.sd_edges >= cap_sd * (1.0 - 1e-9)) {
    throw std::invalid_argument(
        "elicit: target sd " + std::to_string(target.sd_edges) +
        " reaches the degenerate ceiling " + std::to_string(cap_sd) +
        " implied by the target mean; no finite t0_sq can reach it");
  }

  const double rel_tol = 1e-9;
  auto residual = [&](double n0, double t0_sq, double* r_mean,
                      double* r_sd) {
    const EdgeMoments mo = prior_edge_moments(n0, t0_sq, p);
    *r_mean = mo.mean / target.mean_edges - 1.0;
    *r_sd = mo.sd / target.sd_edges - 1.0;
  };

  // Damped Newton on (n0, log t0_sq) with a finite-difference Jacobian.
  double n0 = norm_quantile(prob) * std::sqrt(2.0);
  double lt = 0.0;  // log t0_sq, start at t0_sq = 1
  bool newton_ok = false;
  double r1, r2;
  residual(n0, std::exp(lt), &r1, &r2);
  for (int it = 0; it < 100; ++it) {
    if (std::fabs(r1) < rel_tol && std::fabs(r2) < rel_tol) {
      newton_ok = true;
      break;
    }
    const double h1 = 1e-6 * std::max(1.0, std::fabs(n0));
    const double h2 = 1e-6;
    double a1, a2, b1, b2;
    residual(n0 + h1, std::exp(lt), &a1, &a2);
    residual(n0, std::exp(lt + h2), &b1, &b2);
    const double j11 = (a1 - r1) / h1, j12 = (b1 - r1) / h2;
    const double j21 = (a2 - r2) / h1, j22 = (b2 - r2) / h2;
    const double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || std::fabs(det) < 1e-300) break;
    const double dn0 = (-r1 * j22 + r2 * j12) / det;
    const double dlt = (-r2 * j11 + r1 * j21) / det;
    // Backtracking line search on the residual norm.
    const double base = r1 * r1 + r2 * r2;
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      const double cand_n0 = n0 + step * dn0;
      const double cand_lt = lt + step * dlt;
      if (cand_lt < -80.0 || cand_lt > 80.0) continue;
      double c1, c2;
      residual(cand_n0, std::exp(cand_lt), &c1, &c2);
      if (std::isfinite(c1) && std::isfinite(c2) &&
          c1 * c1 + c2 * c2 < base) {
        n0 = cand_n0;
        lt = cand_lt;
        r1 = c1;
        r2 = c2;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }

  if (!newton_ok) {
    // Nested bisection: n0 is available in closed form given t0_sq via the
    // mean constraint, and sd is increasing in t0_sq.
    double lo = 1e-12, hi = 1.0;
    while (sd_given_t0sq(hi, target.mean_edges, p) < target.sd_edges &&
           hi < 1e8) {
      hi *= 2.0;
    }
    if (sd_given_t0sq(hi, target.mean_edges, p) < target.sd_edges) {
      throw std::runtime_error("elicit: target sd unreachable");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (sd_given_t0sq(mid, target.mean_edges, p) < target.sd_edges) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
    }
    const double t0_sq = 0.5 * (lo + hi);
    n0 = norm_quantile(prob) * std::sqrt(1.0 + t0_sq);
    lt = std::log(t0_sq);
  }
  return {n0, std::exp(lt)};
}

}  // namespace navgraph
