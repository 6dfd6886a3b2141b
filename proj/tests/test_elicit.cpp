#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "navgraph/elicit.hpp"
#include "navgraph/rng.hpp"
#include "navgraph/special.hpp"

using namespace navgraph;

namespace {
// Reference prior settings for P = 100: target edge count (mean, sd) and the
// hyperparameters (n0, t0_sq) they map to, shown at table precision.
struct Row {
  double mean, sd, n0, t0_sq;
};
const Row kReferenceRows[] = {
    {25, 25, -2.69, 0.09},   {25, 50, -2.93, 0.30},  {25, 150, -4.34, 1.85},
    {50, 25, -2.36, 0.03},   {50, 50, -2.45, 0.12},  {50, 150, -3.09, 0.77},
    {150, 25, -1.88, 0.004}, {150, 50, -1.90, 0.02}, {150, 150, -2.04, 0.18},
};
}  // namespace

TEST_CASE("degenerate prior: mean reduces to M/2 at n0 = 0") {
  const EdgeMoments m = prior_edge_moments(0.0, 1e-12, 3);
  CHECK(m.mean == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("forward map hits the reference table targets") {
  for (const Row& r : kReferenceRows) {
    const EdgeMoments m = prior_edge_moments(r.n0, r.t0_sq, 100);
    // The tabulated hyperparameters are rounded; propagate that rounding
    // through numeric sensitivities to bound the admissible deviation.
    const double dn = r.t0_sq < 0.01 ? 0.0005 : 0.005;
    const EdgeMoments m_n = prior_edge_moments(r.n0 + dn, r.t0_sq, 100);
    const EdgeMoments m_t = prior_edge_moments(r.n0, r.t0_sq + dn, 100);
    const double mean_tol = 1.5 * (std::fabs(m_n.mean - m.mean) +
                                   std::fabs(m_t.mean - m.mean)) +
                            1e-6;
    const double sd_tol =
        1.5 * (std::fabs(m_n.sd - m.sd) + std::fabs(m_t.sd - m.sd)) + 1e-6;
    CHECK(std::fabs(m.mean - r.mean) <= mean_tol);
    CHECK(std::fabs(m.sd - r.sd) <= sd_tol);
  }
}

TEST_CASE("mean is strictly increasing in n0") {
  double prev = -1.0;
  for (double n0 = -5.0; n0 <= 2.0; n0 += 0.25) {
    const double mean = prior_edge_moments(n0, 0.5, 60).mean;
    CHECK(mean > prev);
    prev = mean;
  }
}

TEST_CASE("t0_sq <= 0 is a domain error") {
  CHECK_THROWS_AS(prior_edge_moments(0.0, 0.0, 10), std::domain_error);
  CHECK_THROWS_AS(prior_edge_moments(0.0, -1.0, 10), std::domain_error);
}

TEST_CASE("elicitation reproduces the reference table") {
  for (const Row& r : kReferenceRows) {
    const auto [n0, t0_sq] = elicit_hyperparams({r.mean, r.sd, 100});
    const double t_tol = r.t0_sq < 0.01 ? 0.005 : 0.01;
    CHECK(std::fabs(n0 - r.n0) <= 0.01);
    CHECK(std::fabs(t0_sq - r.t0_sq) <= t_tol);
  }
}

TEST_CASE("solver round-trips random feasible targets to 1e-6 relative") {
  Rng rng(99);
  for (int i = 0; i < 60; ++i) {
    const int p = 10 + static_cast<int>(rng.uniform_below(150));
    const double m = 0.5 * p * (p - 1.0);
    const double mean = m * rng.uniform(0.002, 0.2);
    const double prob = mean / m;
    const double floor_sd = std::sqrt(m * prob * (1.0 - prob));
    // Feasible band: above the binomial floor, below the degenerate ceiling
    // sqrt(M) * floor approached as t0_sq grows.
    const double hi = std::min(20.0, 0.7 * std::sqrt(m));
    const double sd = floor_sd * rng.uniform(1.2, hi);
    const auto [n0, t0_sq] = elicit_hyperparams({mean, sd, p});
    const EdgeMoments got = prior_edge_moments(n0, t0_sq, p);
    CHECK(got.mean == doctest::Approx(mean).epsilon(1e-6));
    CHECK(got.sd == doctest::Approx(sd).epsilon(1e-6));
  }
}

TEST_CASE("infeasible target names the binomial floor") {
  // sd below the t0 -> 0 floor cannot be reached.
  try {
    elicit_hyperparams({49.5, 3.0, 100});
    FAIL("expected an infeasibility error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("floor") != std::string::npos);
  }
}

TEST_CASE("default target is 1% mean and 3% sd of the pair count") {
  const EdgePriorTarget t = default_edge_target(100);
  CHECK(t.mean_edges == doctest::Approx(49.5));
  CHECK(t.sd_edges == doctest::Approx(148.5));
}
