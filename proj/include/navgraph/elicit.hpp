#pragma once

#include <utility>

namespace navgraph {

// Prior beliefs on the number of network edges, to be translated into the
// (n0, t0_sq) hyperparameters of the sparsity level zeta ~ N(n0, t0_sq).
struct EdgePriorTarget {
  double mean_edges = 0.0;
  double sd_edges = 0.0;
  int n_nodes = 0;
};

struct EdgeMoments {
  double mean = 0.0;
  double sd = 0.0;
};

// Mean and sd of the prior edge count when every edge is included
// independently with probability Phi(zeta), zeta ~ N(n0, t0_sq):
// with M = P(P-1)/2 pairs, the count is Binomial(M, Phi(zeta)) given zeta,
// so the law of total variance gives
//   mean = M E{Phi},  var = M (E{Phi} - E{Phi^2}) + M^2 (E{Phi^2} - E{Phi}^2),
// where E{Phi} = Phi(n0/sqrt(1+t0^2)) and E{Phi^2} is the equicoordinate
// bivariate normal probability, reduced through Owen's T.
EdgeMoments prior_edge_moments(double n0, double t0_sq, int n_nodes);

// Solves prior_edge_moments(n0, t0_sq, P) = (mean_edges, sd_edges) for
// (n0, t0_sq): damped two-dimensional Newton iteration with a
// nested-bisection fallback. Throws if the target sd lies below the binomial
// floor sqrt(M p (1-p)) reachable only as t0_sq -> 0.
std::pair<double, double> elicit_hyperparams(const EdgePriorTarget& target);

// Default target used when the caller supplies none: prior mean 1% and
// prior sd 3% of the number of possible edges.
EdgePriorTarget default_edge_target(int n_nodes);

}  // namespace navgraph
