#pragma once

#include <functional>

// Scalar special functions used across the inference engines and the
// hyperprior elicitation: standard-normal pdf/cdf machinery with stable
// log-scale tails, truncated-normal (inverse Mills) ratios, digamma,
// Owen's T function and a generic adaptive Gauss-Kronrod integrator.
namespace navgraph {

// Standard normal density phi(x).
double norm_pdf(double x);

// Standard normal cdf Phi(x), accurate over the full double range.
double norm_cdf(double x);

// log Phi(x); switches to an asymptotic expansion deep in the lower tail
// so that no intermediate result underflows.
double norm_log_cdf(double x);

// log(1 - Phi(x)) = log Phi(-x).
double norm_log_ccdf(double x);

// Quantile function Phi^{-1}(p) for p in (0,1).
double norm_quantile(double p);

// Hazard ratio phi(x) / Phi(-x), stable for large positive x.
double norm_hazard(double x);

// Inverse Mills ratio of a normal truncated to the positive (branch = 1)
// or negative (branch = 0) half line:
//   M(mu, 1) =  phi(mu) / Phi(mu),   M(mu, 0) = -phi(mu) / (1 - Phi(mu)).
double inverse_mills(double mu, int branch);

// Digamma function psi(x) for x > 0.
double digamma(double x);

// log Beta(a, b).
double log_beta(double a, double b);

// x * log(x) with the 0 * log(0) = 0 convention.
double xlogx(double x);

// Adaptive Gauss-Kronrod (G7/K15) quadrature of f over [a, b].
// Splits intervals until the K15-G7 error estimate meets abs_tol.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol = 1e-12,
                          int max_intervals = 2000);

// Owen's T function  T(h, a) = phi(h) * int_0^a phi(h x) / (1 + x^2) dx,
// evaluated by adaptive quadrature on the defining integral (|a| <= 1) and
// the classical reduction T(h,a) = Phi(h)/2 + Phi(ah)/2 - Phi(h)Phi(ah)
// - T(ah, 1/a) otherwise. Absolute accuracy ~1e-12.
double owen_t(double h, double a);

}  // namespace navgraph
