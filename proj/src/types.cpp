#include "navgraph/types.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace navgraph {

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::GMStar: return "gmstar";
    case ModelVariant::GMN: return "gmn";
    case ModelVariant::GMSS: return "gmss";
  }
  return "?";
}

std::string to_string(EngineKind e) {
  return e == EngineKind::VBECM ? "vbecm" : "ecm";
}

DataMatrix center_columns(const DataMatrix& data) {
  if (data.n_samples() < 2) {
    throw std::invalid_argument("center_columns: need at least 2 samples");
  }
  if (!data.values.allFinite()) {
    throw std::invalid_argument("center_columns: non-finite entries");
  }
  DataMatrix out = data;
  const Vector means = out.values.colwise().mean();
  out.values.rowwise() -= means.transpose();
  return out;
}

DataMatrix scale_columns(const DataMatrix& data) {
  DataMatrix out = data;
  const Eigen::Index n = out.n_samples();
  for (Eigen::Index j = 0; j < out.n_nodes(); ++j) {
    const double mean = out.values.col(j).mean();
    const double ss = (out.values.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd > 0.0) out.values.col(j) /= sd;
  }
  return out;
}

ValidationReport validate_inputs(const DataMatrix& data,
                                 const AuxiliaryMatrix& aux,
                                 const ModelConfig& cfg) {
  ValidationReport rep;
  const Eigen::Index n = data.n_samples(), p = data.n_nodes();
  if (n < 2) rep.error("data: need at least 2 samples");
  if (p < 2) rep.error("data: need at least 2 nodes");
  if (!data.values.allFinite()) rep.error("data: non-finite entries");
  if (aux.values.size() > 0 && !aux.values.allFinite()) {
    rep.error("aux: non-finite entries");
  }
  if (aux.n_vars() > 0 && aux.values.rows() != p) {
    rep.error("aux: row count " + std::to_string(aux.values.rows()) +
              " does not match node count " + std::to_string(p));
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    const double lo = data.values.col(j).minCoeff();
    const double hi = data.values.col(j).maxCoeff();
    if (lo == hi) {
      rep.warning("data: column " + std::to_string(j) +
                  " is constant; it carries no partial-correlation signal");
      break;  // one warning is enough
    }
  }
  if (!(cfg.nu0 > 0.0) || !(cfg.nu1 > 0.0)) {
    rep.error("config: nu0 and nu1 must be positive");
  } else if (cfg.nu0 >= cfg.nu1) {
    rep.error("config: spike sd nu0 must be smaller than slab sd nu1");
  }
  if (!(cfg.lambda > 0.0)) rep.error("config: lambda must be positive");
  if (!(cfg.a_tau > 0.0 && cfg.b_tau > 0.0 && cfg.a_sigma > 0.0 &&
        cfg.b_sigma > 0.0 && cfg.a_o > 0.0)) {
    rep.error("config: prior shape/rate parameters must be positive");
  }
  if (!(cfg.t0_sq > 0.0)) rep.error("config: t0_sq must be positive");
  if (cfg.max_iter < 1) rep.error("config: max_iter must be positive");
  if (!(cfg.elbo_tol > 0.0)) rep.error("config: elbo_tol must be positive");
  if (aux.n_vars() == 0 && cfg.variant != ModelVariant::GMStar) {
    rep.warning("no auxiliary variables supplied: " +
                to_string(cfg.variant) + " degenerates to GM*");
  }
  return rep;
}

ValidationReport validate_state(const VariationalState& s) {
  ValidationReport rep;
  const Eigen::Index p = s.n_nodes();
  if (s.omega.cols() != p || s.delta1.rows() != p || s.delta1.cols() != p) {
    rep.error("state: inconsistent matrix dimensions");
    return rep;
  }
  if (!s.omega.isApprox(s.omega.transpose(), 1e-12)) {
    rep.error("state: omega not symmetric");
  }
  Eigen::LLT<Matrix> llt(s.omega);
  if (llt.info() != Eigen::Success) {
    rep.error("state: omega not positive definite");
  }
  if ((s.delta1.array() < -1e-15).any() ||
      (s.delta1.array() > 1.0 + 1e-15).any()) {
    rep.error("state: edge PPIs outside [0,1]");
  }
  if (s.delta1.diagonal().cwiseAbs().maxCoeff() > 0.0) {
    rep.error("state: edge PPI diagonal not zero");
  }
  if (!s.delta1.isApprox(s.delta1.transpose(), 1e-12)) {
    rep.error("state: edge PPIs not symmetric");
  }
  if (s.n_vars() > 0 && ((s.gamma1.array() < -1e-15).any() ||
                         (s.gamma1.array() > 1.0 + 1e-15).any())) {
    rep.error("state: variable PPIs outside [0,1]");
  }
  if (!(s.alpha_tau > 0.0 && s.beta_tau > 0.0 && s.alpha_sigma > 0.0 &&
        s.beta_sigma > 0.0 && s.alpha_o > 0.0 && s.beta_o > 0.0)) {
    rep.error("state: Gamma/Beta natural parameters must be positive");
  }
  if (!(s.zeta_var > 0.0)) rep.error("state: zeta variance must be positive");
  if (s.n_vars() > 0 && (s.beta_var.array() <= 0.0).any()) {
    rep.error("state: slab variances must be positive");
  }
  // z2 = alpha_hat .* z1 + 1 whenever the z moments were last refreshed.
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const double expect = s.alpha_hat(i, j) * s.z1(i, j) + 1.0;
      if (std::fabs(s.z2(i, j) - expect) > 1e-9 * std::max(1.0, expect)) {
        rep.error("state: z second-moment identity violated");
        i = p;
        break;
      }
    }
  }
  return rep;
}

}  // namespace navgraph
