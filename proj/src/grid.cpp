#include "navgraph/grid.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "navgraph/vbecm.hpp"

namespace navgraph {

std::string to_string(SelectionCriterion c) {
  switch (c) {
    case SelectionCriterion::AIC: return "aic";
    case SelectionCriterion::BIC: return "bic";
    case SelectionCriterion::EBIC: return "ebic";
  }
  return "?";
}

std::vector<double> default_nu0_grid() {
  std::vector<double> g;
  for (int k = 0; k < 9; ++k) {
    g.push_back(std::pow(10.0, -2.0 + 0.25 * k));
  }
  g.back() = 1.0;
  return g;
}

std::vector<double> default_sigma0_grid() {
  return {1e-6, 1e-3, 1e-2, 1e-1};
}

Matrix threshold_precision(const FitResult& fit) {
  const Matrix* omega = nullptr;
  if (fit.vb) {
    omega = &fit.vb->omega;
  } else if (fit.pt) {
    omega = &fit.pt->omega;
  } else {
    throw std::invalid_argument("threshold_precision: empty fit");
  }
  Matrix out = *omega;
  const Eigen::Index p = out.rows();
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i != j && fit.edge_ppi(i, j) < 0.5) out(i, j) = 0.0;
    }
  }
  return out;
}

Criteria compute_criteria(const FitResult& fit, const Matrix& gram,
                          double n_samples, double ebic_gamma, bool* pd_ok) {
  const Matrix thresholded = threshold_precision(fit);
  const Eigen::Index p = thresholded.rows();
  Eigen::LLT<Matrix> llt(thresholded);
  if (pd_ok) *pd_ok = llt.info() == Eigen::Success;
  if (llt.info() != Eigen::Success) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, inf};
  }
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double k = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      k += fit.edge_ppi(i, j) >= 0.5;
    }
  }
  const double fit_term = -n_samples * log_det +
                          gram.cwiseProduct(thresholded).sum();
  Criteria c;
  c.aic = fit_term + 2.0 * k;
  c.bic = fit_term + std::log(n_samples) * k;
  c.ebic = c.bic + 4.0 * ebic_gamma * std::log(static_cast<double>(p)) * k;
  return c;
}

void parallel_for(int n_tasks, int workers,
                  const std::function<void(int)>& task) {
  if (workers < 1) workers = 1;
  if (workers == 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      task(i);
    }
  };
  std::vector<std::thread> threads;
  const int n_threads = std::min(workers, n_tasks);
  threads.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

GridOutcome run_grid(const DataMatrix& data, const AuxiliaryMatrix& aux,
                     const ModelConfig& cfg, const GridSpec& grid,
                     EngineKind engine, double ecm_sigma1) {
  std::vector<double> nu0s =
      grid.nu0_values.empty() ? default_nu0_grid() : grid.nu0_values;
  if (nu0s.empty()) throw std::invalid_argument("run_grid: empty grid");
  for (double v : nu0s) {
    if (!(v > 0.0 && v < grid.nu1)) {
      throw std::invalid_argument("run_grid: grid values must satisfy "
                                  "0 < nu0 < nu1");
    }
  }

  const bool ecm_vars = engine == EngineKind::ECM &&
                        cfg.variant != ModelVariant::GMStar &&
                        aux.n_vars() > 0;
  std::vector<double> sigma0s;
  if (ecm_vars) {
    sigma0s = grid.sigma0_values.empty() ? default_sigma0_grid()
                                         : grid.sigma0_values;
  } else {
    sigma0s = {0.0};  // placeholder: single pass, sigma0 unused
  }

  GridOutcome out;
  out.points.resize(nu0s.size() * sigma0s.size());

  // The Gram matrix is recomputed inside each engine; the centred data is
  // shared read-only. Each point gets an independent seed so the outcome is
  // invariant to scheduling.
  const int n_points = static_cast<int>(out.points.size());
  parallel_for(n_points, grid.workers, [&](int idx) {
    const double nu0 = nu0s[idx % nu0s.size()];
    const double sigma0 = sigma0s[idx / nu0s.size()];
    GridPoint& gp = out.points[idx];
    gp.nu0 = nu0;
    gp.sigma0 = ecm_vars ? sigma0 : 0.0;
    try {
      ModelConfig point_cfg = cfg;
      point_cfg.nu0 = nu0;
      point_cfg.nu1 = grid.nu1;
      point_cfg.seed = cfg.seed + static_cast<std::uint64_t>(idx);
      FitResult fit;
      if (engine == EngineKind::VBECM) {
        fit = run_vbecm(data, aux, point_cfg);
      } else {
        EcmConfig ecfg;
        static_cast<ModelConfig&>(ecfg) = point_cfg;
        ecfg.sigma1 = ecm_sigma1;
        ecfg.sigma0 = ecm_vars ? sigma0 : 1e-2;
        fit = run_ecm(data, aux, ecfg);
      }
      const Matrix gram = [&] {
        const DataMatrix centred = center_columns(
            cfg.scale_columns ? scale_columns(data) : data);
        return Matrix(centred.values.transpose() * centred.values);
      }();
      fit.criteria = compute_criteria(fit, gram, data.n_samples(),
                                      grid.ebic_gamma, &gp.pd_ok);
      // A sparse spike-and-slab fit whose median-probability graph covers
      // more than half of all pairs is the degenerate dense mode of the
      // scale hierarchy, not a candidate model; such points are
      // disqualified like non-PD ones.
      const Eigen::Index p = fit.edge_ppi.rows();
      double dense = 0.0;
      for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = a + 1; b < p; ++b) {
          dense += fit.edge_ppi(a, b) >= 0.5;
        }
      }
      if (dense > 0.25 * p * (p - 1.0)) {
        const double inf = std::numeric_limits<double>::infinity();
        fit.criteria = {inf, inf, inf};
        gp.pd_ok = false;
        gp.error = "degenerate dense fit (median-probability graph covers "
                   "most pairs)";
      }
      gp.fit = std::move(fit);
      gp.ok = true;
    } catch (const std::exception& e) {
      gp.ok = false;
      gp.error = e.what();
    }
  });

  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_points; ++i) {
    const GridPoint& gp = out.points[i];
    if (!gp.ok) continue;
    double value = 0.0;
    switch (grid.criterion) {
      case SelectionCriterion::AIC: value = gp.fit.criteria.aic; break;
      case SelectionCriterion::BIC: value = gp.fit.criteria.bic; break;
      case SelectionCriterion::EBIC: value = gp.fit.criteria.ebic; break;
    }
    if (value < best_value) {
      best_value = value;
      out.best_index = i;
    }
  }
  if (out.best_index < 0) {
    std::string detail;
    for (const auto& gp : out.points) {
      if (!gp.ok && detail.empty()) detail = gp.error;
    }
    throw std::runtime_error("run_grid: every grid point failed: " + detail);
  }
  return out;
}

}  // namespace navgraph
