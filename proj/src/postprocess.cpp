#include "navgraph/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "navgraph/rng.hpp"

namespace navgraph {

std::vector<bool> select_by_mpm(const std::vector<double>& ppis) {
  std::vector<bool> mask(ppis.size());
  for (std::size_t i = 0; i < ppis.size(); ++i) mask[i] = ppis[i] >= 0.5;
  return mask;
}

double fdr_estimate(const std::vector<double>& ppis, double kappa) {
  double false_mass = 0.0;
  double selected = 0.0;
  for (double p : ppis) {
    if (p > kappa) {
      false_mass += 1.0 - p;
      selected += 1.0;
    }
  }
  return selected > 0.0 ? false_mass / selected : 0.0;
}

double fdr_threshold(const std::vector<double>& ppis, double target_fdr) {
  if (!(target_fdr > 0.0 && target_fdr < 1.0)) {
    throw std::invalid_argument("fdr_threshold: target must lie in (0,1)");
  }
  std::vector<double> grid = ppis;
  grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double kappa : grid) {
    bool any = false;
    for (double p : ppis) {
      if (p > kappa) {
        any = true;
        break;
      }
    }
    if (!any) continue;
    if (fdr_estimate(ppis, kappa) <= target_fdr) return kappa;
  }
  return 1.0;
}

RocCurve roc_curve(const std::vector<bool>& truth,
                   const std::vector<double>& scores, double max_fpr) {
  if (truth.size() != scores.size()) {
    throw std::invalid_argument("roc_curve: size mismatch");
  }
  double n_pos = 0.0, n_neg = 0.0;
  for (bool t : truth) (t ? n_pos : n_neg) += 1.0;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw std::invalid_argument(
        "roc_curve: need at least one positive and one negative");
  }
  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.max_fpr = max_fpr;
  curve.points.emplace_back(0.0, 0.0);
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    // consume the whole tie group at once: ties step diagonally.
    while (i < order.size() && scores[order[i]] == s) {
      (truth[order[i]] ? tp : fp) += 1.0;
      ++i;
    }
    curve.points.emplace_back(fp / n_neg, tp / n_pos);
  }
  return curve;
}

double pauc(const std::vector<bool>& truth, const std::vector<double>& scores,
            double max_fpr) {
  if (!(max_fpr > 0.0 && max_fpr <= 1.0)) {
    throw std::invalid_argument("pauc: max_fpr must lie in (0,1]");
  }
  const RocCurve curve = roc_curve(truth, scores, max_fpr);
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    double x0 = curve.points[k - 1].first, y0 = curve.points[k - 1].second;
    double x1 = curve.points[k].first, y1 = curve.points[k].second;
    if (x0 >= max_fpr) break;
    if (x1 > max_fpr) {
      // clip the crossing segment
      const double t = (max_fpr - x0) / (x1 - x0);
      y1 = y0 + t * (y1 - y0);
      x1 = max_fpr;
    }
    area += (x1 - x0) * 0.5 * (y0 + y1);
  }
  const double a_min = 0.5 * max_fpr * max_fpr;
  const double a_max = max_fpr;
  return 0.5 * (1.0 + (area - a_min) / (a_max - a_min));
}

std::vector<int> node_degrees(const std::vector<std::vector<bool>>& mask) {
  const std::size_t p = mask.size();
  for (std::size_t i = 0; i < p; ++i) {
    if (mask[i].size() != p) {
      throw std::invalid_argument("node_degrees: mask not square");
    }
    if (mask[i][i]) {
      throw std::invalid_argument("node_degrees: diagonal must be empty");
    }
    for (std::size_t j = 0; j < p; ++j) {
      if (mask[i][j] != mask[j][i]) {
        throw std::invalid_argument("node_degrees: mask not symmetric");
      }
    }
  }
  std::vector<int> deg(p, 0);
  for (std::size_t i = 0; i < p; ++i) {
    deg[i] = static_cast<int>(
        std::count(mask[i].begin(), mask[i].end(), true));
  }
  return deg;
}

Vector node_degrees(const Matrix& mask01) {
  const Eigen::Index p = mask01.rows();
  if (mask01.cols() != p || !mask01.isApprox(mask01.transpose())) {
    throw std::invalid_argument("node_degrees: mask not symmetric");
  }
  if (mask01.diagonal().cwiseAbs().maxCoeff() > 0.0) {
    throw std::invalid_argument("node_degrees: diagonal must be empty");
  }
  return mask01.rowwise().sum();
}

namespace {
double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return 0.5 * (hi + v[n / 2 - 1]);
}
}  // namespace

double median_permutation_test(const Vector& values,
                               const std::vector<int>& subset,
                               int n_permutations, std::uint64_t seed) {
  if (subset.empty() || subset.size() > static_cast<std::size_t>(values.size())) {
    throw std::invalid_argument("median_permutation_test: bad subset size");
  }
  std::vector<double> sub;
  sub.reserve(subset.size());
  for (int i : subset) sub.push_back(values[i]);
  const double observed = median_of(sub);
  Rng rng(seed);
  int hits = 0;
  for (int r = 0; r < n_permutations; ++r) {
    const auto idx =
        rng.sample_without_replacement(values.size(), subset.size());
    std::vector<double> draw;
    draw.reserve(subset.size());
    for (std::size_t i : idx) draw.push_back(values[i]);
    if (median_of(std::move(draw)) >= observed) ++hits;
  }
  return (hits + 1.0) / (n_permutations + 1.0);
}

std::vector<double> upper_triangle(const Matrix& m) {
  std::vector<double> out;
  out.reserve(m.rows() * (m.rows() - 1) / 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

std::vector<bool> upper_triangle_mask(const Matrix& m, double threshold) {
  std::vector<bool> out;
  out.reserve(m.rows() * (m.rows() - 1) / 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      out.push_back(m(i, j) >= threshold);
    }
  }
  return out;
}

}  // namespace navgraph
