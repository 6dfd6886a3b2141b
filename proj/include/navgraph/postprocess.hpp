#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "navgraph/types.hpp"

namespace navgraph {

// Median probability model: keep items with PPI >= 0.5.
std::vector<bool> select_by_mpm(const std::vector<double>& ppis);

// Bayesian FDR estimate at threshold kappa:
//   FDR(kappa) = sum (1 - ppi) 1{ppi > kappa} / sum 1{ppi > kappa}.
double fdr_estimate(const std::vector<double>& ppis, double kappa);

// Smallest threshold kappa on the candidate grid {0} + distinct PPI values
// whose estimated FDR is at or below target_fdr; 1 when unattainable (empty
// selection).
double fdr_threshold(const std::vector<double>& ppis, double target_fdr);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), fpr ascending
  double max_fpr = 0.1;
};

// Step ROC over score thresholds; tied scores move diagonally.
RocCurve roc_curve(const std::vector<bool>& truth,
                   const std::vector<double>& scores, double max_fpr);

// Standardised partial AUC over fpr in [0, max_fpr]: the raw trapezoid area
// A is mapped to 0.5 {1 + (A - A_min)/(A_max - A_min)} with A_min =
// max_fpr^2/2 (chance) and A_max = max_fpr (perfection), so a random
// classifier scores 0.5 and a perfect one scores 1.
double pauc(const std::vector<bool>& truth, const std::vector<double>& scores,
            double max_fpr = 0.1);

// Degrees of a symmetric zero-diagonal adjacency mask.
std::vector<int> node_degrees(const std::vector<std::vector<bool>>& mask);
Vector node_degrees(const Matrix& mask01);

// Permutation test for "the median of values over the given subset exceeds
// that of random subsets of the same size"; returns the empirical p-value
// (add-one correction).
double median_permutation_test(const Vector& values,
                               const std::vector<int>& subset,
                               int n_permutations = 10000,
                               std::uint64_t seed = 1);

// Upper-triangle flattening helpers shared by the evaluation paths.
std::vector<double> upper_triangle(const Matrix& m);
std::vector<bool> upper_triangle_mask(const Matrix& m, double threshold);

}  // namespace navgraph
