#pragma once

#include "navgraph/types.hpp"

namespace navgraph {

// One full conditional-maximisation sweep over the columns of the precision
// matrix. For column i (off-diagonal block u, diagonal entry w):
//   u = -{(s_ii + lambda) (Omega_{-i,-i})^{-1} + diag(shrink_{-i,i})}^{-1}
//        S_{-i,i}
//   w = u^T (Omega_{-i,-i})^{-1} u + N / (s_ii + lambda),
// where shrink_ij is the spike-and-slab quadratic weight of edge (i,j):
// tau1 d*_ij for point inference, tau^(1) (delta1/nu1^2 + (1-delta1)/nu0^2)
// for variational inference. Positive definiteness is preserved whenever the
// input is positive definite.
//
// Throws std::runtime_error if a linear solve fails, which indicates a
// violated positive-definiteness invariant upstream.
void cm_sweep_omega(Matrix& omega, const Matrix& gram, double n_samples,
                    double lambda, const Matrix& shrink);

// log|Omega| via Cholesky; throws if the factorisation fails.
double log_det_pd(const Matrix& omega);

}  // namespace navgraph
