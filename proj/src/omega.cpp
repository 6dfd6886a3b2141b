#include "navgraph/omega.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace navgraph {

double log_det_pd(const Matrix& omega) {
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("log_det_pd: matrix not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

void cm_sweep_omega(Matrix& omega, const Matrix& gram, double n_samples,
                    double lambda, const Matrix& shrink) {
  const Eigen::Index p = omega.rows();
  if (p < 2) throw std::invalid_argument("cm_sweep_omega: need P >= 2");

  // Sigma = Omega^{-1} is maintained across column updates; the inverse of
  // the (p-1)x(p-1) principal minor is then a Schur complement of Sigma,
  // which avoids a fresh O(P^3) inversion per column.
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "cm_sweep_omega: precision matrix lost positive definiteness");
  }
  Matrix sigma = llt.solve(Matrix::Identity(p, p));

  Matrix b(p - 1, p - 1);
  Vector rhs(p - 1), u(p - 1), sig_col(p - 1), shrink_col(p - 1);

  for (Eigen::Index i = 0; i < p; ++i) {
    // Gather the -i blocks.
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j == i) continue;
      Eigen::Index c = 0;
      for (Eigen::Index k = 0; k < p; ++k) {
        if (k == i) continue;
        b(r, c) = sigma(j, k);
        ++c;
      }
      sig_col[r] = sigma(j, i);
      rhs[r] = gram(j, i);
      shrink_col[r] = shrink(j, i);
      ++r;
    }
    // (Omega_{-i,-i})^{-1} = Sigma_{-i,-i} - Sigma_{-i,i} Sigma_{i,-i}/s_ii.
    b.noalias() -= (sig_col / sigma(i, i)) * sig_col.transpose();

    const double sii_lam = gram(i, i) + lambda;
    Matrix k_mat = sii_lam * b;
    k_mat.diagonal() += shrink_col;
    Eigen::LLT<Matrix> kllt(k_mat);
    if (kllt.info() != Eigen::Success) {
      throw std::runtime_error(
          "cm_sweep_omega: column system not positive definite (upstream "
          "positive-definiteness invariant violated)");
    }
    u = -kllt.solve(rhs);

    const double quad = u.dot(b * u);
    const double w = quad + n_samples / sii_lam;

    // Rank-2 symmetric update of Omega and, via Woodbury, of Sigma.
    Vector d = Vector::Zero(p);
    r = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j == i) continue;
      d[j] = u[r] - omega(j, i);
      ++r;
    }
    d[i] = 0.5 * (w - omega(i, i));

    r = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j == i) continue;
      omega(j, i) = u[r];
      omega(i, j) = u[r];
      ++r;
    }
    omega(i, i) = w;

    // Omega_new = Omega + d e_i^T + e_i d^T.
    Vector sd = sigma * d;
    Vector se = sigma.col(i);
    Eigen::Matrix2d m2;
    m2(0, 0) = d.dot(sd);
    m2(0, 1) = d.dot(se) + 1.0;  // W^{-1} contributes the off-diagonal 1
    m2(1, 0) = m2(0, 1);
    m2(1, 1) = se[i];
    const double det = m2(0, 0) * m2(1, 1) - m2(0, 1) * m2(1, 0);
    if (!std::isfinite(det) || std::fabs(det) < 1e-300) {
      // Fall back to a fresh inverse.
      Eigen::LLT<Matrix> rllt(omega);
      if (rllt.info() != Eigen::Success) {
        throw std::runtime_error(
            "cm_sweep_omega: update destroyed positive definiteness");
      }
      sigma = rllt.solve(Matrix::Identity(p, p));
      continue;
    }
    Eigen::Matrix2d m2inv;
    m2inv << m2(1, 1) / det, -m2(0, 1) / det, -m2(1, 0) / det, m2(0, 0) / det;
    Matrix us(p, 2);
    us.col(0) = sd;
    us.col(1) = se;
    sigma.noalias() -= us * m2inv * us.transpose();
    // Symmetrise against drift.
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
  }
}

}  // namespace navgraph
