// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <optional>

#include "ksafem/parallel.hpp"

namespace ksafem {

/// Operator for the generalized problem H u = mu M u: a sparse symmetric
/// part plus an optional low-rank factor P P^T, with an SPD proxy matrix
/// for preconditioning.
struct EigOperator {
  const Eigen::SparseMatrix<double, Eigen::RowMajor>* sparse = nullptr;
  const Eigen::MatrixXd* low_rank = nullptr;  // may be null or 0 columns

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd y = (*sparse) * x;
    if (low_rank && low_rank->cols() > 0)
      y.noalias() += (*low_rank) * (low_rank->transpose() * x);
    return y;
  }
};

struct EigenResult {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd vectors;       // ndof x N, M-orthonormal
  Eigen::VectorXd residuals;     // ||H u - mu M u||_{M^-1}
  int iterations = 0;
  bool converged = false;
};

struct EigenOptions {
  double tol = 1e-8;
  int max_iters = 600;
  std::uint64_t seed = 20240501u;
  int guard_vectors = -1;  // -1: min(N, 2) extra Ritz vectors
};

/// Lowest-N eigenpairs by LOBPCG with M-orthonormalization each step.
/// `precond` is any SPD sparse matrix whose inverse is applied
/// approximately (incomplete Cholesky); pass the shifted kinetic matrix.
EigenResult lowest_eigs(const EigOperator& H,
                        const Eigen::SparseMatrix<double, Eigen::RowMajor>& M,
                        const Eigen::SparseMatrix<double, Eigen::RowMajor>& precond,
                        int n, const EigenOptions& opts = {},
                        const Eigen::MatrixXd* initial_guess = nullptr);

/// M-orthonormalize the columns of U in place (span preserved); throws on
/// rank deficiency.
Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd& U,
                                 const Eigen::SparseMatrix<double, Eigen::RowMajor>& M);

}  // namespace ksafem
