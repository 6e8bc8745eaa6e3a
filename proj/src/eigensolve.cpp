// SPDX-License-Identifier: Apache-2.0

#include "ksafem/eigensolve.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <random>

#include "ksafem/error.hpp"

namespace ksafem {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// M-Gram Cholesky orthonormalization; returns false on rank deficiency.
bool m_orthonormalize_inplace(Eigen::MatrixXd& U, const SpMat& M) {
  const Eigen::MatrixXd G = U.transpose() * (M * U);
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::MatrixXd Linv =
      llt.matrixL().solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
  U = U * Linv.transpose();
  return true;
}

}  // namespace

Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd& U, const SpMat& M) {
  Eigen::MatrixXd G = U.transpose() * (M * U);
  // scale-aware rank check before the Cholesky
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const double lam_max = es.eigenvalues().maxCoeff();
  if (lam_max <= 0.0 || es.eigenvalues().minCoeff() < 1e-24 * lam_max)
    throw InvalidInput("m_orthonormalize: rank-deficient block");
  Eigen::MatrixXd out = U;
  if (!m_orthonormalize_inplace(out, M))
    throw InvalidInput("m_orthonormalize: rank-deficient block");
  return out;
}

EigenResult lowest_eigs(const EigOperator& H, const SpMat& M, const SpMat& precond,
                        int n, const EigenOptions& opts,
                        const Eigen::MatrixXd* initial_guess) {
  const int dim = static_cast<int>(M.rows());
  if (n < 1) throw InvalidInput("lowest_eigs: need n >= 1");
  if (n > dim) throw InvalidInput("lowest_eigs: more eigenpairs than DOFs");

  const int guard =
      opts.guard_vectors >= 0 ? opts.guard_vectors : std::min(n, 2);
  const int block = std::min(dim, n + guard);

  // preconditioner: incomplete Cholesky of the SPD proxy
  Eigen::IncompleteCholesky<double> ic;
  ic.compute(precond);
  const bool have_ic = ic.info() == Eigen::Success;
  auto apply_prec = [&](const Eigen::MatrixXd& R) -> Eigen::MatrixXd {
    if (!have_ic) return R;
    Eigen::MatrixXd out(R.rows(), R.cols());
    for (int c = 0; c < R.cols(); ++c) out.col(c) = ic.solve(R.col(c));
    return out;
  };

  // M^-1 norms of residual columns via CG (mass matrices are well
  // conditioned, this is cheap).
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> mass_cg;
  mass_cg.setTolerance(1e-10);
  mass_cg.compute(M);
  auto minv_norm = [&](const Eigen::VectorXd& r) -> double {
    const Eigen::VectorXd z = mass_cg.solve(r);
    const double v = r.dot(z);
    return v > 0.0 ? std::sqrt(v) : 0.0;
  };

  Eigen::MatrixXd X(dim, block);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (initial_guess && initial_guess->rows() == dim) {
    const int given = std::min<int>(block, initial_guess->cols());
    X.leftCols(given) = initial_guess->leftCols(given);
    for (int c = given; c < block; ++c)
      for (int r = 0; r < dim; ++r) X(r, c) = gauss(rng);
  } else {
    for (int c = 0; c < block; ++c)
      for (int r = 0; r < dim; ++r) X(r, c) = gauss(rng);
  }
  if (!m_orthonormalize_inplace(X, M)) {
    for (int c = 0; c < block; ++c)
      for (int r = 0; r < dim; ++r) X(r, c) = gauss(rng);
    if (!m_orthonormalize_inplace(X, M))
      throw NumericalFailure("lowest_eigs: could not orthonormalize start block");
  }

  Eigen::MatrixXd P;  // LOBPCG history block
  Eigen::VectorXd ritz = Eigen::VectorXd::Zero(block);
  Eigen::VectorXd resid = Eigen::VectorXd::Constant(block, 1e300);

  EigenResult result;
  int it = 0;
  for (;; ++it) {
    Eigen::MatrixXd HX = H.apply(X);
    Eigen::MatrixXd rayleigh = X.transpose() * HX;
    rayleigh = 0.5 * (rayleigh + rayleigh.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(rayleigh);
    X = X * small.eigenvectors();
    HX = HX * small.eigenvectors();
    ritz = small.eigenvalues();

    const Eigen::MatrixXd MX = M * X;
    Eigen::MatrixXd R = HX - MX * ritz.asDiagonal();
    bool done = true;
    for (int c = 0; c < n; ++c) {
      resid(c) = minv_norm(R.col(c));
      done = done && resid(c) <= opts.tol;
    }
    if (done) {
      result.converged = true;
      break;
    }
    if (it >= opts.max_iters) break;

    Eigen::MatrixXd W = apply_prec(R);
    // Normalize every trial column to unit M-norm before the joint Gram
    // factorization: W and P shrink near convergence, and factoring the
    // raw Gram would lose their directions to rounding.
    auto normalize_columns = [&](Eigen::MatrixXd& B) {
      for (int c = 0; c < B.cols(); ++c) {
        const double nrm = std::sqrt(std::max(B.col(c).dot(M * B.col(c)), 0.0));
        if (nrm > 0.0) B.col(c) /= nrm;
      }
    };
    normalize_columns(W);
    if (P.size()) normalize_columns(P);

    Eigen::MatrixXd basis(dim, block + W.cols() + (P.size() ? P.cols() : 0));
    basis.leftCols(block) = X;
    basis.middleCols(block, W.cols()) = W;
    if (P.size()) basis.rightCols(P.cols()) = P;

    // Gram-based orthonormalization with deflation of dependent columns
    Eigen::MatrixXd Mb = M * basis;
    Eigen::MatrixXd G = basis.transpose() * Mb;
    G = 0.5 * (G + G.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gev(G);
    const double gmax = gev.eigenvalues().maxCoeff();
    int keep = 0;
    for (int i = 0; i < gev.eigenvalues().size(); ++i)
      if (gev.eigenvalues()(i) > 1e-10 * gmax) ++keep;
    Eigen::MatrixXd T(G.rows(), keep);
    int col = 0;
    for (int i = 0; i < gev.eigenvalues().size(); ++i)
      if (gev.eigenvalues()(i) > 1e-10 * gmax)
        T.col(col++) = gev.eigenvectors().col(i) / std::sqrt(gev.eigenvalues()(i));
    const Eigen::MatrixXd Q = basis * T;  // M-orthonormal, spans [X W P]

    const Eigen::MatrixXd HQ = H.apply(Q);
    Eigen::MatrixXd A = Q.transpose() * HQ;
    A = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(A);
    const int take = std::min<int>(block, static_cast<int>(A.rows()));
    const Eigen::MatrixXd Y = rr.eigenvectors().leftCols(take);
    Eigen::MatrixXd Xnew = Q * Y;

    // history block: the component of the update outside the old X span
    Eigen::MatrixXd Pnew = Xnew - X * (X.transpose() * (M * Xnew));
    if (m_orthonormalize_inplace(Pnew, M))
      P = Pnew;
    else
      P.resize(0, 0);

    X = Xnew;
    if (!m_orthonormalize_inplace(X, M))
      throw NumericalFailure("lowest_eigs: lost rank during iteration");
  }

  result.eigenvalues = ritz.head(n);
  result.vectors = X.leftCols(n);
  result.residuals = resid.head(n);
  result.iterations = it;
  result.converged = result.residuals.maxCoeff() <= opts.tol;
  return result;
}

}  // namespace ksafem
