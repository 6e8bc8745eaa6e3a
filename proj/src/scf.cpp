// SPDX-License-Identifier: Apache-2.0

#include "ksafem/scf.hpp"

#include <cmath>

#include "ksafem/error.hpp"

namespace ksafem {

namespace {

// SPD proxy for preconditioning the eigensolver: shifted kinetic matrix.
Eigen::SparseMatrix<double, Eigen::RowMajor> spd_proxy(const HamiltonianParts& parts) {
  Eigen::SparseMatrix<double, Eigen::RowMajor> out = parts.kinetic.mat;
  out += parts.mass.mat;
  return out;
}

}  // namespace

ScfResult scf_solve(std::shared_ptr<const FeSpace> space, const KohnShamModel& model,
                    const ScfConfig& config, const Eigen::MatrixXd* guess) {
  model.validate();
  const int n_orb = model.n_orbitals;
  if (n_orb > space->ndof())
    throw InvalidInput("scf_solve: more orbitals than degrees of freedom");

  AssemblyOptions aopts;
  aopts.hartree_path = config.hartree_path;
  aopts.exec = config.exec;

  EigenOptions eopts;
  eopts.tol = config.eig_tol;
  eopts.max_iters = config.eig_max_iters;
  eopts.seed = config.seed;

  ScfResult out;
  out.report.converged = false;

  // initial density: from the guess orbitals when given, else zero
  DensityField rho_in;
  if (guess && guess->cols() >= 1) {
    rho_in = density(*space, *guess);
  } else {
    rho_in.coeffs = Eigen::VectorXd::Zero(space->ndof());
    const TetQuadrature& q = tet_quadrature(space->quad_degree_potential());
    rho_in.quad = Eigen::MatrixXd::Zero(space->mesh().n_tets(), q.points.size());
  }

  const Eigen::MatrixXd* eig_guess = guess;
  Eigen::MatrixXd previous;
  const int max_iters = model.density_dependent() ? config.max_iters : 1;

  for (int iter = 0; iter < max_iters; ++iter) {
    HamiltonianParts parts = assemble_parts(*space, model, rho_in, aopts);
    EigOperator H;
    H.sparse = nullptr;
    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_h = parts.kinetic.mat;
    if (parts.potential.mat.nonZeros() > 0) sparse_h += parts.potential.mat;
    H.sparse = &sparse_h;
    H.low_rank = parts.proj.cols() > 0 ? &parts.proj : nullptr;
    const auto proxy = spd_proxy(parts);

    EigenResult eig = lowest_eigs(H, parts.mass.mat, proxy, n_orb, eopts, eig_guess);
    if (!eig.converged && !model.density_dependent())
      throw NumericalFailure("scf_solve: eigensolver did not converge");

    DensityField rho_out = density(*space, eig.vectors);

    ScfIteration row;
    row.eigen_residual = eig.residuals.maxCoeff();
    const Eigen::MatrixXd diff = rho_out.quad - rho_in.quad;
    const double denom = density_l2(*space, rho_in.quad);
    row.density_residual = denom > 0.0 ? density_l2(*space, diff) / denom : 1.0;

    out.orbitals.space = space;
    out.orbitals.C = eig.vectors;
    out.orbitals.mu = eig.eigenvalues;
    out.orbitals.Lambda = eig.eigenvalues.asDiagonal();
    out.orbitals.rho = rho_out;
    out.parts = std::move(parts);

    row.energy = model.density_dependent()
                     ? total_energy(*space, model, out.orbitals, aopts).total()
                     : eig.eigenvalues.sum();
    out.report.history.push_back(row);
    out.report.iterations = iter + 1;

    if (!model.density_dependent()) {
      out.report.converged = eig.converged;
      break;
    }
    if (row.density_residual <= config.tol && eig.converged) {
      out.report.converged = true;
      break;
    }

    // linear mixing in both density representations
    rho_in.coeffs = (1.0 - config.mix_beta) * rho_in.coeffs + config.mix_beta * rho_out.coeffs;
    rho_in.quad = (1.0 - config.mix_beta) * rho_in.quad + config.mix_beta * rho_out.quad;
    previous = eig.vectors;
    eig_guess = &previous;
  }
  return out;
}

}  // namespace ksafem
