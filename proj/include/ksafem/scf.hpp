// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "ksafem/assembly.hpp"
#include "ksafem/eigensolve.hpp"
#include "ksafem/model.hpp"
#include "ksafem/orbitals.hpp"

namespace ksafem {

struct ScfConfig {
  double tol = 1e-7;          // relative L2 density residual
  double mix_beta = 0.3;      // linear density mixing
  int max_iters = 60;
  double eig_tol = 1e-8;
  int eig_max_iters = 600;
  std::uint64_t seed = 20240501u;
  HartreePath hartree_path = HartreePath::Poisson;
  Exec exec = Exec::Parallel;
};

struct ScfIteration {
  double energy = 0.0;
  double density_residual = 0.0;  // ||rho_out - rho_in|| / ||rho_in||
  double eigen_residual = 0.0;    // max over orbitals
};

struct ScfReport {
  std::vector<ScfIteration> history;
  int iterations = 0;
  bool converged = false;
};

struct ScfResult {
  OrbitalSet orbitals;
  ScfReport report;
  HamiltonianParts parts;  // assembled at the final density
};

/// Ground-state solve of the discrete Kohn-Sham equation on a fixed mesh
/// by SCF with linear density mixing. Density-independent models converge
/// in a single eigensolve.
ScfResult scf_solve(std::shared_ptr<const FeSpace> space, const KohnShamModel& model,
                    const ScfConfig& config, const Eigen::MatrixXd* guess = nullptr);

}  // namespace ksafem
