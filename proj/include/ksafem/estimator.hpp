// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include "ksafem/assembly.hpp"
#include "ksafem/linear_bvp.hpp"
#include "ksafem/orbitals.hpp"

namespace ksafem {

/// Per-element residual indicators eta^2_tau and oscillations osc^2_tau.
/// Face jump contributions are attached to both adjacent elements, so the
/// per-element sum double counts interior faces exactly as the "e subset
/// of boundary tau" convention does.
struct IndicatorField {
  Eigen::VectorXd eta2;  // per tet
  Eigen::VectorXd osc2;  // per tet
  Eigen::VectorXd face_jump2;  // per interior face: h_e ||J_e||^2

  double total_eta2() const;
  double total_osc2() const;
};

/// Indicators for a discrete Kohn-Sham solution (general multiplier
/// matrix Lambda; diagonal right after SCF).
IndicatorField ks_indicators(const FeSpace& space, const KohnShamModel& model,
                             const OrbitalSet& phi,
                             const HamiltonianParts* parts = nullptr,
                             const AssemblyOptions& opts = {});

/// Indicators for the linear model problem, residual F + 1/2 Lap Gamma.
IndicatorField linear_indicators(const FeSpace& space, const LinearProblem& problem,
                                 const Eigen::MatrixXd& nodal, Exec exec = Exec::Parallel);

/// <R_h(Phi_h), Gamma> = sum_tau (R_tau, Gamma)_tau + sum_faces (J_e, Gamma)_e
/// with Gamma given in a space on the once-refined mesh (test functions in
/// V_h embed through transfer). Integration runs over the fine elements, so
/// the value matches the weak residual to solver precision. `gamma` is
/// (fine ndof) x N.
double residual_functional(const FeSpace& space, const KohnShamModel& model,
                           const OrbitalSet& phi, const FeSpace& gamma_space,
                           const Eigen::MatrixXd& gamma,
                           const HamiltonianParts* parts = nullptr,
                           const AssemblyOptions& opts = {});

/// The weak residual sum_i (H phi_i - sum_j lambda_ij phi_j, gamma_i)
/// integrated over the same fine elements -- the independent second route
/// of the consistency identity.
double weak_residual(const FeSpace& space, const KohnShamModel& model,
                     const OrbitalSet& phi, const FeSpace& gamma_space,
                     const Eigen::MatrixXd& gamma,
                     const HamiltonianParts* parts = nullptr,
                     const AssemblyOptions& opts = {});

/// Totals eta^2(Phi U, Omega) and eta^2(Phi, Omega) for the factor-N
/// bound of rotated orbital sets; throws on a non-orthogonal U.
std::pair<double, double> estimator_transform_bound(const FeSpace& space,
                                                    const KohnShamModel& model,
                                                    const OrbitalSet& phi,
                                                    const Eigen::MatrixXd& U,
                                                    const AssemblyOptions& opts = {});

}  // namespace ksafem
