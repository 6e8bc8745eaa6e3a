// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <memory>

#include "ksafem/space.hpp"

namespace ksafem {

/// Electron density carried in two consistent representations: the nodal
/// interpolant (for mixing and the Poisson right-hand side) and values at
/// the potential-order quadrature points of every element (for assembly
/// and energies). Quadrature values evaluated straight from orbitals are
/// nonnegative by construction; mixing preserves that.
struct DensityField {
  Eigen::VectorXd coeffs;  // interior DOFs of the nodal interpolant
  Eigen::MatrixXd quad;    // n_elems x n_quad_points(potential rule)

  DensityField() = default;
};

/// N discrete orbitals as a coefficient matrix, with the eigenvalues and
/// the Lagrange multiplier matrix (diagonal right after an eigensolve,
/// dense after a unitary transform).
struct OrbitalSet {
  std::shared_ptr<const FeSpace> space;
  Eigen::MatrixXd C;       // ndof x N
  Eigen::VectorXd mu;      // ascending eigenvalues (when eigensolved)
  Eigen::MatrixXd Lambda;  // N x N multiplier matrix
  DensityField rho;

  int n_orbitals() const { return static_cast<int>(C.cols()); }

  /// Same orbitals rotated by an orthogonal U; Lambda conjugates, the
  /// density is untouched.
  OrbitalSet transformed(const Eigen::MatrixXd& U) const;
};

/// rho = sum_i |phi_i|^2 from the orbital coefficients: exact values at
/// the potential-rule quadrature points plus the nodal interpolant.
DensityField density(const FeSpace& space, const Eigen::MatrixXd& C);

/// Density represented by an interpolant only (initial guesses, tests).
/// Quadrature values are evaluated from the interpolant and clamped at 0.
DensityField density_from_coeffs(const FeSpace& space, const Eigen::VectorXd& coeffs);

/// L2 norm of the quadrature representation of a density difference.
double density_l2(const FeSpace& space, const Eigen::MatrixXd& quad_values);

}  // namespace ksafem
