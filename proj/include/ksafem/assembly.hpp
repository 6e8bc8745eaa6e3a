// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <optional>

#include "ksafem/hartree.hpp"
#include "ksafem/model.hpp"
#include "ksafem/orbitals.hpp"
#include "ksafem/parallel.hpp"
#include "ksafem/space.hpp"

namespace ksafem {

/// Sparse symmetric operator on the interior DOFs. Row-major so that the
/// OpenMP matrix-vector products stay deterministic.
struct SparseSym {
  Eigen::SparseMatrix<double, Eigen::RowMajor> mat;

  int dim() const { return static_cast<int>(mat.rows()); }
  /// max_ij |A_ij - A_ji| / max|A|
  double symmetry_defect() const;
};

/// The five pieces of the discrete Kohn-Sham operator
/// H(rho) = A_kin + B(rho) + P P^T with mass matrix M.
struct HamiltonianParts {
  SparseSym kinetic;    // 1/2 stiffness
  SparseSym mass;
  SparseSym potential;  // V_loc + V_H(rho) + e_xc'(rho), may be empty pattern
  Eigen::MatrixXd proj; // ndof x n_proj low-rank factor
  std::optional<HartreeField> hartree;

  Eigen::VectorXd apply_h(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_h(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply_m(const Eigen::VectorXd& x) const {
    return mass.mat * x;
  }
};

enum class HartreePath { Poisson, Direct };

struct AssemblyOptions {
  HartreePath hartree_path = HartreePath::Poisson;
  Exec exec = Exec::Parallel;
};

/// Stiffness (times 1/2) and mass only; the linear backbone.
SparseSym assemble_kinetic(const FeSpace& space, Exec exec = Exec::Parallel);
SparseSym assemble_mass(const FeSpace& space, Exec exec = Exec::Parallel);

/// Potential matrix for given values of the total local potential at the
/// potential-rule quadrature points (n_elems x n_q).
SparseSym assemble_potential(const FeSpace& space, const Eigen::MatrixXd& v_quad,
                             Exec exec = Exec::Parallel);

HamiltonianParts assemble_parts(const FeSpace& space, const KohnShamModel& model,
                                const DensityField& rho,
                                const AssemblyOptions& opts = {});

/// Values of V_loc (+ V_H) (+ e_xc'(rho)) at the potential-rule points.
Eigen::MatrixXd potential_quad_values(const FeSpace& space, const KohnShamModel& model,
                                      const DensityField& rho,
                                      const HartreeField* hartree, Exec exec);

struct EnergyBreakdown {
  double kinetic = 0.0;
  double v_loc = 0.0;
  double nonlocal = 0.0;
  double hartree = 0.0;
  double xc = 0.0;
  double total() const { return kinetic + v_loc + nonlocal + hartree + xc; }
};

/// Kohn-Sham total energy of an orbital set (density taken from Phi).
EnergyBreakdown total_energy(const FeSpace& space, const KohnShamModel& model,
                             const OrbitalSet& phi, const AssemblyOptions& opts = {});

/// Lambda_ij = (phi_j, H_Phi phi_i), symmetrized; the asymmetry residual of
/// the raw matrix is returned through `asym` when given.
Eigen::MatrixXd lagrange_multiplier(const FeSpace& space, const KohnShamModel& model,
                                    const OrbitalSet& phi,
                                    const AssemblyOptions& opts = {},
                                    double* asym = nullptr);

}  // namespace ksafem
