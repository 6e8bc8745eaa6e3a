// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <string>

#include "ksafem/orbitals.hpp"
#include "ksafem/parallel.hpp"
#include "ksafem/space.hpp"

namespace ksafem {

/// Hartree potential V_H = rho * 1/r as a full nodal field (it does not
/// vanish on the boundary).
struct HartreeField {
  Eigen::VectorXd node_values;
  std::string method;  // "poisson" | "direct"
};

/// Direct-convolution oracle: double quadrature of rho(y)/|x-y| at every
/// node. Refuses meshes above 5000 elements; the self element is handled
/// by a subdivided centroid rule with the distance floored at 1e-3 h_tau.
HartreeField hartree_direct(const FeSpace& space, const DensityField& rho,
                            Exec exec = Exec::Parallel);

/// Fast path: -Lap V_H = 4 pi rho with Dirichlet data from the
/// monopole+dipole expansion of rho about its centroid.
HartreeField hartree_poisson(const FeSpace& space, const DensityField& rho,
                             Exec exec = Exec::Parallel);

/// 1/2 D(rho, rho) by quadrature of rho * V_H.
double coulomb_energy(const FeSpace& space, const DensityField& rho,
                      const HartreeField& vh);

/// D(f, g) against two density fields through the direct kernel; the
/// symmetry/bilinearity oracle for tests.
double coulomb_pairing_direct(const FeSpace& space, const DensityField& f,
                              const DensityField& g, Exec exec = Exec::Parallel);

}  // namespace ksafem
