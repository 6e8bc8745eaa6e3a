// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "ksafem/parallel.hpp"
#include "ksafem/space.hpp"

namespace ksafem {

using BoundaryField = std::function<double(const Vec3&, int component)>;
using GradField = std::function<Vec3(const Vec3&)>;

/// The linear elliptic model problem L Phi = F with the half-gradient form
/// a(u, v) = 1/2 (grad u, grad v); also the Hartree Poisson backend when
/// inhomogeneous boundary data is supplied.
struct LinearProblem {
  int n_components = 1;
  std::vector<ScalarField> f;
  BoundaryField boundary;                // null: homogeneous Dirichlet
  std::vector<ScalarField> exact;        // optional, for error studies
  std::vector<GradField> exact_grad;

  bool has_exact() const { return !exact.empty(); }
};

struct LinearSolveResult {
  Eigen::MatrixXd nodal;  // n_nodes x n_components, boundary rows filled
  int cg_iterations = 0;
  double rel_residual = 0.0;
};

/// Galerkin solve, PCG to relative residual 1e-10. `rhs_degree` picks the
/// load quadrature (default: the space's potential rule); manufactured
/// problems can raise it until the variational crime is negligible.
LinearSolveResult solve_linear(const FeSpace& space, const LinearProblem& problem,
                               Exec exec = Exec::Parallel, int rhs_degree = -1);

/// Same solver with the right-hand side given at the quadrature points of
/// tet_quadrature(rhs_degree) (n_elems x n_q) per component.
LinearSolveResult solve_linear_quad_rhs(const FeSpace& space,
                                        const std::vector<Eigen::MatrixXd>& rhs_quad,
                                        const BoundaryField& boundary,
                                        Exec exec = Exec::Parallel, int rhs_degree = -1);

struct LinearAfemRecord {
  int iter = 0;
  int ndof = 0;
  int n_tets = 0;
  double energy = 0.0;        // 1/2 a(u,u) - (F,u)
  double eta2 = 0.0;
  double osc2 = 0.0;
  double h1_error = 0.0;      // 0 when no exact solution given
  double quasi_error = 0.0;   // h1_error^2 + gamma_tilde * eta2
  double effectivity = 0.0;   // eta / h1_error
};

struct LinearAfemResult {
  std::vector<LinearAfemRecord> records;
  double gamma_tilde = 0.0;
  std::shared_ptr<const TetMesh> final_mesh;
  std::shared_ptr<FeSpace> final_space;
  Eigen::MatrixXd final_nodal;
};

/// Appendix-style adaptive loop: Solve -> Estimate -> Mark (Doerfler) ->
/// Refine, n_iters times or until eta = 0. gamma_tilde for the quasi-error
/// is 1/(2 C*^2) with C* the measured inverse-inequality constant of the
/// initial mesh.
LinearAfemResult afem_linear(std::shared_ptr<const TetMesh> mesh0, int degree,
                             const LinearProblem& problem, double theta, int n_iters,
                             Exec exec = Exec::Parallel);

/// Left side ||Phi_H - Phi_h||_1^2 over components, right side
/// sum_{tau in R} eta_H^2(tau); R is taken from `fine`'s parent bookkeeping.
struct LocalizedBoundCheck {
  double error_sq = 0.0;
  double marked_eta2 = 0.0;
};
LocalizedBoundCheck localized_bound_check(const FeSpace& coarse,
                                          const Eigen::MatrixXd& coarse_nodal,
                                          const FeSpace& fine,
                                          const Eigen::MatrixXd& fine_nodal,
                                          const LinearProblem& problem,
                                          Exec exec = Exec::Parallel);

/// Measured inverse-inequality constant: largest ||grad v|| / (h^-1 ||v||)
/// over the element polynomial spaces of the mesh.
double inverse_inequality_constant(const FeSpace& space);

/// H1 norm squared of (a - b) given as full nodal vectors on one space.
double h1_norm_sq(const FeSpace& space, const Eigen::VectorXd& nodal);

}  // namespace ksafem
