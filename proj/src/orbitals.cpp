// SPDX-License-Identifier: Apache-2.0

#include "ksafem/orbitals.hpp"

#include <cmath>

#include "ksafem/error.hpp"
#include "ksafem/parallel.hpp"

namespace ksafem {

OrbitalSet OrbitalSet::transformed(const Eigen::MatrixXd& U) const {
  const int n = n_orbitals();
  if (U.rows() != n || U.cols() != n)
    throw InvalidInput("OrbitalSet::transformed: U has the wrong shape");
  if ((U.transpose() * U - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInput("OrbitalSet::transformed: U is not orthogonal");
  OrbitalSet out;
  out.space = space;
  out.C = C * U;
  out.mu = mu;
  out.Lambda = U.transpose() * Lambda * U;
  out.rho = rho;
  return out;
}

DensityField density(const FeSpace& space, const Eigen::MatrixXd& C) {
  const int n_orb = static_cast<int>(C.cols());
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const Eigen::MatrixXd N = space.basis_values(q);
  const int npe = space.nodes_per_elem();
  const int nq = static_cast<int>(q.points.size());

  Eigen::MatrixXd full(space.n_nodes(), n_orb);
  for (int i = 0; i < n_orb; ++i) full.col(i) = space.full_from_dofs(C.col(i));

  DensityField rho;
  rho.quad.resize(mesh.n_tets(), nq);
  for_each_index(Exec::Parallel, mesh.n_tets(), [&](std::int64_t t) {
    const auto& en = space.element_nodes(static_cast<std::int32_t>(t));
    Eigen::MatrixXd local(npe, n_orb);
    for (int a = 0; a < npe; ++a) local.row(a) = full.row(en[a]);
    for (int iq = 0; iq < nq; ++iq) {
      double s = 0.0;
      for (int i = 0; i < n_orb; ++i) {
        const double phi = N.row(iq).dot(local.col(i));
        s += phi * phi;
      }
      rho.quad(t, iq) = s;
    }
  });

  // Nodal interpolant: Lagrange coefficients are point values, so the node
  // values of sum phi^2 are the squared rows of `full` -- nonnegative.
  const Eigen::VectorXd nodal = full.array().square().rowwise().sum();
  rho.coeffs = space.dofs_from_full(nodal);
  return rho;
}

DensityField density_from_coeffs(const FeSpace& space, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != space.ndof())
    throw InvalidInput("density_from_coeffs: size mismatch");
  DensityField rho;
  rho.coeffs = coeffs;
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const Eigen::MatrixXd N = space.basis_values(q);
  const Eigen::VectorXd full = space.full_from_dofs(coeffs);
  const int npe = space.nodes_per_elem();
  const int nq = static_cast<int>(q.points.size());
  rho.quad.resize(mesh.n_tets(), nq);
  for_each_index(Exec::Parallel, mesh.n_tets(), [&](std::int64_t t) {
    const auto& en = space.element_nodes(static_cast<std::int32_t>(t));
    Eigen::VectorXd local(npe);
    for (int a = 0; a < npe; ++a) local(a) = full(en[a]);
    for (int iq = 0; iq < nq; ++iq)
      rho.quad(t, iq) = std::max(0.0, N.row(iq).dot(local));
  });
  return rho;
}

double density_l2(const FeSpace& space, const Eigen::MatrixXd& quad_values) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  double s = 0.0;
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const double jac = 6.0 * mesh.volume(t);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq)
      s += jac * q.weights[iq] * quad_values(t, iq) * quad_values(t, iq);
  }
  return std::sqrt(s);
}

}  // namespace ksafem
