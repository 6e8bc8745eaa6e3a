// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "ksafem/mesh.hpp"
#include "ksafem/quadrature.hpp"

namespace ksafem {

using ScalarField = std::function<double(const Vec3&)>;

/// Lagrange P1/P2 space on a TetMesh with zero Dirichlet boundary data.
///
/// Nodes are the mesh vertices (P1) plus edge midpoints (P2), numbered
/// vertices-first, then edges sorted by their endpoint pair; boundary nodes
/// are excluded from the DOF numbering, so coefficient vectors represent
/// functions in S_0^{h,k}. Full nodal vectors (boundary included) carry
/// fields with inhomogeneous boundary values, e.g. the Hartree potential.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const TetMesh> mesh, int degree);

  const TetMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TetMesh> mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int ndof() const { return ndof_; }
  int n_nodes() const { return static_cast<int>(node_xyz_.size()); }
  int nodes_per_elem() const { return degree_ == 1 ? 4 : 10; }

  const Vec3& node_point(int n) const { return node_xyz_[n]; }
  int node_dof(int n) const { return node_dof_[n]; }      // -1 on the boundary
  int dof_node(int d) const { return dof_node_[d]; }
  const std::vector<std::int32_t>& element_nodes(std::int32_t t) const {
    return elem_nodes_[t];
  }

  // Quadrature orders used throughout: 2k for the polynomial bilinear
  // forms, 2k+2 for density-weighted potentials.
  int quad_degree_matrix() const { return 2 * degree_; }
  int quad_degree_potential() const { return 2 * degree_ + 2; }

  /// Reference basis values at the points of `q`; row = point, col = node.
  Eigen::MatrixXd basis_values(const TetQuadrature& q) const;
  /// Reference basis gradients; [point](node, xyz).
  std::vector<Eigen::MatrixXd> basis_gradients(const TetQuadrature& q) const;
  /// Reference basis Hessians (constant for P1/P2): [node] 3x3.
  std::vector<Eigen::Matrix3d> basis_hessians() const;

  /// Values of the basis at arbitrary reference coordinates.
  Eigen::VectorXd basis_at(const Vec3& ref) const;
  Eigen::MatrixXd basis_grad_at(const Vec3& ref) const;  // (node, xyz)

  // Affine element map helpers.
  Eigen::Matrix3d jacobian(std::int32_t t) const;
  Vec3 to_reference(std::int32_t t, const Vec3& x) const;
  Vec3 from_reference(std::int32_t t, const Vec3& ref) const;

  /// Evaluate a full nodal vector at a physical point inside element t.
  double eval(std::int32_t t, const Eigen::VectorXd& nodal, const Vec3& x) const;
  Vec3 eval_grad(std::int32_t t, const Eigen::VectorXd& nodal, const Vec3& x) const;

  /// Scatter an interior-DOF vector to the full nodal vector (boundary 0).
  Eigen::VectorXd full_from_dofs(const Eigen::VectorXd& dofs) const;
  Eigen::VectorXd dofs_from_full(const Eigen::VectorXd& nodal) const;

 private:
  std::shared_ptr<const TetMesh> mesh_;
  int degree_;
  int ndof_;
  std::vector<Vec3> node_xyz_;
  std::vector<std::int32_t> node_dof_;
  std::vector<std::int32_t> dof_node_;
  std::vector<std::vector<std::int32_t>> elem_nodes_;
};

std::shared_ptr<FeSpace> make_space(std::shared_ptr<const TetMesh> mesh, int degree);

/// Nodal interpolant of f (interior DOFs).
Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& f);

/// Exact embedding of a coarse-space function into a space on the once
/// refined mesh. Throws InvalidInput when `fine` was not refined from
/// `coarse`'s mesh.
Eigen::VectorXd transfer(const FeSpace& coarse, const FeSpace& fine,
                         const Eigen::VectorXd& coeffs);

/// Weighted discrete L2 projection onto P^d on one tet: given samples of g
/// at the points of `q` mapped into tet t, returns the projected values at
/// the same points. d in {0, 1, 2}.
Eigen::VectorXd project_poly(const FeSpace& space, std::int32_t t,
                             const TetQuadrature& q, const Eigen::VectorXd& g_values,
                             int d);

}  // namespace ksafem
