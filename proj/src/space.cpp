// SPDX-License-Identifier: Apache-2.0

#include "ksafem/space.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "ksafem/error.hpp"

namespace ksafem {

namespace {

inline std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// local P2 edge order
constexpr int kEdgePairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

// Barycentric coordinates from reference coordinates.
inline void bary(const Vec3& r, double l[4]) {
  l[0] = 1.0 - r.x - r.y - r.z;
  l[1] = r.x;
  l[2] = r.y;
  l[3] = r.z;
}

// dl[a] = gradient of barycentric a in reference coordinates
constexpr double kBaryGrad[4][3] = {
    {-1.0, -1.0, -1.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};

}  // namespace

FeSpace::FeSpace(std::shared_ptr<const TetMesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree_ != 1 && degree_ != 2)
    throw InvalidInput("make_space: only degrees 1 and 2 are supported");
  const TetMesh& m = *mesh_;

  // Vertex nodes first.
  node_xyz_.assign(m.vertices.begin(), m.vertices.end());
  std::vector<char> node_boundary(m.n_vertices(), 0);
  for (const auto& bf : m.boundary_faces)
    for (std::int32_t v : bf.v) node_boundary[v] = 1;

  // Edge midpoint nodes (P2), ordered by sorted endpoint pair.
  std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> edge_node;
  if (degree_ == 2) {
    std::unordered_set<std::uint64_t> boundary_edges;
    for (const auto& bf : m.boundary_faces) {
      boundary_edges.insert(pair_key(bf.v[0], bf.v[1]));
      boundary_edges.insert(pair_key(bf.v[0], bf.v[2]));
      boundary_edges.insert(pair_key(bf.v[1], bf.v[2]));
    }
    std::map<std::pair<std::int32_t, std::int32_t>, char> edges;
    for (const auto& T : m.tets)
      for (const auto& e : kEdgePairs) {
        std::int32_t a = T.v[e[0]], b = T.v[e[1]];
        if (a > b) std::swap(a, b);
        edges[{a, b}] = 0;
      }
    for (auto& [key, flag] : edges) {
      const std::int32_t id = static_cast<std::int32_t>(node_xyz_.size());
      node_xyz_.push_back(midpoint(m.point(key.first), m.point(key.second)));
      edge_node[key] = id;
      flag = boundary_edges.count(pair_key(key.first, key.second)) ? 1 : 0;
      node_boundary.push_back(flag);
    }
  }

  node_dof_.assign(node_xyz_.size(), -1);
  for (std::size_t nd = 0; nd < node_xyz_.size(); ++nd)
    if (!node_boundary[nd]) {
      node_dof_[nd] = static_cast<std::int32_t>(dof_node_.size());
      dof_node_.push_back(static_cast<std::int32_t>(nd));
    }
  ndof_ = static_cast<int>(dof_node_.size());

  elem_nodes_.resize(m.n_tets());
  for (std::int32_t t = 0; t < m.n_tets(); ++t) {
    auto& en = elem_nodes_[t];
    en.assign(m.tets[t].v.begin(), m.tets[t].v.end());
    if (degree_ == 2)
      for (const auto& e : kEdgePairs) {
        std::int32_t a = m.tets[t].v[e[0]], b = m.tets[t].v[e[1]];
        if (a > b) std::swap(a, b);
        en.push_back(edge_node.at({a, b}));
      }
  }
}

Eigen::VectorXd FeSpace::basis_at(const Vec3& ref) const {
  double l[4];
  bary(ref, l);
  Eigen::VectorXd N(nodes_per_elem());
  if (degree_ == 1) {
    for (int a = 0; a < 4; ++a) N(a) = l[a];
  } else {
    for (int a = 0; a < 4; ++a) N(a) = l[a] * (2.0 * l[a] - 1.0);
    for (int e = 0; e < 6; ++e)
      N(4 + e) = 4.0 * l[kEdgePairs[e][0]] * l[kEdgePairs[e][1]];
  }
  return N;
}

Eigen::MatrixXd FeSpace::basis_grad_at(const Vec3& ref) const {
  double l[4];
  bary(ref, l);
  Eigen::MatrixXd G(nodes_per_elem(), 3);
  if (degree_ == 1) {
    for (int a = 0; a < 4; ++a)
      for (int d = 0; d < 3; ++d) G(a, d) = kBaryGrad[a][d];
  } else {
    for (int a = 0; a < 4; ++a)
      for (int d = 0; d < 3; ++d) G(a, d) = (4.0 * l[a] - 1.0) * kBaryGrad[a][d];
    for (int e = 0; e < 6; ++e) {
      const int p = kEdgePairs[e][0], q = kEdgePairs[e][1];
      for (int d = 0; d < 3; ++d)
        G(4 + e, d) = 4.0 * (l[p] * kBaryGrad[q][d] + l[q] * kBaryGrad[p][d]);
    }
  }
  return G;
}

Eigen::MatrixXd FeSpace::basis_values(const TetQuadrature& q) const {
  Eigen::MatrixXd V(q.points.size(), nodes_per_elem());
  for (std::size_t i = 0; i < q.points.size(); ++i) V.row(i) = basis_at(q.points[i]);
  return V;
}

std::vector<Eigen::MatrixXd> FeSpace::basis_gradients(const TetQuadrature& q) const {
  std::vector<Eigen::MatrixXd> G;
  G.reserve(q.points.size());
  for (const auto& p : q.points) G.push_back(basis_grad_at(p));
  return G;
}

std::vector<Eigen::Matrix3d> FeSpace::basis_hessians() const {
  std::vector<Eigen::Matrix3d> H(nodes_per_elem(), Eigen::Matrix3d::Zero());
  if (degree_ == 1) return H;
  for (int a = 0; a < 4; ++a)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        H[a](r, c) = 4.0 * kBaryGrad[a][r] * kBaryGrad[a][c];
  for (int e = 0; e < 6; ++e) {
    const int p = kEdgePairs[e][0], q = kEdgePairs[e][1];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        H[4 + e](r, c) =
            4.0 * (kBaryGrad[p][r] * kBaryGrad[q][c] + kBaryGrad[q][r] * kBaryGrad[p][c]);
  }
  return H;
}

Eigen::Matrix3d FeSpace::jacobian(std::int32_t t) const {
  auto p = mesh_->tet_points(t);
  Eigen::Matrix3d J;
  for (int c = 0; c < 3; ++c) {
    const Vec3 e = p[c + 1] - p[0];
    J(0, c) = e.x;
    J(1, c) = e.y;
    J(2, c) = e.z;
  }
  return J;
}

Vec3 FeSpace::to_reference(std::int32_t t, const Vec3& x) const {
  auto p = mesh_->tet_points(t);
  const Eigen::Matrix3d J = jacobian(t);
  Eigen::Vector3d rhs(x.x - p[0].x, x.y - p[0].y, x.z - p[0].z);
  Eigen::Vector3d r = J.partialPivLu().solve(rhs);
  return {r(0), r(1), r(2)};
}

Vec3 FeSpace::from_reference(std::int32_t t, const Vec3& ref) const {
  auto p = mesh_->tet_points(t);
  const Eigen::Matrix3d J = jacobian(t);
  Eigen::Vector3d x = J * Eigen::Vector3d(ref.x, ref.y, ref.z);
  return {p[0].x + x(0), p[0].y + x(1), p[0].z + x(2)};
}

double FeSpace::eval(std::int32_t t, const Eigen::VectorXd& nodal, const Vec3& x) const {
  const Eigen::VectorXd N = basis_at(to_reference(t, x));
  const auto& en = elem_nodes_[t];
  double s = 0.0;
  for (int a = 0; a < nodes_per_elem(); ++a) s += N(a) * nodal(en[a]);
  return s;
}

Vec3 FeSpace::eval_grad(std::int32_t t, const Eigen::VectorXd& nodal, const Vec3& x) const {
  const Eigen::MatrixXd Gref = basis_grad_at(to_reference(t, x));
  const Eigen::Matrix3d JinvT = jacobian(t).inverse().transpose();
  const auto& en = elem_nodes_[t];
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (int a = 0; a < nodes_per_elem(); ++a)
    g += nodal(en[a]) * (JinvT * Gref.row(a).transpose());
  return {g(0), g(1), g(2)};
}

Eigen::VectorXd FeSpace::full_from_dofs(const Eigen::VectorXd& dofs) const {
  if (dofs.size() != ndof_) throw InvalidInput("full_from_dofs: size mismatch");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n_nodes());
  for (int d = 0; d < ndof_; ++d) full(dof_node_[d]) = dofs(d);
  return full;
}

Eigen::VectorXd FeSpace::dofs_from_full(const Eigen::VectorXd& nodal) const {
  if (nodal.size() != n_nodes()) throw InvalidInput("dofs_from_full: size mismatch");
  Eigen::VectorXd d(ndof_);
  for (int i = 0; i < ndof_; ++i) d(i) = nodal(dof_node_[i]);
  return d;
}

std::shared_ptr<FeSpace> make_space(std::shared_ptr<const TetMesh> mesh, int degree) {
  return std::make_shared<FeSpace>(std::move(mesh), degree);
}

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& f) {
  Eigen::VectorXd c(space.ndof());
  for (int d = 0; d < space.ndof(); ++d) {
    const double v = f(space.node_point(space.dof_node(d)));
    if (!std::isfinite(v))
      throw NumericalFailure("interpolate: field not finite at a node");
    c(d) = v;
  }
  return c;
}

Eigen::VectorXd transfer(const FeSpace& coarse, const FeSpace& fine,
                         const Eigen::VectorXd& coeffs) {
  if (fine.mesh().parent_mesh_id != coarse.mesh().mesh_id)
    throw InvalidInput("transfer: fine mesh is not a refinement of the coarse mesh");
  if (coeffs.size() != coarse.ndof()) throw InvalidInput("transfer: size mismatch");
  if (fine.degree() != coarse.degree())
    throw InvalidInput("transfer: spaces must share the polynomial degree");

  const Eigen::VectorXd coarse_nodal = coarse.full_from_dofs(coeffs);

  // Visit fine elements; each knows its coarse ancestor, and every fine
  // node lies in the closure of that ancestor.
  Eigen::VectorXd fine_nodal = Eigen::VectorXd::Zero(fine.n_nodes());
  std::vector<char> seen(fine.n_nodes(), 0);
  const TetMesh& fm = fine.mesh();
  for (std::int32_t t = 0; t < fm.n_tets(); ++t) {
    const std::int32_t ct = fm.parent_tet[t];
    for (std::int32_t nd : fine.element_nodes(t)) {
      if (seen[nd]) continue;
      seen[nd] = 1;
      fine_nodal(nd) = coarse.eval(ct, coarse_nodal, fine.node_point(nd));
    }
  }
  return fine.dofs_from_full(fine_nodal);
}

Eigen::VectorXd project_poly(const FeSpace& space, std::int32_t t,
                             const TetQuadrature& q, const Eigen::VectorXd& g_values,
                             int d) {
  if (d < 0 || d > 2) throw InvalidInput("project_poly: degree out of range");
  const int nq = static_cast<int>(q.points.size());
  if (g_values.size() != nq) throw InvalidInput("project_poly: value count mismatch");

  // Monomials centered at the element centroid, scaled by h for conditioning.
  auto p = space.mesh().tet_points(t);
  const Vec3 c = (p[0] + p[1] + p[2] + p[3]) * 0.25;
  const double h = space.mesh().diameter(t);
  std::vector<std::array<int, 3>> expo = {{0, 0, 0}};
  if (d >= 1) {
    expo.push_back({1, 0, 0});
    expo.push_back({0, 1, 0});
    expo.push_back({0, 0, 1});
  }
  if (d >= 2) {
    expo.push_back({2, 0, 0});
    expo.push_back({0, 2, 0});
    expo.push_back({0, 0, 2});
    expo.push_back({1, 1, 0});
    expo.push_back({1, 0, 1});
    expo.push_back({0, 1, 1});
  }
  const int nb = static_cast<int>(expo.size());

  Eigen::MatrixXd P(nq, nb);
  for (int i = 0; i < nq; ++i) {
    const Vec3 x = space.from_reference(t, q.points[i]);
    const Vec3 u = (x - c) * (1.0 / h);
    for (int j = 0; j < nb; ++j)
      P(i, j) = std::pow(u.x, expo[j][0]) * std::pow(u.y, expo[j][1]) *
                std::pow(u.z, expo[j][2]);
  }
  Eigen::VectorXd w(nq);
  for (int i = 0; i < nq; ++i) w(i) = q.weights[i];

  const Eigen::MatrixXd Pw = w.asDiagonal() * P;
  const Eigen::MatrixXd G = P.transpose() * Pw;
  const Eigen::VectorXd rhs = Pw.transpose() * g_values;
  const Eigen::VectorXd coef = G.ldlt().solve(rhs);
  return P * coef;
}

}  // namespace ksafem
