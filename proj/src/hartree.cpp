// SPDX-License-Identifier: Apache-2.0

#include "ksafem/hartree.hpp"

#include <cmath>

#include "ksafem/error.hpp"
#include "ksafem/linear_bvp.hpp"

namespace ksafem {

namespace {

constexpr int kDirectMaxElems = 5000;

// Two levels of octasection: 64 (centroid, volume) cells per tet.
struct SubCell {
  Vec3 centroid;
  double volume;
};

void octasect(const std::array<Vec3, 4>& t, int level, std::vector<SubCell>& out) {
  if (level == 0) {
    out.push_back({(t[0] + t[1] + t[2] + t[3]) * 0.25, tet_volume(t[0], t[1], t[2], t[3])});
    return;
  }
  const Vec3 m01 = midpoint(t[0], t[1]), m02 = midpoint(t[0], t[2]),
             m03 = midpoint(t[0], t[3]), m12 = midpoint(t[1], t[2]),
             m13 = midpoint(t[1], t[3]), m23 = midpoint(t[2], t[3]);
  const std::array<std::array<Vec3, 4>, 8> kids = {{
      {t[0], m01, m02, m03},
      {t[1], m01, m12, m13},
      {t[2], m02, m12, m23},
      {t[3], m03, m13, m23},
      {m01, m23, m02, m03},
      {m01, m23, m03, m13},
      {m01, m23, m13, m12},
      {m01, m23, m12, m02},
  }};
  for (const auto& k : kids) octasect(k, level - 1, out);
}

}  // namespace

HartreeField hartree_direct(const FeSpace& space, const DensityField& rho, Exec exec) {
  const TetMesh& mesh = space.mesh();
  if (mesh.n_tets() > kDirectMaxElems)
    throw InvalidInput("hartree_direct: oracle path refuses meshes above 5000 elements");

  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const int nq = static_cast<int>(q.points.size());

  // physical quadrature points and rho-weighted measures per element
  Eigen::MatrixXd px(mesh.n_tets(), nq), py(mesh.n_tets(), nq), pz(mesh.n_tets(), nq);
  Eigen::MatrixXd wrho(mesh.n_tets(), nq);
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const double jac = 6.0 * mesh.volume(t);
    for (int iq = 0; iq < nq; ++iq) {
      const Vec3 x = space.from_reference(t, q.points[iq]);
      px(t, iq) = x.x;
      py(t, iq) = x.y;
      pz(t, iq) = x.z;
      wrho(t, iq) = jac * q.weights[iq] * rho.quad(t, iq);
    }
  }

  // Subdivided cells with rho-weighted measures, shared by all targets;
  // used whenever the kernel is near-singular (the 64 cells resolve 1/r far
  // better than the smooth rule there, and the singular element itself gets
  // the distance floor).
  const Eigen::VectorXd rho_nodal = space.full_from_dofs(rho.coeffs);
  std::vector<std::vector<SubCell>> cells(mesh.n_tets());
  std::vector<Vec3> elem_center(mesh.n_tets());
  std::vector<double> elem_h(mesh.n_tets());
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    octasect(mesh.tet_points(t), 2, cells[ti]);
    for (auto& cell : cells[ti])
      cell.volume *= std::max(0.0, space.eval(t, rho_nodal, cell.centroid));
    const auto p = mesh.tet_points(t);
    elem_center[ti] = (p[0] + p[1] + p[2] + p[3]) * 0.25;
    elem_h[ti] = mesh.diameter(t);
  });

  HartreeField vh;
  vh.method = "direct";
  vh.node_values.resize(space.n_nodes());
  for_each_index(exec, space.n_nodes(), [&](std::int64_t nd) {
    const Vec3 x = space.node_point(static_cast<int>(nd));
    double v = 0.0;
    for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
      if (norm(x - elem_center[t]) > 1.75 * elem_h[t]) {
        for (int iq = 0; iq < nq; ++iq) {
          const double dx = px(t, iq) - x.x, dy = py(t, iq) - x.y, dz = pz(t, iq) - x.z;
          v += wrho(t, iq) / std::sqrt(dx * dx + dy * dy + dz * dz);
        }
      } else {
        const double floor_r = 1e-3 * elem_h[t];
        for (const auto& cell : cells[t])
          v += cell.volume / std::max(norm(cell.centroid - x), floor_r);
      }
    }
    vh.node_values(nd) = v;
  });
  return vh;
}

HartreeField hartree_poisson(const FeSpace& space, const DensityField& rho, Exec exec) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const int nq = static_cast<int>(q.points.size());

  // Moments of rho: total charge and dipole about the expansion center.
  double Q = 0.0;
  Vec3 first_moment{0.0, 0.0, 0.0};
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const double jac = 6.0 * mesh.volume(t);
    for (int iq = 0; iq < nq; ++iq) {
      const double w = jac * q.weights[iq] * rho.quad(t, iq);
      Q += w;
      first_moment += w * space.from_reference(t, q.points[iq]);
    }
  }
  const Vec3 center =
      std::abs(Q) > 1e-12 ? first_moment * (1.0 / Q) : mesh.domain_box.center();
  Vec3 dipole{0.0, 0.0, 0.0};
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const double jac = 6.0 * mesh.volume(t);
    for (int iq = 0; iq < nq; ++iq) {
      const double w = jac * q.weights[iq] * rho.quad(t, iq);
      dipole += w * (space.from_reference(t, q.points[iq]) - center);
    }
  }

  auto far_field = [Q, center, dipole](const Vec3& x, int) {
    const Vec3 r = x - center;
    const double rn = norm(r);
    return Q / rn + dot(dipole, r) / (rn * rn * rn);
  };

  // -Lap V = 4 pi rho in the half-gradient form: a(V, g) = (2 pi rho, g).
  std::vector<Eigen::MatrixXd> rhs = {2.0 * M_PI * rho.quad};
  LinearSolveResult sol = solve_linear_quad_rhs(space, rhs, far_field, exec);

  HartreeField vh;
  vh.method = "poisson";
  vh.node_values = sol.nodal.col(0);
  return vh;
}

double coulomb_energy(const FeSpace& space, const DensityField& rho,
                      const HartreeField& vh) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const Eigen::MatrixXd N = space.basis_values(q);
  const int npe = space.nodes_per_elem();
  double E = 0.0;
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const double jac = 6.0 * mesh.volume(t);
    const auto& en = space.element_nodes(t);
    Eigen::VectorXd vloc(npe);
    for (int a = 0; a < npe; ++a) vloc(a) = vh.node_values(en[a]);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq)
      E += jac * q.weights[iq] * rho.quad(t, iq) * N.row(iq).dot(vloc);
  }
  E *= 0.5;
  if (E < -1e-10) throw ContractViolation("coulomb_energy: negative Coulomb energy");
  return E;
}

double coulomb_pairing_direct(const FeSpace& space, const DensityField& f,
                              const DensityField& g, Exec exec) {
  const TetMesh& mesh = space.mesh();
  if (mesh.n_tets() > 1000)
    throw InvalidInput("coulomb_pairing_direct: oracle restricted to small meshes");
  const TetQuadrature& q = tet_quadrature(2);
  const int nq = static_cast<int>(q.points.size());

  const Eigen::VectorXd f_nodal = space.full_from_dofs(f.coeffs);
  const Eigen::VectorXd g_nodal = space.full_from_dofs(g.coeffs);
  const Eigen::MatrixXd N = space.basis_values(q);
  const int npe = space.nodes_per_elem();

  Eigen::MatrixXd px(mesh.n_tets(), nq), py(mesh.n_tets(), nq), pz(mesh.n_tets(), nq);
  Eigen::MatrixXd fw(mesh.n_tets(), nq), gw(mesh.n_tets(), nq);
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const double jac = 6.0 * mesh.volume(t);
    const auto& en = space.element_nodes(t);
    Eigen::VectorXd floc(npe), gloc(npe);
    for (int a = 0; a < npe; ++a) {
      floc(a) = f_nodal(en[a]);
      gloc(a) = g_nodal(en[a]);
    }
    for (int iq = 0; iq < nq; ++iq) {
      const Vec3 x = space.from_reference(t, q.points[iq]);
      px(t, iq) = x.x;
      py(t, iq) = x.y;
      pz(t, iq) = x.z;
      const double w = jac * q.weights[iq];
      fw(t, iq) = w * N.row(iq).dot(floc);
      gw(t, iq) = w * N.row(iq).dot(gloc);
    }
  }

  std::vector<double> per_elem(mesh.n_tets(), 0.0);
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ta) {
    double s = 0.0;
    for (std::int32_t tb = 0; tb < mesh.n_tets(); ++tb) {
      if (ta == static_cast<std::int64_t>(tb)) continue;
      for (int ia = 0; ia < nq; ++ia)
        for (int ib = 0; ib < nq; ++ib) {
          const double dx = px(ta, ia) - px(tb, ib);
          const double dy = py(ta, ia) - py(tb, ib);
          const double dz = pz(ta, ia) - pz(tb, ib);
          s += fw(ta, ia) * gw(tb, ib) / std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    }
    per_elem[ta] = s;
  });
  double D = 0.0;
  for (double s : per_elem) D += s;

  // diagonal blocks by the subdivided centroid rule, fully symmetric in x, y
  std::vector<double> diag_elem(mesh.n_tets(), 0.0);
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t t) {
    std::vector<SubCell> cells;
    octasect(mesh.tet_points(static_cast<std::int32_t>(t)), 1, cells);
    const double floor_r = 1e-3 * mesh.diameter(static_cast<std::int32_t>(t));
    double s = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = 0; j < cells.size(); ++j) {
        if (i == j) continue;
        const double r = std::max(norm(cells[i].centroid - cells[j].centroid), floor_r);
        const double fi = space.eval(static_cast<std::int32_t>(t), f_nodal, cells[i].centroid);
        const double gj = space.eval(static_cast<std::int32_t>(t), g_nodal, cells[j].centroid);
        s += cells[i].volume * cells[j].volume * fi * gj / r;
      }
    diag_elem[t] = s;
  });
  for (double s : diag_elem) D += s;
  return D;
}

}  // namespace ksafem
