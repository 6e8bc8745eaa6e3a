// SPDX-License-Identifier: Apache-2.0

#include "ksafem/estimator.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "ksafem/error.hpp"

namespace ksafem {

double IndicatorField::total_eta2() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta2.size(); ++i) s += eta2(i);
  return s;
}

double IndicatorField::total_osc2() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < osc2.size(); ++i) s += osc2(i);
  return s;
}

namespace {

// Residual values of every component at the quadrature points of one
// element: (n_q x n_comp).
using ResidualKernel =
    std::function<Eigen::MatrixXd(std::int32_t t, const TetQuadrature& q)>;

// eta^2 and osc^2 from a strong-residual kernel plus the gradient-jump
// terms of the nodal fields (n_nodes x n_comp).
IndicatorField residual_indicators(const FeSpace& space, const Eigen::MatrixXd& nodal,
                                   const ResidualKernel& kernel, Exec exec) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const int nq = static_cast<int>(q.points.size());
  const int ncomp = static_cast<int>(nodal.cols());
  const int k = space.degree();

  IndicatorField out;
  out.eta2 = Eigen::VectorXd::Zero(mesh.n_tets());
  out.osc2 = Eigen::VectorXd::Zero(mesh.n_tets());
  out.face_jump2 = Eigen::VectorXd::Zero(mesh.interior_faces.size());

  // element residual terms, h^2 ||R||^2 and h^2 ||R - Rbar||^2
  std::vector<double> r2(mesh.n_tets(), 0.0), o2(mesh.n_tets(), 0.0);
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const double jac = 6.0 * mesh.volume(t);
    const double h2 = mesh.diameter(t) * mesh.diameter(t);
    const Eigen::MatrixXd R = kernel(t, q);
    double nr = 0.0, no = 0.0;
    for (int c = 0; c < ncomp; ++c) {
      const Eigen::VectorXd proj = project_poly(space, t, q, R.col(c), k - 1);
      for (int iq = 0; iq < nq; ++iq) {
        const double w = jac * q.weights[iq];
        nr += w * R(iq, c) * R(iq, c);
        const double d = R(iq, c) - proj(iq);
        no += w * d * d;
      }
    }
    r2[ti] = h2 * nr;
    o2[ti] = h2 * no;
  });

  // face jumps, h_e || 1/2 grad phi|1 . n1 + 1/2 grad phi|2 . n2 ||^2
  const TriQuadrature& fq = tri_quadrature(2 * k);
  const int nf = static_cast<int>(mesh.interior_faces.size());
  const int npe = space.nodes_per_elem();
  std::vector<double> j2(nf, 0.0);
  for_each_index(exec, nf, [&](std::int64_t fi) {
    const auto& face = mesh.interior_faces[fi];
    const Vec3& p0 = mesh.point(face.v[0]);
    const Vec3& p1 = mesh.point(face.v[1]);
    const Vec3& p2 = mesh.point(face.v[2]);
    const double area2 = 2.0 * triangle_area(p0, p1, p2);
    double h_e = norm(p1 - p0);
    h_e = std::max(h_e, norm(p2 - p0));
    h_e = std::max(h_e, norm(p2 - p1));
    const Vec3 n1 = mesh.outward_normal(face.a, face.la);
    const Vec3 n2 = mesh.outward_normal(face.b, face.lb);

    const auto& en_a = space.element_nodes(face.a);
    const auto& en_b = space.element_nodes(face.b);
    const Eigen::Matrix3d Jinv_a = space.jacobian(face.a).inverse();
    const Eigen::Matrix3d Jinv_b = space.jacobian(face.b).inverse();

    double s = 0.0;
    for (std::size_t iq = 0; iq < fq.points.size(); ++iq) {
      const double u = fq.points[iq][0], v = fq.points[iq][1];
      const Vec3 x = p0 + u * (p1 - p0) + v * (p2 - p0);
      const Eigen::MatrixXd Ga = space.basis_grad_at(space.to_reference(face.a, x)) * Jinv_a;
      const Eigen::MatrixXd Gb = space.basis_grad_at(space.to_reference(face.b, x)) * Jinv_b;
      const double w = fq.weights[iq] * area2;
      for (int c = 0; c < ncomp; ++c) {
        Eigen::RowVector3d ga = Eigen::RowVector3d::Zero();
        Eigen::RowVector3d gb = Eigen::RowVector3d::Zero();
        for (int a = 0; a < npe; ++a) {
          ga += nodal(en_a[a], c) * Ga.row(a);
          gb += nodal(en_b[a], c) * Gb.row(a);
        }
        const double jump = 0.5 * (ga(0) * n1.x + ga(1) * n1.y + ga(2) * n1.z) +
                            0.5 * (gb(0) * n2.x + gb(1) * n2.y + gb(2) * n2.z);
        s += w * jump * jump;
      }
    }
    j2[fi] = h_e * s;
  });

  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    out.eta2(t) = r2[t];
    out.osc2(t) = o2[t];
  }
  for (int f = 0; f < nf; ++f) {
    out.face_jump2(f) = j2[f];
    out.eta2(mesh.interior_faces[f].a) += j2[f];
    out.eta2(mesh.interior_faces[f].b) += j2[f];
  }
  return out;
}

// Strong Kohn-Sham residual of all orbitals at the quadrature points of one
// element; Lambda may be dense.
struct KsResidualData {
  const FeSpace& space;
  const KohnShamModel& model;
  const OrbitalSet& phi;
  const HamiltonianParts& parts;
  Eigen::MatrixXd nodal;       // n_nodes x N
  Eigen::MatrixXd proj_inner;  // n_proj x N : (phi_i, zeta_j)
  Eigen::MatrixXd N_basis;     // n_q x npe
  std::vector<Eigen::MatrixXd> G_basis;
  std::vector<Eigen::Matrix3d> H_basis;

  KsResidualData(const FeSpace& s, const KohnShamModel& m, const OrbitalSet& p,
                 const HamiltonianParts& parts_)
      : space(s), model(m), phi(p), parts(parts_) {
    const int n_orb = phi.n_orbitals();
    nodal.resize(space.n_nodes(), n_orb);
    for (int i = 0; i < n_orb; ++i) nodal.col(i) = space.full_from_dofs(phi.C.col(i));
    if (model.n_projectors() > 0) proj_inner = parts.proj.transpose() * phi.C;
    const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
    N_basis = space.basis_values(q);
    G_basis = space.basis_gradients(q);
    H_basis = space.basis_hessians();
  }

  Eigen::MatrixXd operator()(std::int32_t t, const TetQuadrature& q) const {
    const int n_orb = phi.n_orbitals();
    const int nq = static_cast<int>(q.points.size());
    const int npe = space.nodes_per_elem();
    const auto& en = space.element_nodes(t);
    Eigen::MatrixXd local(npe, n_orb);
    for (int a = 0; a < npe; ++a) local.row(a) = nodal.row(en[a]);

    // elementwise strong Laplacian, constant for P1/P2
    const Eigen::Matrix3d Jinv = space.jacobian(t).inverse();
    Eigen::VectorXd lap = Eigen::VectorXd::Zero(n_orb);
    if (space.degree() == 2) {
      for (int a = 0; a < npe; ++a) {
        const double tr = (Jinv.transpose() * H_basis[a] * Jinv).trace();
        for (int i = 0; i < n_orb; ++i) lap(i) += local(a, i) * tr;
      }
    }

    Eigen::VectorXd vh_local;
    if (parts.hartree) {
      vh_local.resize(npe);
      for (int a = 0; a < npe; ++a) vh_local(a) = parts.hartree->node_values[en[a]];
    }

    Eigen::MatrixXd R(nq, n_orb);
    for (int iq = 0; iq < nq; ++iq) {
      const Vec3 x = space.from_reference(t, q.points[iq]);
      double vloc = eval_vloc(model, x);
      if (parts.hartree) vloc += N_basis.row(iq).dot(vh_local);
      if (model.xc.enabled()) {
        const double r = phi.rho.quad(t, iq);
        vloc += r <= kRhoFloor ? 0.0 : model.xc.e1(std::max(r, 0.0));
      }
      Eigen::VectorXd phi_vals(n_orb);
      for (int i = 0; i < n_orb; ++i) phi_vals(i) = N_basis.row(iq).dot(local.col(i));
      for (int i = 0; i < n_orb; ++i) {
        double r = -0.5 * lap(i) + vloc * phi_vals(i);
        for (int j = 0; j < model.n_projectors(); ++j)
          r += proj_inner(j, i) * model.projector_value(j, x);
        for (int j = 0; j < n_orb; ++j) r -= phi.Lambda(i, j) * phi_vals(j);
        R(iq, i) = r;
      }
    }
    return R;
  }
};

}  // namespace

IndicatorField ks_indicators(const FeSpace& space, const KohnShamModel& model,
                             const OrbitalSet& phi, const HamiltonianParts* parts,
                             const AssemblyOptions& opts) {
  HamiltonianParts local_parts;
  if (!parts) {
    local_parts = assemble_parts(space, model, phi.rho, opts);
    parts = &local_parts;
  }
  KsResidualData data(space, model, phi, *parts);
  return residual_indicators(
      space, data.nodal,
      [&](std::int32_t t, const TetQuadrature& q) { return data(t, q); }, opts.exec);
}

IndicatorField linear_indicators(const FeSpace& space, const LinearProblem& problem,
                                 const Eigen::MatrixXd& nodal, Exec exec) {
  const int ncomp = problem.n_components;
  if (nodal.cols() != ncomp || nodal.rows() != space.n_nodes())
    throw InvalidInput("linear_indicators: nodal shape mismatch");
  const auto H_basis = space.basis_hessians();
  const int npe = space.nodes_per_elem();

  auto kernel = [&](std::int32_t t, const TetQuadrature& q) {
    const int nq = static_cast<int>(q.points.size());
    const auto& en = space.element_nodes(t);
    const Eigen::Matrix3d Jinv = space.jacobian(t).inverse();
    Eigen::VectorXd lap = Eigen::VectorXd::Zero(ncomp);
    if (space.degree() == 2)
      for (int a = 0; a < npe; ++a) {
        const double tr = (Jinv.transpose() * H_basis[a] * Jinv).trace();
        for (int c = 0; c < ncomp; ++c) lap(c) += nodal(en[a], c) * tr;
      }
    Eigen::MatrixXd R(nq, ncomp);
    for (int iq = 0; iq < nq; ++iq) {
      const Vec3 x = space.from_reference(t, q.points[iq]);
      for (int c = 0; c < ncomp; ++c) R(iq, c) = problem.f[c](x) + 0.5 * lap(c);
    }
    return R;
  };
  return residual_indicators(space, nodal, kernel, exec);
}

namespace {

// Pointwise strong residual of orbital i at a physical point x inside the
// coarse element t, with the density evaluated from the orbitals.
struct PointwiseResidual {
  const FeSpace& space;
  const KohnShamModel& model;
  const OrbitalSet& phi;
  const HamiltonianParts& parts;
  Eigen::MatrixXd nodal;
  Eigen::MatrixXd proj_inner;
  Eigen::VectorXd vh_nodal;
  std::vector<Eigen::Matrix3d> H_basis;

  PointwiseResidual(const FeSpace& s, const KohnShamModel& m, const OrbitalSet& p,
                    const HamiltonianParts& parts_)
      : space(s), model(m), phi(p), parts(parts_) {
    const int n_orb = phi.n_orbitals();
    nodal.resize(space.n_nodes(), n_orb);
    for (int i = 0; i < n_orb; ++i) nodal.col(i) = space.full_from_dofs(phi.C.col(i));
    if (model.n_projectors() > 0) proj_inner = parts.proj.transpose() * phi.C;
    if (parts.hartree) vh_nodal = parts.hartree->node_values;
    H_basis = space.basis_hessians();
  }

  // residual values of all orbitals at x (in coarse element t)
  Eigen::VectorXd at(std::int32_t t, const Vec3& x) const {
    const int n_orb = phi.n_orbitals();
    const int npe = space.nodes_per_elem();
    const auto& en = space.element_nodes(t);
    const Vec3 ref = space.to_reference(t, x);
    const Eigen::VectorXd N = space.basis_at(ref);
    const Eigen::Matrix3d Jinv = space.jacobian(t).inverse();

    Eigen::VectorXd phi_vals = Eigen::VectorXd::Zero(n_orb);
    Eigen::VectorXd lap = Eigen::VectorXd::Zero(n_orb);
    for (int a = 0; a < npe; ++a) {
      const double tr = space.degree() == 2
                            ? (Jinv.transpose() * H_basis[a] * Jinv).trace()
                            : 0.0;
      for (int i = 0; i < n_orb; ++i) {
        phi_vals(i) += N(a) * nodal(en[a], i);
        lap(i) += nodal(en[a], i) * tr;
      }
    }
    double vloc = eval_vloc(model, x);
    if (parts.hartree) {
      double vh = 0.0;
      for (int a = 0; a < npe; ++a) vh += N(a) * vh_nodal(en[a]);
      vloc += vh;
    }
    if (model.xc.enabled()) {
      const double r = phi_vals.squaredNorm();
      vloc += r <= kRhoFloor ? 0.0 : model.xc.e1(r);
    }
    Eigen::VectorXd R(n_orb);
    for (int i = 0; i < n_orb; ++i) {
      double r = -0.5 * lap(i) + vloc * phi_vals(i);
      for (int j = 0; j < model.n_projectors(); ++j)
        r += proj_inner(j, i) * model.projector_value(j, x);
      for (int j = 0; j < n_orb; ++j) r -= phi.Lambda(i, j) * phi_vals(j);
      R(i) = r;
    }
    return R;
  }

  Vec3 grad_at(std::int32_t t, const Vec3& x, int orbital) const {
    return space.eval_grad(t, nodal.col(orbital), x);
  }
};

void check_gamma_space(const FeSpace& space, const FeSpace& gamma_space,
                       const Eigen::MatrixXd& gamma, int n_orb) {
  if (gamma_space.mesh().parent_mesh_id != space.mesh().mesh_id)
    throw InvalidInput("residual_functional: gamma space must refine the orbital mesh");
  if (gamma.rows() != gamma_space.ndof() || gamma.cols() != n_orb)
    throw InvalidInput("residual_functional: gamma shape mismatch");
}

}  // namespace

double residual_functional(const FeSpace& space, const KohnShamModel& model,
                           const OrbitalSet& phi, const FeSpace& gamma_space,
                           const Eigen::MatrixXd& gamma, const HamiltonianParts* parts,
                           const AssemblyOptions& opts) {
  const int n_orb = phi.n_orbitals();
  check_gamma_space(space, gamma_space, gamma, n_orb);
  HamiltonianParts local_parts;
  if (!parts) {
    local_parts = assemble_parts(space, model, phi.rho, opts);
    parts = &local_parts;
  }
  const PointwiseResidual data(space, model, phi, *parts);
  const TetMesh& fine = gamma_space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());

  Eigen::MatrixXd gamma_nodal(gamma_space.n_nodes(), n_orb);
  for (int i = 0; i < n_orb; ++i)
    gamma_nodal.col(i) = gamma_space.full_from_dofs(gamma.col(i));
  const Eigen::MatrixXd Nf = gamma_space.basis_values(q);
  const int npe_f = gamma_space.nodes_per_elem();

  // element terms, integrated over the fine elements
  std::vector<double> elem(fine.n_tets(), 0.0);
  for_each_index(opts.exec, fine.n_tets(), [&](std::int64_t ti) {
    const auto tf = static_cast<std::int32_t>(ti);
    const std::int32_t tc = fine.parent_tet[tf];
    const double jac = 6.0 * fine.volume(tf);
    const auto& en = gamma_space.element_nodes(tf);
    double s = 0.0;
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const Vec3 x = gamma_space.from_reference(tf, q.points[iq]);
      const Eigen::VectorXd R = data.at(tc, x);
      for (int i = 0; i < n_orb; ++i) {
        double g = 0.0;
        for (int a = 0; a < npe_f; ++a) g += Nf(iq, a) * gamma_nodal(en[a], i);
        s += jac * q.weights[iq] * R(i) * g;
      }
    }
    elem[ti] = s;
  });
  double total = 0.0;
  for (double s : elem) total += s;

  // jump terms: fine interior faces whose neighbours have distinct coarse
  // parents tile the coarse interior faces exactly
  const TriQuadrature& fq = tri_quadrature(2 * space.degree() + 2);
  const int nf = static_cast<int>(fine.interior_faces.size());
  std::vector<double> face(nf, 0.0);
  for_each_index(opts.exec, nf, [&](std::int64_t fi) {
    const auto& f = fine.interior_faces[fi];
    const std::int32_t ca = fine.parent_tet[f.a];
    const std::int32_t cb = fine.parent_tet[f.b];
    if (ca == cb) return;
    const Vec3& p0 = fine.point(f.v[0]);
    const Vec3& p1 = fine.point(f.v[1]);
    const Vec3& p2 = fine.point(f.v[2]);
    const double area2 = 2.0 * triangle_area(p0, p1, p2);
    const Vec3 n1 = fine.outward_normal(f.a, f.la);
    const Vec3 n2 = fine.outward_normal(f.b, f.lb);
    const auto& en = gamma_space.element_nodes(f.a);
    double s = 0.0;
    for (std::size_t iq = 0; iq < fq.points.size(); ++iq) {
      const double u = fq.points[iq][0], v = fq.points[iq][1];
      const Vec3 x = p0 + u * (p1 - p0) + v * (p2 - p0);
      const Eigen::VectorXd Ng = gamma_space.basis_at(gamma_space.to_reference(f.a, x));
      const double w = fq.weights[iq] * area2;
      for (int i = 0; i < n_orb; ++i) {
        const Vec3 ga = data.grad_at(ca, x, i);
        const Vec3 gb = data.grad_at(cb, x, i);
        const double jump = 0.5 * dot(ga, n1) + 0.5 * dot(gb, n2);
        double g = 0.0;
        for (int a = 0; a < gamma_space.nodes_per_elem(); ++a)
          g += Ng(a) * gamma_nodal(en[a], i);
        s += w * jump * g;
      }
    }
    face[fi] = s;
  });
  for (double s : face) total += s;
  return total;
}

double weak_residual(const FeSpace& space, const KohnShamModel& model,
                     const OrbitalSet& phi, const FeSpace& gamma_space,
                     const Eigen::MatrixXd& gamma, const HamiltonianParts* parts,
                     const AssemblyOptions& opts) {
  const int n_orb = phi.n_orbitals();
  check_gamma_space(space, gamma_space, gamma, n_orb);
  HamiltonianParts local_parts;
  if (!parts) {
    local_parts = assemble_parts(space, model, phi.rho, opts);
    parts = &local_parts;
  }
  const PointwiseResidual data(space, model, phi, *parts);
  const TetMesh& fine = gamma_space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());

  Eigen::MatrixXd gamma_nodal(gamma_space.n_nodes(), n_orb);
  for (int i = 0; i < n_orb; ++i)
    gamma_nodal.col(i) = gamma_space.full_from_dofs(gamma.col(i));
  const Eigen::MatrixXd Nf = gamma_space.basis_values(q);
  const auto Gf = gamma_space.basis_gradients(q);
  const int npe_f = gamma_space.nodes_per_elem();

  std::vector<double> elem(fine.n_tets(), 0.0);
  for_each_index(opts.exec, fine.n_tets(), [&](std::int64_t ti) {
    const auto tf = static_cast<std::int32_t>(ti);
    const std::int32_t tc = fine.parent_tet[tf];
    const double jac = 6.0 * fine.volume(tf);
    const Eigen::Matrix3d Jinv_f = gamma_space.jacobian(tf).inverse();
    const auto& en = gamma_space.element_nodes(tf);
    double s = 0.0;
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const Vec3 x = gamma_space.from_reference(tf, q.points[iq]);
      const Eigen::MatrixXd Gphys = Gf[iq] * Jinv_f;
      const double w = jac * q.weights[iq];

      // potential and multiplier terms via the zero-order residual pieces:
      // R + 1/2 lap phi gives exactly (V phi + V_nl phi - lambda phi)(x)
      const Eigen::VectorXd R = data.at(tc, x);
      Eigen::VectorXd lap(n_orb);
      {
        const Eigen::Matrix3d Jinv_c = space.jacobian(tc).inverse();
        const auto H_basis = space.basis_hessians();
        const auto& en_c = space.element_nodes(tc);
        for (int i = 0; i < n_orb; ++i) {
          double l = 0.0;
          if (space.degree() == 2)
            for (int a = 0; a < space.nodes_per_elem(); ++a)
              l += data.nodal(en_c[a], i) *
                   (Jinv_c.transpose() * H_basis[a] * Jinv_c).trace();
          lap(i) = l;
        }
      }
      for (int i = 0; i < n_orb; ++i) {
        double g = 0.0;
        Eigen::RowVector3d gg = Eigen::RowVector3d::Zero();
        for (int a = 0; a < npe_f; ++a) {
          g += Nf(iq, a) * gamma_nodal(en[a], i);
          gg += gamma_nodal(en[a], i) * Gphys.row(a);
        }
        const Vec3 gphi = data.grad_at(tc, x, i);
        const double zero_order = R(i) + 0.5 * lap(i);
        s += w * (0.5 * (gphi.x * gg(0) + gphi.y * gg(1) + gphi.z * gg(2)) +
                  zero_order * g);
      }
    }
    elem[ti] = s;
  });
  double total = 0.0;
  for (double s : elem) total += s;
  return total;
}

std::pair<double, double> estimator_transform_bound(const FeSpace& space,
                                                    const KohnShamModel& model,
                                                    const OrbitalSet& phi,
                                                    const Eigen::MatrixXd& U,
                                                    const AssemblyOptions& opts) {
  const int n = phi.n_orbitals();
  if (U.rows() != n || U.cols() != n ||
      (U.transpose() * U - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInput("estimator_transform_bound: U is not orthogonal");
  const HamiltonianParts parts = assemble_parts(space, model, phi.rho, opts);
  const OrbitalSet rotated = phi.transformed(U);
  const double eta2_rot = ks_indicators(space, model, rotated, &parts, opts).total_eta2();
  const double eta2_ref = ks_indicators(space, model, phi, &parts, opts).total_eta2();
  return {eta2_rot, eta2_ref};
}

}  // namespace ksafem
