// SPDX-License-Identifier: Apache-2.0

#include "ksafem/assembly.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ksafem/error.hpp"

namespace ksafem {

double SparseSym::symmetry_defect() const {
  Eigen::SparseMatrix<double, Eigen::RowMajor> diff = mat;
  Eigen::SparseMatrix<double, Eigen::RowMajor> mt = mat.transpose();
  diff -= mt;
  double scale = 0.0;
  for (int k = 0; k < mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat, k); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  double defect = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(diff, k); it; ++it)
      defect = std::max(defect, std::abs(it.value()));
  return scale > 0.0 ? defect / scale : 0.0;
}

Eigen::VectorXd HamiltonianParts::apply_h(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = kinetic.mat * x;
  if (potential.mat.nonZeros() > 0) y.noalias() += potential.mat * x;
  if (proj.cols() > 0) y.noalias() += proj * (proj.transpose() * x);
  return y;
}

Eigen::MatrixXd HamiltonianParts::apply_h(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd y = kinetic.mat * x;
  if (potential.mat.nonZeros() > 0) y.noalias() += potential.mat * x;
  if (proj.cols() > 0) y.noalias() += proj * (proj.transpose() * x);
  return y;
}

namespace {

// Element kernel -> per-element local matrices -> serial scatter in
// element-index order. The parallel map writes disjoint slots, so the
// result is bitwise identical to the serial reference.
SparseSym scatter_local(const FeSpace& space, const std::vector<Eigen::MatrixXd>& local) {
  const TetMesh& mesh = space.mesh();
  const int npe = space.nodes_per_elem();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_tets()) * npe * npe);
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const auto& en = space.element_nodes(t);
    for (int a = 0; a < npe; ++a) {
      const int ra = space.node_dof(en[a]);
      if (ra < 0) continue;
      for (int b = 0; b < npe; ++b) {
        const int rb = space.node_dof(en[b]);
        if (rb < 0) continue;
        trip.emplace_back(ra, rb, local[t](a, b));
      }
    }
  }
  SparseSym out;
  out.mat.resize(space.ndof(), space.ndof());
  out.mat.setFromTriplets(trip.begin(), trip.end());
  out.mat.makeCompressed();
  return out;
}

}  // namespace

SparseSym assemble_kinetic(const FeSpace& space, Exec exec) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_matrix());
  const auto Gref = space.basis_gradients(q);
  const int npe = space.nodes_per_elem();
  std::vector<Eigen::MatrixXd> local(mesh.n_tets());
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const Eigen::Matrix3d JinvT = space.jacobian(t).inverse().transpose();
    const double jac = 6.0 * mesh.volume(t);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(npe, npe);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const Eigen::MatrixXd G = Gref[iq] * JinvT.transpose();  // (npe,3) physical
      K.noalias() += (0.5 * q.weights[iq] * jac) * (G * G.transpose());
    }
    local[ti] = K;
  });
  return scatter_local(space, local);
}

SparseSym assemble_mass(const FeSpace& space, Exec exec) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_matrix());
  const Eigen::MatrixXd N = space.basis_values(q);
  const int npe = space.nodes_per_elem();
  std::vector<Eigen::MatrixXd> local(mesh.n_tets());
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const double jac = 6.0 * mesh.volume(t);
    Eigen::MatrixXd Mloc = Eigen::MatrixXd::Zero(npe, npe);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq)
      Mloc.noalias() += (q.weights[iq] * jac) * (N.row(iq).transpose() * N.row(iq));
    local[ti] = Mloc;
  });
  return scatter_local(space, local);
}

SparseSym assemble_potential(const FeSpace& space, const Eigen::MatrixXd& v_quad,
                             Exec exec) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  if (v_quad.rows() != mesh.n_tets() ||
      v_quad.cols() != static_cast<Eigen::Index>(q.points.size()))
    throw InvalidInput("assemble_potential: value grid does not match the rule");
  const Eigen::MatrixXd N = space.basis_values(q);
  const int npe = space.nodes_per_elem();
  std::vector<Eigen::MatrixXd> local(mesh.n_tets());
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const double jac = 6.0 * mesh.volume(t);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(npe, npe);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq)
      B.noalias() += (q.weights[iq] * jac * v_quad(t, iq)) *
                     (N.row(iq).transpose() * N.row(iq));
    local[ti] = B;
  });
  return scatter_local(space, local);
}

Eigen::MatrixXd potential_quad_values(const FeSpace& space, const KohnShamModel& model,
                                      const DensityField& rho,
                                      const HartreeField* hartree, Exec exec) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const int nq = static_cast<int>(q.points.size());
  const Eigen::MatrixXd N = space.basis_values(q);
  const int npe = space.nodes_per_elem();
  Eigen::MatrixXd v(mesh.n_tets(), nq);
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const auto& en = space.element_nodes(t);
    Eigen::VectorXd vh_local;
    if (hartree) {
      vh_local.resize(npe);
      for (int a = 0; a < npe; ++a) vh_local(a) = hartree->node_values(en[a]);
    }
    for (int iq = 0; iq < nq; ++iq) {
      double val = eval_vloc(model, space.from_reference(t, q.points[iq]));
      if (hartree) val += N.row(iq).dot(vh_local);
      if (model.xc.enabled()) {
        const double r = rho.quad(t, iq);
        if (r < -1e-12)
          throw ContractViolation("potential assembly: negative density");
        val += r <= kRhoFloor ? 0.0 : model.xc.e1(std::max(r, 0.0));
      }
      v(t, iq) = val;
    }
  });
  return v;
}

HamiltonianParts assemble_parts(const FeSpace& space, const KohnShamModel& model,
                                const DensityField& rho, const AssemblyOptions& opts) {
  HamiltonianParts parts;
  parts.kinetic = assemble_kinetic(space, opts.exec);
  parts.mass = assemble_mass(space, opts.exec);
  if (model.hartree)
    parts.hartree = opts.hartree_path == HartreePath::Poisson
                        ? hartree_poisson(space, rho, opts.exec)
                        : hartree_direct(space, rho, opts.exec);
  const Eigen::MatrixXd v = potential_quad_values(
      space, model, rho, parts.hartree ? &*parts.hartree : nullptr, opts.exec);
  parts.potential = assemble_potential(space, v, opts.exec);
  parts.proj = projector_factor(model, space);
  return parts;
}

EnergyBreakdown total_energy(const FeSpace& space, const KohnShamModel& model,
                             const OrbitalSet& phi, const AssemblyOptions& opts) {
  EnergyBreakdown E;
  const TetMesh& mesh = space.mesh();
  const SparseSym kin = assemble_kinetic(space, opts.exec);
  for (int i = 0; i < phi.n_orbitals(); ++i)
    E.kinetic += phi.C.col(i).dot(kin.mat * phi.C.col(i));
  if (!std::isfinite(E.kinetic)) throw NumericalFailure("total_energy: kinetic term");

  const DensityField& rho = phi.rho;
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  std::vector<double> vloc_elem(mesh.n_tets(), 0.0), xc_elem(mesh.n_tets(), 0.0);
  for_each_index(opts.exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const double jac = 6.0 * mesh.volume(t);
    double sv = 0.0, sx = 0.0;
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const double w = jac * q.weights[iq];
      const double r = rho.quad(t, iq);
      sv += w * eval_vloc(model, space.from_reference(t, q.points[iq])) * r;
      if (model.xc.enabled() && r > kRhoFloor) sx += w * model.xc.e(r);
    }
    vloc_elem[ti] = sv;
    xc_elem[ti] = sx;
  });
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    E.v_loc += vloc_elem[t];
    E.xc += xc_elem[t];
  }
  if (!std::isfinite(E.v_loc)) throw NumericalFailure("total_energy: V_loc term");
  if (!std::isfinite(E.xc)) throw NumericalFailure("total_energy: xc term");

  if (model.n_projectors() > 0) {
    const Eigen::MatrixXd P = projector_factor(model, space);
    E.nonlocal = (P.transpose() * phi.C).squaredNorm();
    if (!std::isfinite(E.nonlocal)) throw NumericalFailure("total_energy: nonlocal term");
  }

  if (model.hartree) {
    const HartreeField vh = opts.hartree_path == HartreePath::Poisson
                                ? hartree_poisson(space, rho, opts.exec)
                                : hartree_direct(space, rho, opts.exec);
    E.hartree = coulomb_energy(space, rho, vh);
    if (!std::isfinite(E.hartree)) throw NumericalFailure("total_energy: Hartree term");
  }
  return E;
}

Eigen::MatrixXd lagrange_multiplier(const FeSpace& space, const KohnShamModel& model,
                                    const OrbitalSet& phi, const AssemblyOptions& opts,
                                    double* asym) {
  const HamiltonianParts parts = assemble_parts(space, model, phi.rho, opts);
  const Eigen::MatrixXd HC = parts.apply_h(phi.C);
  // Lambda_ij = (phi_j, H phi_i)
  const Eigen::MatrixXd raw = (phi.C.transpose() * HC).transpose();
  if (asym) *asym = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  return 0.5 * (raw + raw.transpose());
}

}  // namespace ksafem
