// SPDX-License-Identifier: Apache-2.0

#include "ksafem/linear_bvp.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <cmath>

#include "ksafem/error.hpp"
#include "ksafem/estimator.hpp"
#include "ksafem/marking.hpp"
#include "ksafem/mesh.hpp"

namespace ksafem {

namespace {

// Full-node stiffness of the half-gradient form a(u,v) = 1/2 (grad u, grad v).
Eigen::SparseMatrix<double, Eigen::RowMajor> assemble_a_full(const FeSpace& space,
                                                             Exec exec) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_matrix());
  const auto Gref = space.basis_gradients(q);
  const int npe = space.nodes_per_elem();
  std::vector<Eigen::MatrixXd> local(mesh.n_tets());
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const Eigen::Matrix3d Jinv = space.jacobian(t).inverse();
    const double jac = 6.0 * mesh.volume(t);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(npe, npe);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const Eigen::MatrixXd G = Gref[iq] * Jinv;
      K.noalias() += (0.5 * q.weights[iq] * jac) * (G * G.transpose());
    }
    local[ti] = K;
  });
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.n_tets()) * npe * npe);
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const auto& en = space.element_nodes(t);
    for (int a = 0; a < npe; ++a)
      for (int b = 0; b < npe; ++b) trip.emplace_back(en[a], en[b], local[t](a, b));
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> A(space.n_nodes(), space.n_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

}  // namespace

LinearSolveResult solve_linear_quad_rhs(const FeSpace& space,
                                        const std::vector<Eigen::MatrixXd>& rhs_quad,
                                        const BoundaryField& boundary, Exec exec,
                                        int rhs_degree) {
  const TetMesh& mesh = space.mesh();
  const int ncomp = static_cast<int>(rhs_quad.size());
  const TetQuadrature& q =
      tet_quadrature(rhs_degree > 0 ? rhs_degree : space.quad_degree_potential());
  const Eigen::MatrixXd N = space.basis_values(q);
  const int npe = space.nodes_per_elem();

  const auto A_full = assemble_a_full(space, exec);

  // interior block and interior-boundary coupling
  std::vector<Eigen::Triplet<double>> tii, tib;
  const int nb = space.n_nodes() - space.ndof();
  std::vector<std::int32_t> bnd_index(space.n_nodes(), -1);
  {
    int k = 0;
    for (int nd = 0; nd < space.n_nodes(); ++nd)
      if (space.node_dof(nd) < 0) bnd_index[nd] = k++;
  }
  for (int r = 0; r < A_full.outerSize(); ++r) {
    const int dr = space.node_dof(r);
    if (dr < 0) continue;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A_full, r); it;
         ++it) {
      const int dc = space.node_dof(it.col());
      if (dc >= 0)
        tii.emplace_back(dr, dc, it.value());
      else
        tib.emplace_back(dr, bnd_index[it.col()], it.value());
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> Aii(space.ndof(), space.ndof());
  Aii.setFromTriplets(tii.begin(), tii.end());
  Eigen::SparseMatrix<double, Eigen::RowMajor> Aib(space.ndof(), nb);
  Aib.setFromTriplets(tib.begin(), tib.end());

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double, Eigen::RowMajor>,
                           Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(20000);
  cg.compute(Aii);
  if (cg.info() != Eigen::Success)
    throw NumericalFailure("solve_linear: preconditioner setup failed");

  LinearSolveResult out;
  out.nodal.resize(space.n_nodes(), ncomp);
  for (int comp = 0; comp < ncomp; ++comp) {
    if (rhs_quad[comp].rows() != mesh.n_tets() ||
        rhs_quad[comp].cols() != static_cast<Eigen::Index>(q.points.size()))
      throw InvalidInput("solve_linear: rhs grid does not match the rule");
    // load vector
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.ndof());
    for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
      const double jac = 6.0 * mesh.volume(t);
      const auto& en = space.element_nodes(t);
      for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
        const double w = jac * q.weights[iq] * rhs_quad[comp](t, iq);
        for (int a = 0; a < npe; ++a) {
          const int dof = space.node_dof(en[a]);
          if (dof >= 0) b(dof) += w * N(iq, a);
        }
      }
    }
    // boundary lifting
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nb);
    if (boundary) {
      for (int nd = 0; nd < space.n_nodes(); ++nd)
        if (bnd_index[nd] >= 0) g(bnd_index[nd]) = boundary(space.node_point(nd), comp);
      b -= Aib * g;
    }
    const Eigen::VectorXd u = cg.solve(b);
    const double resid = (Aii * u - b).norm() / std::max(b.norm(), 1e-300);
    if (b.norm() > 0.0 && resid > 1e-10)
      throw NumericalFailure("solve_linear: CG did not reach the residual target");
    out.cg_iterations = std::max<int>(out.cg_iterations, static_cast<int>(cg.iterations()));
    out.rel_residual = std::max(out.rel_residual, resid);

    Eigen::VectorXd nodal = Eigen::VectorXd::Zero(space.n_nodes());
    for (int d = 0; d < space.ndof(); ++d) nodal(space.dof_node(d)) = u(d);
    if (boundary)
      for (int nd = 0; nd < space.n_nodes(); ++nd)
        if (bnd_index[nd] >= 0) nodal(nd) = g(bnd_index[nd]);
    out.nodal.col(comp) = nodal;
  }
  return out;
}

LinearSolveResult solve_linear(const FeSpace& space, const LinearProblem& problem,
                               Exec exec, int rhs_degree) {
  if (static_cast<int>(problem.f.size()) != problem.n_components)
    throw InvalidInput("solve_linear: component count mismatch");
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q =
      tet_quadrature(rhs_degree > 0 ? rhs_degree : space.quad_degree_potential());
  std::vector<Eigen::MatrixXd> rhs;
  rhs.reserve(problem.n_components);
  for (int comp = 0; comp < problem.n_components; ++comp) {
    Eigen::MatrixXd vals(mesh.n_tets(), q.points.size());
    for_each_index(exec, mesh.n_tets(), [&](std::int64_t t) {
      for (std::size_t iq = 0; iq < q.points.size(); ++iq)
        vals(t, iq) =
            problem.f[comp](space.from_reference(static_cast<std::int32_t>(t), q.points[iq]));
    });
    rhs.push_back(std::move(vals));
  }
  return solve_linear_quad_rhs(space, rhs, problem.boundary, exec, rhs_degree);
}

double h1_norm_sq(const FeSpace& space, const Eigen::VectorXd& nodal) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_matrix());
  const Eigen::MatrixXd N = space.basis_values(q);
  const auto Gref = space.basis_gradients(q);
  const int npe = space.nodes_per_elem();
  double s = 0.0;
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const Eigen::Matrix3d Jinv = space.jacobian(t).inverse();
    const double jac = 6.0 * mesh.volume(t);
    const auto& en = space.element_nodes(t);
    Eigen::VectorXd local(npe);
    for (int a = 0; a < npe; ++a) local(a) = nodal(en[a]);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const double v = N.row(iq).dot(local);
      const Eigen::RowVector3d g = local.transpose() * (Gref[iq] * Jinv);
      s += jac * q.weights[iq] * (v * v + g.squaredNorm());
    }
  }
  return s;
}

double inverse_inequality_constant(const FeSpace& space) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_matrix());
  const Eigen::MatrixXd N = space.basis_values(q);
  const auto Gref = space.basis_gradients(q);
  const int npe = space.nodes_per_elem();
  double worst = 0.0;
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const Eigen::Matrix3d Jinv = space.jacobian(t).inverse();
    const double jac = 6.0 * mesh.volume(t);
    const double h = mesh.diameter(t);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(npe, npe);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(npe, npe);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const Eigen::MatrixXd G = Gref[iq] * Jinv;
      K.noalias() += (q.weights[iq] * jac) * (G * G.transpose());
      M.noalias() += (q.weights[iq] * jac / (h * h)) * (N.row(iq).transpose() * N.row(iq));
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(K, M);
    worst = std::max(worst, ges.eigenvalues().maxCoeff());
  }
  return std::sqrt(worst);
}

namespace {

double dirichlet_energy(const FeSpace& space, const LinearProblem& problem,
                        const Eigen::MatrixXd& nodal, Exec exec) {
  // 1/2 a(u, u) - (F, u) summed over components
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& qm = tet_quadrature(space.quad_degree_matrix());
  const TetQuadrature& qp = tet_quadrature(space.quad_degree_potential());
  const Eigen::MatrixXd Np = space.basis_values(qp);
  const auto Gref = space.basis_gradients(qm);
  const int npe = space.nodes_per_elem();
  std::vector<double> per_elem(mesh.n_tets(), 0.0);
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const Eigen::Matrix3d Jinv = space.jacobian(t).inverse();
    const double jac = 6.0 * mesh.volume(t);
    const auto& en = space.element_nodes(t);
    double s = 0.0;
    for (int comp = 0; comp < problem.n_components; ++comp) {
      Eigen::VectorXd local(npe);
      for (int a = 0; a < npe; ++a) local(a) = nodal(en[a], comp);
      for (std::size_t iq = 0; iq < qm.points.size(); ++iq) {
        const Eigen::RowVector3d g = local.transpose() * (Gref[iq] * Jinv);
        s += 0.25 * jac * qm.weights[iq] * g.squaredNorm();  // 1/2 * a-form's own 1/2
      }
      for (std::size_t iq = 0; iq < qp.points.size(); ++iq) {
        const Vec3 x = space.from_reference(t, qp.points[iq]);
        s -= jac * qp.weights[iq] * problem.f[comp](x) * Np.row(iq).dot(local);
      }
    }
    per_elem[ti] = s;
  });
  double E = 0.0;
  for (double s : per_elem) E += s;
  return E;
}

// H1 and gradient-seminorm errors against the exact solution.
void exact_errors(const FeSpace& space, const LinearProblem& problem,
                  const Eigen::MatrixXd& nodal, Exec exec, double& h1_sq,
                  double& grad_sq) {
  const TetMesh& mesh = space.mesh();
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const Eigen::MatrixXd N = space.basis_values(q);
  const auto Gref = space.basis_gradients(q);
  const int npe = space.nodes_per_elem();
  std::vector<double> e1(mesh.n_tets(), 0.0), eg(mesh.n_tets(), 0.0);
  for_each_index(exec, mesh.n_tets(), [&](std::int64_t ti) {
    const auto t = static_cast<std::int32_t>(ti);
    const Eigen::Matrix3d Jinv = space.jacobian(t).inverse();
    const double jac = 6.0 * mesh.volume(t);
    const auto& en = space.element_nodes(t);
    double s1 = 0.0, sg = 0.0;
    for (int comp = 0; comp < problem.n_components; ++comp) {
      Eigen::VectorXd local(npe);
      for (int a = 0; a < npe; ++a) local(a) = nodal(en[a], comp);
      for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
        const Vec3 x = space.from_reference(t, q.points[iq]);
        const double v = N.row(iq).dot(local) - problem.exact[comp](x);
        const Eigen::RowVector3d gh = local.transpose() * (Gref[iq] * Jinv);
        const Vec3 ge = problem.exact_grad[comp](x);
        const double gx = gh(0) - ge.x, gy = gh(1) - ge.y, gz = gh(2) - ge.z;
        const double w = jac * q.weights[iq];
        sg += w * (gx * gx + gy * gy + gz * gz);
        s1 += w * v * v;
      }
    }
    e1[ti] = s1;
    eg[ti] = sg;
  });
  h1_sq = 0.0;
  grad_sq = 0.0;
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    grad_sq += eg[t];
    h1_sq += e1[t] + eg[t];
  }
}

}  // namespace

LinearAfemResult afem_linear(std::shared_ptr<const TetMesh> mesh0, int degree,
                             const LinearProblem& problem, double theta, int n_iters,
                             Exec exec) {
  if (theta <= 0.0 || theta >= 1.0)
    throw InvalidInput("afem_linear: theta must lie in (0,1)");
  LinearAfemResult out;
  std::shared_ptr<const TetMesh> mesh = std::move(mesh0);
  std::shared_ptr<FeSpace> space = make_space(mesh, degree);
  out.gamma_tilde = 1.0 / (2.0 * std::pow(inverse_inequality_constant(*space), 2));

  for (int k = 0; k < n_iters; ++k) {
    const LinearSolveResult sol = solve_linear(*space, problem, exec);
    const IndicatorField ind = linear_indicators(*space, problem, sol.nodal, exec);

    LinearAfemRecord rec;
    rec.iter = k;
    rec.ndof = space->ndof();
    rec.n_tets = mesh->n_tets();
    rec.eta2 = ind.total_eta2();
    rec.osc2 = ind.total_osc2();
    rec.energy = dirichlet_energy(*space, problem, sol.nodal, exec);
    if (problem.has_exact()) {
      double h1_sq = 0.0, grad_sq = 0.0;
      exact_errors(*space, problem, sol.nodal, exec, h1_sq, grad_sq);
      rec.h1_error = std::sqrt(h1_sq);
      rec.quasi_error = h1_sq + out.gamma_tilde * rec.eta2;
      rec.effectivity = std::sqrt(rec.eta2 / std::max(grad_sq, 1e-300));
    }
    out.records.push_back(rec);
    out.final_mesh = mesh;
    out.final_space = space;
    out.final_nodal = sol.nodal;

    if (rec.eta2 <= 0.0) break;
    if (k + 1 == n_iters) break;

    const MarkedSet marked = mark_dorfler(ind.eta2, theta);
    if (marked.elements.empty()) break;
    mesh = std::make_shared<TetMesh>(refine(*mesh, marked.elements));
    space = make_space(mesh, degree);
  }
  return out;
}

LocalizedBoundCheck localized_bound_check(const FeSpace& coarse,
                                          const Eigen::MatrixXd& coarse_nodal,
                                          const FeSpace& fine,
                                          const Eigen::MatrixXd& fine_nodal,
                                          const LinearProblem& problem, Exec exec) {
  LocalizedBoundCheck out;
  const std::vector<std::int32_t> refined = refined_set(fine.mesh());
  const IndicatorField ind = linear_indicators(coarse, problem, coarse_nodal, exec);
  for (std::int32_t t : refined) out.marked_eta2 += ind.eta2(t);

  for (int comp = 0; comp < coarse_nodal.cols(); ++comp) {
    const Eigen::VectorXd transferred =
        transfer(coarse, fine, coarse.dofs_from_full(coarse_nodal.col(comp)));
    const Eigen::VectorXd diff =
        fine.full_from_dofs(transferred - fine.dofs_from_full(fine_nodal.col(comp)));
    out.error_sq += h1_norm_sq(fine, diff);
  }
  return out;
}

}  // namespace ksafem
