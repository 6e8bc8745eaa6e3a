// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ksafem/error.hpp"
#include "ksafem/estimator.hpp"
#include "ksafem/scf.hpp"

using namespace ksafem;

namespace {

Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
}

struct SolvedCase {
  std::shared_ptr<const TetMesh> mesh;
  std::shared_ptr<FeSpace> space;
  KohnShamModel model;
  ScfResult scf;
};

SolvedCase solved_gaussian(int n_orb, bool nonlinear) {
  SolvedCase s;
  const Box box{{-5, -5, -5}, {5, 5, 5}};
  s.mesh = std::make_shared<TetMesh>(build_box_mesh(box, 3));
  s.space = make_space(s.mesh, 2);
  s.model.domain_box = box;
  s.model.n_orbitals = n_orb;
  s.model.gaussian_wells.push_back({-4.0, 1.3, {0.12, 0.07, -0.09}});
  if (nonlinear) {
    s.model.hartree = true;
    s.model.xc = make_xc_xalpha(0.7);
    s.model.xc_alpha = 0.7;
  }
  ScfConfig cfg;
  cfg.tol = 1e-9;
  cfg.mix_beta = 0.6;
  cfg.max_iters = 150;
  cfg.eig_tol = 1e-10;
  s.scf = scf_solve(s.space, s.model, cfg);
  REQUIRE(s.scf.report.converged);
  return s;
}

}  // namespace

TEST_CASE("zero right-hand side: all linear indicators vanish") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(Box{{0, 0, 0}, {1, 1, 1}}, 2));
  auto space = make_space(mesh, 2);
  LinearProblem p;
  p.n_components = 1;
  p.f = {[](const Vec3&) { return 0.0; }};
  const Eigen::MatrixXd nodal = Eigen::MatrixXd::Zero(space->n_nodes(), 1);
  const IndicatorField ind = linear_indicators(*space, p, nodal);
  CHECK(ind.total_eta2() == 0.0);
  CHECK(ind.total_osc2() == 0.0);
}

TEST_CASE("two-tet jump oracle: J = 1/2 on the shared face") {
  // tets on either side of the plane x = 1; u = x-1 on the left, 0 right
  auto mesh = std::make_shared<TetMesh>();
  mesh->domain_box = {{0, -1, -1}, {2, 2, 2}};
  mesh->vertices = {{1, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 0, 0}, {2, 0, 0}};
  mesh->tets = {{{0, 1, 2, 3}, 3, 0}, {{0, 1, 2, 4}, 3, 0}};
  rebuild_adjacency(*mesh);
  REQUIRE(mesh->interior_faces.size() == 1);
  auto space = make_space(mesh, 1);

  Eigen::MatrixXd nodal = Eigen::MatrixXd::Zero(space->n_nodes(), 1);
  nodal(3, 0) = -1.0;  // u = x - 1 on the left tet, 0 on the right
  LinearProblem p;
  p.n_components = 1;
  p.f = {[](const Vec3&) { return 0.0; }};
  const IndicatorField ind = linear_indicators(*space, p, nodal);

  // h_e ||J||^2 with J = 1/2: face diameter sqrt(2), area 1/2
  const double expected = std::sqrt(2.0) * 0.25 * 0.5;
  CHECK(ind.face_jump2(0) == doctest::Approx(expected).epsilon(1e-12));
  // the face term lands on both adjacent elements
  CHECK(ind.eta2(0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ind.eta2(1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("P1 residual reduces to the zero-order terms") {
  // independent oracle: quadrature of (V phi - lambda phi)^2 without any
  // Laplacian, compared against the library's eta parts minus face terms
  SolvedCase s;
  const Box box{{-4, -4, -4}, {4, 4, 4}};
  s.mesh = std::make_shared<TetMesh>(build_box_mesh(box, 3));
  s.space = make_space(s.mesh, 1);
  s.model.domain_box = box;
  s.model.n_orbitals = 1;
  s.model.gaussian_wells.push_back({-3.0, 1.4, {0.1, 0.0, -0.2}});
  ScfConfig cfg;
  s.scf = scf_solve(s.space, s.model, cfg);
  const OrbitalSet& phi = s.scf.orbitals;

  const IndicatorField ind = ks_indicators(*s.space, s.model, phi, &s.scf.parts);

  const TetQuadrature& q = tet_quadrature(s.space->quad_degree_potential());
  const Eigen::MatrixXd N = s.space->basis_values(q);
  const Eigen::VectorXd full = s.space->full_from_dofs(phi.C.col(0));
  for (std::int32_t t = 0; t < s.mesh->n_tets(); t += 17) {
    const double jac = 6.0 * s.mesh->volume(t);
    const double h2 = s.mesh->diameter(t) * s.mesh->diameter(t);
    const auto& en = s.space->element_nodes(t);
    double r2 = 0.0;
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const Vec3 x = s.space->from_reference(t, q.points[iq]);
      double pv = 0.0;
      for (int a = 0; a < 4; ++a) pv += N(iq, a) * full(en[a]);
      const double r = eval_vloc(s.model, x) * pv - phi.mu(0) * pv;
      r2 += jac * q.weights[iq] * r * r;
    }
    // subtract the face contributions attached to this tet
    double faces = 0.0;
    for (std::size_t f = 0; f < s.mesh->interior_faces.size(); ++f)
      if (s.mesh->interior_faces[f].a == t || s.mesh->interior_faces[f].b == t)
        faces += ind.face_jump2(f);
    CHECK(ind.eta2(t) - faces == doctest::Approx(h2 * r2).epsilon(1e-10));
  }
}

TEST_CASE("oscillation never exceeds the element residual part") {
  SolvedCase s = solved_gaussian(1, true);
  const IndicatorField ind =
      ks_indicators(*s.space, s.model, s.scf.orbitals, &s.scf.parts);
  for (Eigen::Index t = 0; t < ind.eta2.size(); ++t) {
    CHECK(ind.osc2(t) >= 0.0);
    CHECK(ind.osc2(t) <= ind.eta2(t) + 1e-15);
  }
  CHECK(ind.total_eta2() > 0.0);
}

TEST_CASE("residual functional vanishes on V_h test functions") {
  // V = 0 keeps every term of the identity exactly integrable
  const Box box{{0, 0, 0}, {1, 1, 1}};
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(box, 2));
  auto space = make_space(mesh, 2);
  KohnShamModel model;
  model.domain_box = box;
  model.n_orbitals = 2;
  ScfConfig cfg;
  cfg.eig_tol = 1e-11;
  const ScfResult scf = scf_solve(space, model, cfg);

  auto fine_mesh = std::make_shared<TetMesh>(
      refine(*mesh, std::vector<std::int32_t>{0, 1, 2}));
  auto fine = make_space(fine_mesh, 2);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd gamma_coarse(space->ndof(), 2);
  for (int i = 0; i < space->ndof(); ++i)
    for (int j = 0; j < 2; ++j) gamma_coarse(i, j) = gauss(rng);
  Eigen::MatrixXd gamma(fine->ndof(), 2);
  for (int j = 0; j < 2; ++j) {
    gamma.col(j) = transfer(*space, *fine, gamma_coarse.col(j));
    gamma.col(j) /= gamma.col(j).norm();
  }
  const double r =
      residual_functional(*space, model, scf.orbitals, *fine, gamma, &scf.parts);
  CHECK(std::abs(r) <= 1e-9);

  // zero test functions
  const double rz = residual_functional(*space, model, scf.orbitals, *fine,
                                        Eigen::MatrixXd::Zero(fine->ndof(), 2),
                                        &scf.parts);
  CHECK(rz == 0.0);
}

TEST_CASE("elementwise residual functional equals the weak residual") {
  SolvedCase s = solved_gaussian(2, true);
  auto fine_mesh = std::make_shared<TetMesh>(
      refine(*s.mesh, std::vector<std::int32_t>{0, 9, 33}));
  auto fine = make_space(fine_mesh, 2);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd gamma(fine->ndof(), 2);
  for (int i = 0; i < fine->ndof(); ++i)
    for (int j = 0; j < 2; ++j) gamma(i, j) = gauss(rng);
  for (int j = 0; j < 2; ++j) gamma.col(j) /= gamma.col(j).norm();

  const double strong =
      residual_functional(*s.space, s.model, s.scf.orbitals, *fine, gamma, &s.scf.parts);
  const double weak =
      weak_residual(*s.space, s.model, s.scf.orbitals, *fine, gamma, &s.scf.parts);
  CHECK(strong == doctest::Approx(weak).epsilon(1e-9));
  CHECK(std::abs(strong - weak) <= 1e-9 * std::max(1.0, std::abs(weak)));
}

TEST_CASE("transform bound: identity and permutations preserve the total") {
  SolvedCase s = solved_gaussian(2, false);
  const auto [eta_i, eta_ref] = estimator_transform_bound(
      *s.space, s.model, s.scf.orbitals, Eigen::MatrixXd::Identity(2, 2));
  CHECK(eta_i == doctest::Approx(eta_ref).epsilon(1e-13));

  Eigen::MatrixXd P(2, 2);
  P << 0, 1, 1, 0;
  const auto [eta_p, eta_ref2] =
      estimator_transform_bound(*s.space, s.model, s.scf.orbitals, P);
  CHECK(eta_p == doctest::Approx(eta_ref2).epsilon(1e-12));
}

TEST_CASE("transform bound: factor-N inequalities hold both ways") {
  SolvedCase s = solved_gaussian(2, false);
  for (int trial = 0; trial < 6; ++trial) {
    const Eigen::MatrixXd U = random_orthogonal(2, 500 + trial);
    const auto [eta_u, eta_ref] =
        estimator_transform_bound(*s.space, s.model, s.scf.orbitals, U);
    CHECK(eta_u <= 2.0 * eta_ref * (1.0 + 1e-12));
    CHECK(eta_ref <= 2.0 * eta_u * (1.0 + 1e-12));
  }
}

TEST_CASE("transform bound rejects non-orthogonal matrices") {
  SolvedCase s = solved_gaussian(2, false);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(estimator_transform_bound(*s.space, s.model, s.scf.orbitals, bad),
                  InvalidInput);
}

TEST_CASE("eta2 totals add up elementwise in fixed order") {
  SolvedCase s = solved_gaussian(1, false);
  const IndicatorField ind =
      ks_indicators(*s.space, s.model, s.scf.orbitals, &s.scf.parts);
  double manual = 0.0;
  for (Eigen::Index t = 0; t < ind.eta2.size(); ++t) manual += ind.eta2(t);
  CHECK(manual == ind.total_eta2());
  CHECK(ind.eta2.minCoeff() >= 0.0);
  CHECK(ind.osc2.minCoeff() >= 0.0);
}
