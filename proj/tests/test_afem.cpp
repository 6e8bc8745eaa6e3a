// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ksafem/afem.hpp"
#include "ksafem/error.hpp"

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

struct ToySetup {
  std::shared_ptr<const TetMesh> mesh;
  std::shared_ptr<FeSpace> space;
  KohnShamModel model;
};

ToySetup gaussian_linear(int n_orb) {
  ToySetup s;
  const Box box{{-5, -5, -5}, {5, 5, 5}};
  s.mesh = std::make_shared<TetMesh>(build_box_mesh(box, 3));
  s.space = make_space(s.mesh, 2);
  s.model.domain_box = box;
  s.model.n_orbitals = n_orb;
  s.model.gaussian_wells.push_back({-4.0, 1.3, {0.1, 0.05, -0.1}});
  return s;
}

OrbitalSet orthonormal_orbitals(const ToySetup& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd C(s.space->ndof(), s.model.n_orbitals);
  for (int i = 0; i < C.rows(); ++i)
    for (int j = 0; j < C.cols(); ++j) C(i, j) = gauss(rng);
  const SparseSym mass = assemble_mass(*s.space);
  OrbitalSet phi;
  phi.space = s.space;
  phi.C = m_orthonormalize(C, mass.mat);
  phi.rho = density(*s.space, phi.C);
  return phi;
}

}  // namespace

TEST_CASE("align recovers a synthetic rotation") {
  ToySetup s = gaussian_linear(3);
  OrbitalSet a = orthonormal_orbitals(s, 7);
  const Eigen::MatrixXd U0 = random_orthogonal(3, 99);
  OrbitalSet b;
  b.space = a.space;
  b.C = a.C * U0;
  const Alignment al = align_orbitals(a, b);
  CHECK(al.distance <= 1e-10);
  CHECK((al.U.transpose() * U0 - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <=
        1e-8);
}

TEST_CASE("align of identical sets is the identity") {
  ToySetup s = gaussian_linear(2);
  OrbitalSet a = orthonormal_orbitals(s, 13);
  const Alignment al = align_orbitals(a, a);
  CHECK((al.U - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(al.distance <= 1e-12);
}

TEST_CASE("align absorbs a sign flip at N=1") {
  ToySetup s = gaussian_linear(1);
  OrbitalSet a = orthonormal_orbitals(s, 21);
  OrbitalSet b;
  b.space = a.space;
  b.C = -a.C;
  const Alignment al = align_orbitals(a, b);
  CHECK(al.U(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(al.distance <= 1e-12);
}

TEST_CASE("align rejects mismatched spaces") {
  ToySetup s1 = gaussian_linear(1);
  ToySetup s2 = gaussian_linear(1);
  const OrbitalSet a = orthonormal_orbitals(s1, 1);
  const OrbitalSet b = orthonormal_orbitals(s2, 2);
  CHECK_THROWS_AS(align_orbitals(a, b), InvalidInput);
}

TEST_CASE("complexity fit nails an exact power law") {
  ConvergenceRecord rec;
  for (int k = 0; k < 8; ++k) {
    ConvergenceRow row;
    row.iter = k;
    row.ndof = 100 << k;
    row.n_tets = 50 + (60 << k);
    row.eta2 = std::pow(3.0 * std::pow(row.ndof, -2.0 / 3.0), 2);
    rec.rows.push_back(row);
  }
  const ComplexityCurve c = complexity_curve(rec);
  CHECK(c.vs_ndof.slope == doctest::Approx(-2.0 / 3.0).epsilon(1e-6));
  CHECK(c.vs_ndof.residual <= 1e-10);
}

TEST_CASE("complexity fit of constant eta is zero slope") {
  ConvergenceRecord rec;
  for (int k = 0; k < 6; ++k) {
    ConvergenceRow row;
    row.iter = k;
    row.ndof = 10 * (k + 1);
    row.n_tets = 7 * (k + 2);
    row.eta2 = 4.0;
    rec.rows.push_back(row);
  }
  const ComplexityCurve c = complexity_curve(rec);
  CHECK(std::abs(c.vs_ndof.slope) <= 1e-12);
}

TEST_CASE("complexity fit needs at least four records") {
  ConvergenceRecord rec;
  rec.rows.resize(3);
  CHECK_THROWS_AS(complexity_curve(rec), InvalidInput);
}

TEST_CASE("linear sub-case loop: energy never increases, ndof always grows") {
  const Box box{{-5, -5, -5}, {5, 5, 5}};
  auto mesh0 = std::make_shared<TetMesh>(build_box_mesh(box, 2));
  KohnShamModel model;
  model.domain_box = box;
  model.n_orbitals = 1;
  model.gaussian_wells.push_back({-4.0, 1.3, {0.1, 0.05, -0.1}});

  AfemConfig config;
  config.strategy = MarkStrategy::Dorfler;
  config.theta = 0.5;
  config.max_outer_iters = 5;
  config.ndof_max = 100000;
  config.degree = 2;
  config.scf.eig_tol = 1e-9;

  const ConvergenceRecord rec = run_ks_afem(mesh0, model, config);
  REQUIRE(rec.clean);
  REQUIRE(rec.rows.size() == 5);
  for (std::size_t k = 1; k < rec.rows.size(); ++k) {
    CHECK(rec.rows[k].energy <= rec.rows[k - 1].energy + 1e-10);
    CHECK(rec.rows[k].ndof > rec.rows[k - 1].ndof);
    CHECK(rec.rows[k].eta2 > 0.0);
    CHECK(std::isfinite(rec.rows[k].align_dist));
  }
  // eigenvalue min-max monotonicity across the nested spaces
  for (std::size_t k = 1; k < rec.rows.size(); ++k)
    CHECK(rec.rows[k].mu(0) <= rec.rows[k - 1].mu(0) + 1e-10);
}

TEST_CASE("maximum and doerfler strategies both drive eta down") {
  const Box box{{-5, -5, -5}, {5, 5, 5}};
  KohnShamModel model;
  model.domain_box = box;
  model.n_orbitals = 1;
  model.gaussian_wells.push_back({-4.0, 1.3, {0.1, 0.05, -0.1}});

  AfemConfig config;
  config.max_outer_iters = 4;
  config.degree = 2;

  for (MarkStrategy strategy : {MarkStrategy::Dorfler, MarkStrategy::Maximum}) {
    config.strategy = strategy;
    auto mesh0 = std::make_shared<TetMesh>(build_box_mesh(box, 2));
    const ConvergenceRecord rec = run_ks_afem(mesh0, model, config);
    REQUIRE(rec.clean);
    REQUIRE(rec.rows.size() == 4);
    CHECK(rec.rows.back().eta2 < rec.rows.front().eta2);
  }
}

TEST_CASE("ndof cap stops the loop with the documented reason") {
  const Box box{{-5, -5, -5}, {5, 5, 5}};
  auto mesh0 = std::make_shared<TetMesh>(build_box_mesh(box, 2));
  KohnShamModel model;
  model.domain_box = box;
  model.n_orbitals = 1;
  model.gaussian_wells.push_back({-4.0, 1.3, {0.1, 0.05, -0.1}});

  AfemConfig config;
  config.max_outer_iters = 50;
  config.ndof_max = 500;
  config.degree = 2;
  const ConvergenceRecord rec = run_ks_afem(mesh0, model, config);
  CHECK(rec.stop_reason == "ndof_max");
  CHECK(rec.rows.back().ndof >= 500);
}

TEST_CASE("invalid configuration is rejected up front") {
  const Box box{{-1, -1, -1}, {1, 1, 1}};
  auto mesh0 = std::make_shared<TetMesh>(build_box_mesh(box, 1));
  KohnShamModel model;
  model.domain_box = box;
  AfemConfig config;
  config.theta = 1.5;
  CHECK_THROWS_AS(run_ks_afem(mesh0, model, config), InvalidInput);
}

TEST_CASE("align distance to the previous iterate shrinks as the loop stabilizes") {
  const Box box{{-5, -5, -5}, {5, 5, 5}};
  auto mesh0 = std::make_shared<TetMesh>(build_box_mesh(box, 2));
  KohnShamModel model;
  model.domain_box = box;
  model.n_orbitals = 1;
  model.gaussian_wells.push_back({-4.0, 1.3, {0.1, 0.05, -0.1}});

  AfemConfig config;
  config.max_outer_iters = 6;
  config.degree = 2;
  const ConvergenceRecord rec = run_ks_afem(mesh0, model, config);
  REQUIRE(rec.clean);
  REQUIRE(rec.rows.size() == 6);
  const auto& rows = rec.rows;
  // recorded with 2x slack over the last three iterates
  const std::size_t n = rows.size();
  CHECK(rows[n - 1].align_dist <= 2.0 * rows[n - 2].align_dist + 1e-12);
  CHECK(rows[n - 2].align_dist <= 2.0 * rows[n - 3].align_dist + 1e-12);
}
