// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "ksafem/error.hpp"
#include "ksafem/space.hpp"

using namespace ksafem;

namespace {

const Box unit{{0, 0, 0}, {1, 1, 1}};

// Independent node classifier: enumerate unique edges, mark those that are
// edges of boundary faces, count the interior midpoints.
int interior_edge_midpoints(const TetMesh& m) {
  std::set<std::pair<std::int32_t, std::int32_t>> edges, boundary;
  auto key = [](std::int32_t a, std::int32_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  for (const auto& t : m.tets)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) edges.insert(key(t.v[i], t.v[j]));
  for (const auto& bf : m.boundary_faces) {
    boundary.insert(key(bf.v[0], bf.v[1]));
    boundary.insert(key(bf.v[0], bf.v[2]));
    boundary.insert(key(bf.v[1], bf.v[2]));
  }
  int interior = 0;
  for (const auto& e : edges)
    if (!boundary.count(e)) ++interior;
  return interior;
}

}  // namespace

TEST_CASE("P1 on the 6-tet cube has no interior vertices") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 1));
  auto space = make_space(mesh, 1);
  CHECK(space->ndof() == 0);
}

TEST_CASE("P1 on the n=2 cube has exactly the center vertex") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  auto space = make_space(mesh, 1);
  CHECK(space->ndof() == 1);
  const Vec3 p = space->node_point(space->dof_node(0));
  CHECK(p.x == doctest::Approx(0.5));
  CHECK(p.y == doctest::Approx(0.5));
  CHECK(p.z == doctest::Approx(0.5));
}

TEST_CASE("P2 ndof on the 6-tet cube equals the interior edge-midpoint count") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 1));
  auto space = make_space(mesh, 2);
  const int oracle = interior_edge_midpoints(*mesh);
  CHECK(space->ndof() == oracle);
  // The Kuhn cube has 12 cube edges + 6 face diagonals on the boundary and
  // a single interior edge, the main diagonal.
  CHECK(oracle == 1);
}

TEST_CASE("P2 ndof matches the classifier on refined meshes") {
  auto m = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  auto r = std::make_shared<TetMesh>(refine(*m, {0, 7, 13, 21}));
  auto space = make_space(r, 2);
  int interior_vertices = 0;
  std::set<std::int32_t> boundary_vertices;
  for (const auto& bf : r->boundary_faces)
    for (std::int32_t v : bf.v) boundary_vertices.insert(v);
  for (std::int32_t v = 0; v < r->n_vertices(); ++v)
    if (!boundary_vertices.count(v)) ++interior_vertices;
  CHECK(space->ndof() == interior_vertices + interior_edge_midpoints(*r));
}

TEST_CASE("unsupported degree is rejected") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 1));
  CHECK_THROWS_AS(make_space(mesh, 3), InvalidInput);
}

TEST_CASE("DOF numbering is vertices-first and deterministic") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 3));
  auto s1 = make_space(mesh, 2);
  auto s2 = make_space(mesh, 2);
  REQUIRE(s1->ndof() == s2->ndof());
  bool in_edge_block = false;
  for (int d = 0; d < s1->ndof(); ++d) {
    CHECK(s1->dof_node(d) == s2->dof_node(d));
    const bool is_vertex = s1->dof_node(d) < mesh->n_vertices();
    if (!is_vertex) in_edge_block = true;
    CHECK((!in_edge_block || !is_vertex));  // no vertex after an edge node
  }
}

TEST_CASE("partition of unity at quadrature points") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  for (int degree : {1, 2}) {
    auto space = make_space(mesh, degree);
    const TetQuadrature& q = tet_quadrature(space->quad_degree_potential());
    const Eigen::MatrixXd N = space->basis_values(q);
    for (Eigen::Index iq = 0; iq < N.rows(); ++iq)
      CHECK(N.row(iq).sum() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("interpolation of zero is zero") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  auto space = make_space(mesh, 2);
  const Eigen::VectorXd c = interpolate(*space, [](const Vec3&) { return 0.0; });
  CHECK(c.norm() == 0.0);
}

TEST_CASE("P1 interpolation holds the nodal values of an affine field") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  auto space = make_space(mesh, 1);
  auto f = [](const Vec3& p) { return p.x + 2.0 * p.y - 0.5 * p.z; };
  const Eigen::VectorXd c = interpolate(*space, f);
  const Eigen::VectorXd full = space->full_from_dofs(c);
  for (int d = 0; d < space->ndof(); ++d) {
    const int nd = space->dof_node(d);
    CHECK(full(nd) == doctest::Approx(f(space->node_point(nd))));
  }
}

TEST_CASE("P2 interpolation reproduces quadratics exactly") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  auto space = make_space(mesh, 2);
  auto f = [](const Vec3& p) {
    return p.x * p.x + 0.5 * p.y * p.z - p.z + 0.25 * p.y;
  };
  Eigen::VectorXd nodal(space->n_nodes());
  for (int nd = 0; nd < space->n_nodes(); ++nd) nodal(nd) = f(space->node_point(nd));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TetMesh& m = space->mesh();
  for (int trial = 0; trial < 100; ++trial) {
    const std::int32_t t = static_cast<std::int32_t>(rng() % m.n_tets());
    double b[4] = {u(rng), u(rng), u(rng), u(rng)};
    const double s = b[0] + b[1] + b[2] + b[3];
    const auto p = m.tet_points(t);
    Vec3 x{0, 0, 0};
    for (int i = 0; i < 4; ++i) x += (b[i] / s) * p[i];
    CHECK(space->eval(t, nodal, x) == doctest::Approx(f(x)).epsilon(1e-12));
  }
}

TEST_CASE("interpolate rejects non-finite nodal values") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  auto space = make_space(mesh, 1);
  CHECK_THROWS_AS(
      interpolate(*space, [](const Vec3& p) { return 1.0 / (p.x - 0.5); }),
      NumericalFailure);
}

TEST_CASE("transfer embeds exactly into the refined space") {
  auto coarse_mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  for (int degree : {1, 2}) {
    auto coarse = make_space(coarse_mesh, degree);
    auto fine_mesh = std::make_shared<TetMesh>(refine(*coarse_mesh, {0, 9, 17}));
    auto fine = make_space(fine_mesh, degree);

    std::mt19937_64 rng(degree);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd c(coarse->ndof());
    for (int i = 0; i < c.size(); ++i) c(i) = gauss(rng);

    const Eigen::VectorXd cf = transfer(*coarse, *fine, c);
    const Eigen::VectorXd coarse_nodal = coarse->full_from_dofs(c);
    const Eigen::VectorXd fine_nodal = fine->full_from_dofs(cf);

    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::int32_t tf = static_cast<std::int32_t>(rng() % fine_mesh->n_tets());
      double b[4] = {u(rng) + 0.05, u(rng) + 0.05, u(rng) + 0.05, u(rng) + 0.05};
      const double s = b[0] + b[1] + b[2] + b[3];
      const auto p = fine_mesh->tet_points(tf);
      Vec3 x{0, 0, 0};
      for (int i = 0; i < 4; ++i) x += (b[i] / s) * p[i];
      const double v_fine = fine->eval(tf, fine_nodal, x);
      const double v_coarse = coarse->eval(fine_mesh->parent_tet[tf], coarse_nodal, x);
      CHECK(v_fine == doctest::Approx(v_coarse).epsilon(1e-12));
    }
  }
}

TEST_CASE("transfer of zero is zero and non-nested meshes are rejected") {
  auto mesh_a = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  auto mesh_b = std::make_shared<TetMesh>(build_box_mesh(unit, 2));
  auto sa = make_space(mesh_a, 1);
  auto sb = make_space(mesh_b, 1);
  CHECK_THROWS_AS(transfer(*sa, *sb, Eigen::VectorXd::Zero(sa->ndof())), InvalidInput);

  auto fine_mesh = std::make_shared<TetMesh>(refine(*mesh_a, {1}));
  auto fine = make_space(fine_mesh, 1);
  const Eigen::VectorXd z = transfer(*sa, *fine, Eigen::VectorXd::Zero(sa->ndof()));
  CHECK(z.norm() == 0.0);
}

TEST_CASE("project_poly is the identity on polynomials in range") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 1));
  auto space = make_space(mesh, 2);
  const TetQuadrature& q = tet_quadrature(4);
  for (int d : {0, 1, 2}) {
    Eigen::VectorXd g(q.points.size());
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const Vec3 x = space->from_reference(2, q.points[i]);
      g(i) = 1.0 + (d >= 1 ? 0.7 * x.x - 0.2 * x.z : 0.0) +
             (d >= 2 ? 0.3 * x.y * x.y - x.x * x.z : 0.0);
    }
    const Eigen::VectorXd p = project_poly(*space, 2, q, g, d);
    CHECK((p - g).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("project_poly onto constants gives the quadrature mean") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 1));
  auto space = make_space(mesh, 1);
  const TetQuadrature& q = tet_quadrature(4);
  Eigen::VectorXd g(q.points.size());
  double mean = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const Vec3 x = space->from_reference(0, q.points[i]);
    g(i) = x.x;
    mean += q.weights[i] * x.x;
    wsum += q.weights[i];
  }
  mean /= wsum;
  const Eigen::VectorXd p = project_poly(*space, 0, q, g, 0);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    CHECK(p(i) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("project_poly residual is quadrature-orthogonal to the range") {
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(unit, 1));
  auto space = make_space(mesh, 2);
  const TetQuadrature& q = tet_quadrature(6);
  Eigen::VectorXd g(q.points.size());
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const Vec3 x = space->from_reference(3, q.points[i]);
    g(i) = std::sin(3.0 * x.x) * std::exp(x.y - x.z);
  }
  const Eigen::VectorXd p = project_poly(*space, 3, q, g, 1);
  for (int mono = 0; mono < 4; ++mono) {
    double dotp = 0.0;
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const Vec3 x = space->from_reference(3, q.points[i]);
      const double basis = mono == 0 ? 1.0 : (mono == 1 ? x.x : (mono == 2 ? x.y : x.z));
      dotp += q.weights[i] * (g(i) - p(i)) * basis;
    }
    CHECK(std::abs(dotp) <= 1e-10);
  }
}
