// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ksafem/geometry.hpp"

namespace ksafem {

/// Quadrature rule on the reference tetrahedron
/// {x,y,z >= 0, x+y+z <= 1} (volume 1/6). Weights are all positive and sum
/// to the reference volume. Rules are conical products of Gauss-Jacobi
/// lines, so any requested exactness degree is available; the factory
/// verifies the monomial exactness once per degree.
struct TetQuadrature {
  std::vector<Vec3> points;     // reference coordinates
  std::vector<double> weights;  // sum = 1/6
  int degree = 0;               // exactness degree
};

/// Same construction on the reference triangle {u,v >= 0, u+v <= 1}
/// (area 1/2); used for the face jump integrals.
struct TriQuadrature {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;  // sum = 1/2
  int degree = 0;
};

const TetQuadrature& tet_quadrature(int degree);
const TriQuadrature& tri_quadrature(int degree);

/// Exact integral of x^a y^b z^c over the reference tetrahedron:
/// a! b! c! / (a+b+c+3)!.
double tet_monomial_integral(int a, int b, int c);

/// Exact integral of u^a v^b over the reference triangle.
double tri_monomial_integral(int a, int b);

// Gauss-Jacobi nodes/weights on [0,1] for the weight (1-t)^alpha, computed
// by Golub-Welsch. Exposed for the build-time verification tests.
void gauss_jacobi_01(int n, double alpha, std::vector<double>& nodes,
                     std::vector<double>& weights);

}  // namespace ksafem
