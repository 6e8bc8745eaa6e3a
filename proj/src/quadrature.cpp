// SPDX-License-Identifier: Apache-2.0

#include "ksafem/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "ksafem/error.hpp"

namespace ksafem {

void gauss_jacobi_01(int n, double alpha, std::vector<double>& nodes,
                     std::vector<double>& weights) {
  if (n < 1) throw InvalidInput("gauss_jacobi_01: need n >= 1");
  // Monic Jacobi recurrence on [-1,1] with weight (1-x)^alpha (beta = 0).
  const double beta = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  auto diag = [&](int k) -> double {
    if (k == 0) return (beta - alpha) / (alpha + beta + 2.0);
    const double s = 2.0 * k + alpha + beta;
    return (beta * beta - alpha * alpha) / (s * (s + 2.0));
  };
  auto offdiag2 = [&](int k) -> double {
    const double s = 2.0 * k + alpha + beta;
    return 4.0 * k * (k + alpha) * (k + beta) * (k + alpha + beta) /
           (s * s * (s + 1.0) * (s - 1.0));
  };
  for (int k = 0; k < n; ++k) J(k, k) = diag(k);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(offdiag2(k));
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  // mu0 = int_{-1}^{1} (1-x)^alpha dx = 2^(alpha+1) / (alpha+1)  (beta = 0)
  const double mu0 = std::pow(2.0, alpha + 1.0) / (alpha + 1.0);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double x = es.eigenvalues()(k);
    const double w = mu0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    // Map to [0,1]: t = (1+x)/2, (1-x)^alpha dx = (1-t)^alpha 2^(alpha+1) dt
    nodes[k] = 0.5 * (1.0 + x);
    weights[k] = w / std::pow(2.0, alpha + 1.0);
  }
}

double tet_monomial_integral(int a, int b, int c) {
  // a! b! c! / (a+b+c+3)!, numerator and denominator interleaved
  double v = 1.0;
  const int n = a + b + c + 3;
  std::vector<int> nums;
  for (int i = 2; i <= a; ++i) nums.push_back(i);
  for (int i = 2; i <= b; ++i) nums.push_back(i);
  for (int i = 2; i <= c; ++i) nums.push_back(i);
  std::size_t j = 0;
  for (int i = 2; i <= n; ++i) {
    v /= i;
    if (j < nums.size()) v *= nums[j++];
  }
  while (j < nums.size()) v *= nums[j++];
  return v;
}

double tri_monomial_integral(int a, int b) {
  double v = 1.0;
  const int n = a + b + 2;
  std::vector<int> nums;
  for (int i = 2; i <= a; ++i) nums.push_back(i);
  for (int i = 2; i <= b; ++i) nums.push_back(i);
  std::size_t j = 0;
  for (int i = 2; i <= n; ++i) {
    v /= i;
    if (j < nums.size()) v *= nums[j++];
  }
  while (j < nums.size()) v *= nums[j++];
  return v;
}

namespace {

TetQuadrature build_tet_rule(int degree) {
  const int n = (degree + 2) / 2;  // 2n-1 >= degree
  std::vector<double> x1, w1, x2, w2, x3, w3;
  gauss_jacobi_01(n, 2.0, x1, w1);
  gauss_jacobi_01(n, 1.0, x2, w2);
  gauss_jacobi_01(n, 0.0, x3, w3);
  TetQuadrature q;
  q.degree = degree;
  q.points.reserve(n * n * n);
  q.weights.reserve(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double x = x1[i];
        const double y = x2[j] * (1.0 - x1[i]);
        const double z = x3[k] * (1.0 - x1[i]) * (1.0 - x2[j]);
        q.points.push_back({x, y, z});
        q.weights.push_back(w1[i] * w2[j] * w3[k]);
      }
  return q;
}

TriQuadrature build_tri_rule(int degree) {
  const int n = (degree + 2) / 2;
  std::vector<double> x1, w1, x2, w2;
  gauss_jacobi_01(n, 1.0, x1, w1);
  gauss_jacobi_01(n, 0.0, x2, w2);
  TriQuadrature q;
  q.degree = degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = x1[i];
      const double v = x2[j] * (1.0 - x1[i]);
      q.points.push_back({u, v});
      q.weights.push_back(w1[i] * w2[j]);
    }
  return q;
}

void verify_tet_rule(const TetQuadrature& q) {
  for (int a = 0; a + 0 <= q.degree; ++a)
    for (int b = 0; a + b <= q.degree; ++b)
      for (int c = 0; a + b + c <= q.degree; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.points.size(); ++i) {
          const Vec3& p = q.points[i];
          s += q.weights[i] * std::pow(p.x, a) * std::pow(p.y, b) * std::pow(p.z, c);
        }
        const double exact = tet_monomial_integral(a, b, c);
        if (std::abs(s - exact) > 1e-13 * std::max(1.0, std::abs(exact)) + 1e-16)
          throw NumericalFailure("tet quadrature failed monomial verification");
      }
  for (double w : q.weights)
    if (w <= 0.0) throw NumericalFailure("tet quadrature weight not positive");
}

void verify_tri_rule(const TriQuadrature& q) {
  for (int a = 0; a <= q.degree; ++a)
    for (int b = 0; a + b <= q.degree; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < q.points.size(); ++i)
        s += q.weights[i] * std::pow(q.points[i][0], a) * std::pow(q.points[i][1], b);
      const double exact = tri_monomial_integral(a, b);
      if (std::abs(s - exact) > 1e-13 * std::max(1.0, std::abs(exact)) + 1e-16)
        throw NumericalFailure("triangle quadrature failed monomial verification");
    }
  for (double w : q.weights)
    if (w <= 0.0) throw NumericalFailure("triangle quadrature weight not positive");
}

std::mutex cache_mutex;

}  // namespace

const TetQuadrature& tet_quadrature(int degree) {
  if (degree < 0) throw InvalidInput("tet_quadrature: degree must be >= 0");
  static std::map<int, TetQuadrature> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) {
    TetQuadrature q = build_tet_rule(degree);
    verify_tet_rule(q);
    it = cache.emplace(degree, std::move(q)).first;
  }
  return it->second;
}

const TriQuadrature& tri_quadrature(int degree) {
  if (degree < 0) throw InvalidInput("tri_quadrature: degree must be >= 0");
  static std::map<int, TriQuadrature> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) {
    TriQuadrature q = build_tri_rule(degree);
    verify_tri_rule(q);
    it = cache.emplace(degree, std::move(q)).first;
  }
  return it->second;
}

}  // namespace ksafem
