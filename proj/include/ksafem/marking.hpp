// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace ksafem {

struct MarkedSet {
  std::vector<std::int32_t> elements;
  std::string strategy;
  double achieved_fraction = 0.0;  // sum_M eta^2 / sum_T eta^2
  bool all_zero = false;           // indicators were identically zero
};

/// Doerfler (bulk) marking: minimal subset carrying at least theta of the
/// total squared estimator. Descending sort with index tie-break, greedy
/// prefix; the prefix of the sorted order is cardinality minimal.
MarkedSet mark_dorfler(const Eigen::VectorXd& eta2, double theta);

/// Maximum strategy: every tau with eta_tau >= fraction * max eta.
MarkedSet mark_maximum(const Eigen::VectorXd& eta2, double fraction);

}  // namespace ksafem
