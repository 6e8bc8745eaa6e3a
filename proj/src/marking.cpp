// SPDX-License-Identifier: Apache-2.0

#include "ksafem/marking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ksafem/error.hpp"

namespace ksafem {

MarkedSet mark_dorfler(const Eigen::VectorXd& eta2, double theta) {
  if (theta <= 0.0 || theta >= 1.0)
    throw InvalidInput("mark_dorfler: theta must lie in (0,1)");
  MarkedSet out;
  out.strategy = "dorfler";
  const double total = eta2.sum();
  if (total <= 0.0) {
    out.all_zero = true;
    return out;
  }
  std::vector<std::int32_t> order(eta2.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (eta2(a) != eta2(b)) return eta2(a) > eta2(b);
    return a < b;
  });
  double acc = 0.0;
  for (std::int32_t t : order) {
    out.elements.push_back(t);
    acc += eta2(t);
    if (acc >= theta * total) break;
  }
  std::sort(out.elements.begin(), out.elements.end());
  out.achieved_fraction = acc / total;
  return out;
}

MarkedSet mark_maximum(const Eigen::VectorXd& eta2, double fraction) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw InvalidInput("mark_maximum: fraction must lie in (0,1]");
  MarkedSet out;
  out.strategy = "maximum";
  const double max_eta2 = eta2.size() > 0 ? eta2.maxCoeff() : 0.0;
  if (max_eta2 <= 0.0) {
    out.all_zero = true;
    return out;
  }
  // eta_tau >= fraction * eta_max, i.e. eta2 >= fraction^2 * eta2_max
  const double cut = fraction * fraction * max_eta2;
  double acc = 0.0;
  for (std::int32_t t = 0; t < eta2.size(); ++t)
    if (eta2(t) >= cut) {
      out.elements.push_back(t);
      acc += eta2(t);
    }
  out.achieved_fraction = acc / eta2.sum();
  return out;
}

}  // namespace ksafem
