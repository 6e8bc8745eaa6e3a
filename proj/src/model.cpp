// SPDX-License-Identifier: Apache-2.0

#include "ksafem/model.hpp"

#include <cmath>

#include "ksafem/error.hpp"
#include "ksafem/parallel.hpp"

namespace ksafem {

namespace {
const double kCx = 0.75 * std::cbrt(3.0 / M_PI);  // (3/4)(3/pi)^(1/3)
}

XcFunctional make_xc_none() {
  XcFunctional xc;
  xc.name = "none";
  xc.e = [](double) { return 0.0; };
  xc.e1 = [](double) { return 0.0; };
  xc.e2 = [](double) { return 0.0; };
  return xc;
}

XcFunctional make_xc_xalpha(double alpha) {
  XcFunctional xc;
  xc.name = "x_alpha";
  const double c = kCx * alpha;
  xc.e = [c](double t) {
    t = std::max(t, 0.0);
    return -c * std::pow(t, 4.0 / 3.0);
  };
  xc.e1 = [c](double t) {
    t = std::max(t, kRhoFloor);
    return -(4.0 / 3.0) * c * std::cbrt(t);
  };
  xc.e2 = [c](double t) {
    t = std::max(t, kRhoFloor);
    return -(4.0 / 9.0) * c * std::pow(t, -2.0 / 3.0);
  };
  return xc;
}

void KohnShamModel::validate() const {
  if (n_orbitals < 1) throw InvalidInput("model: n_orbitals must be >= 1");
  if (!domain_box.nondegenerate()) throw InvalidInput("model: degenerate domain box");
  for (const auto& w : gaussian_wells)
    if (w.width <= 0.0) throw InvalidInput("model: gaussian well width must be > 0");
  for (const auto& p : projectors)
    if (p.width <= 0.0) throw InvalidInput("model: projector width must be > 0");
  if (xc.name == "x_alpha" && (xc_alpha <= 0.0 || xc_alpha > 1.5))
    throw InvalidInput("model: xc alpha must lie in (0, 1.5]");
  for (const auto& w : coulomb_wells)
    if (!domain_box.contains(w.center))
      throw InvalidInput("model: coulomb center outside the domain box");
}

double KohnShamModel::projector_value(int j, const Vec3& x) const {
  const auto& p = projectors[j];
  const Vec3 r = x - p.center;
  return p.amplitude * std::exp(-dot(r, r) / (2.0 * p.width * p.width));
}

double eval_vloc(const KohnShamModel& model, const Vec3& x) {
  double v = 0.0;
  const double r_min = 1e-8 * model.domain_box.diameter();
  for (const auto& w : model.coulomb_wells) {
    const double r = std::max(norm(x - w.center), r_min);
    v -= w.charge / r;
  }
  for (const auto& w : model.gaussian_wells) {
    const Vec3 d = x - w.center;
    v += w.depth * std::exp(-dot(d, d) / (2.0 * w.width * w.width));
  }
  return v;
}

Eigen::VectorXd eval_vloc(const KohnShamModel& model, const std::vector<Vec3>& points) {
  Eigen::VectorXd v(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) v(i) = eval_vloc(model, points[i]);
  return v;
}

Eigen::MatrixXd projector_factor(const KohnShamModel& model, const FeSpace& space) {
  const int np = model.n_projectors();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(space.ndof(), np);
  if (np == 0) return P;
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const Eigen::MatrixXd N = space.basis_values(q);
  const TetMesh& mesh = space.mesh();
  const int npe = space.nodes_per_elem();

  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const double jac = 6.0 * mesh.volume(t);
    const auto& en = space.element_nodes(t);
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const Vec3 x = space.from_reference(t, q.points[iq]);
      const double w = q.weights[iq] * jac;
      for (int j = 0; j < np; ++j) {
        const double zeta = model.projector_value(j, x);
        if (zeta == 0.0) continue;
        for (int a = 0; a < npe; ++a) {
          const int dof = space.node_dof(en[a]);
          if (dof >= 0) P(dof, j) += w * zeta * N(iq, a);
        }
      }
    }
  }
  return P;
}

VnlAction apply_vnl(const KohnShamModel& model, const FeSpace& space,
                    const Eigen::VectorXd& coeffs) {
  VnlAction out;
  out.image = Eigen::VectorXd::Zero(space.ndof());
  if (model.n_projectors() == 0) return out;
  const Eigen::MatrixXd P = projector_factor(model, space);
  const Eigen::VectorXd inner = P.transpose() * coeffs;  // (phi, zeta_j)
  out.image = P * inner;
  out.energy = inner.squaredNorm();
  return out;
}

void xc_eval(const XcFunctional& xc, const Eigen::ArrayXd& rho,
             Eigen::ArrayXd& e, Eigen::ArrayXd& e1) {
  e.resize(rho.size());
  e1.resize(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (rho(i) < -1e-12)
      throw ContractViolation("xc_eval: negative density beyond tolerance");
    const double t = std::max(rho(i), 0.0);
    e(i) = t <= kRhoFloor ? 0.0 : xc.e(t);
    e1(i) = t <= kRhoFloor ? 0.0 : xc.e1(t);
  }
}

std::optional<double> check_growth(const XcFunctional& xc, double p,
                                   const std::vector<double>& samples) {
  if (samples.empty()) return std::nullopt;
  auto ratio = [&](double t) {
    const double g = std::abs(xc.e1(t)) + std::abs(t * xc.e2(t));
    return g / (1.0 + std::pow(std::max(t, 0.0), p));
  };
  // A finite grid cannot certify a constant c outright; what it can detect
  // is residual power growth of the ratio on the tail of the grid. Bounded
  // ratios flatten (log-log tail slope -> 0), violations keep a positive
  // exponent.
  std::vector<double> t_tail, r_tail;
  const std::size_t start = samples.size() - std::max<std::size_t>(2, samples.size() / 4);
  double worst_t = samples.back();
  double worst_r = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = samples[i];
    const double r = ratio(t);
    if (!std::isfinite(r)) return t;
    if (i >= start && t > 0.0 && r > 0.0) {
      t_tail.push_back(std::log(t));
      r_tail.push_back(std::log(r));
      if (r > worst_r) {
        worst_r = r;
        worst_t = t;
      }
    }
  }
  if (t_tail.size() < 2 || worst_r <= 1e-12) return std::nullopt;
  const int n = static_cast<int>(t_tail.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += t_tail[i];
    sy += r_tail[i];
    sxx += t_tail[i] * t_tail[i];
    sxy += t_tail[i] * r_tail[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  if (slope > 0.05) return worst_t;
  return std::nullopt;
}

double vloc_l2_on_mesh(const KohnShamModel& model, const FeSpace& space) {
  const TetQuadrature& q = tet_quadrature(space.quad_degree_potential());
  const TetMesh& mesh = space.mesh();
  std::vector<double> per_elem(mesh.n_tets(), 0.0);
  for_each_index(Exec::Parallel, mesh.n_tets(), [&](std::int64_t t) {
    const double jac = 6.0 * mesh.volume(static_cast<std::int32_t>(t));
    double s = 0.0;
    for (std::size_t iq = 0; iq < q.points.size(); ++iq) {
      const double v = eval_vloc(model, space.from_reference(static_cast<std::int32_t>(t), q.points[iq]));
      s += q.weights[iq] * jac * v * v;
    }
    per_elem[t] = s;
  });
  double total = 0.0;
  for (double s : per_elem) total += s;
  if (!std::isfinite(total))
    throw NumericalFailure("v_loc is not square integrable on this mesh");
  return std::sqrt(total);
}

}  // namespace ksafem
