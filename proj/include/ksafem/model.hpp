// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ksafem/geometry.hpp"
#include "ksafem/space.hpp"

namespace ksafem {

// rho is clamped at this floor before fractional powers.
inline constexpr double kRhoFloor = 1e-14;

/// Exchange-correlation closure: energy density e(t) with its first two
/// derivatives (one-sided at t = 0). Shipped: the X_alpha family
/// e(t) = -c_x * alpha * t^(4/3), c_x = (3/4)(3/pi)^(1/3); the triple
/// interface admits other local functionals.
struct XcFunctional {
  std::string name;  // "none" | "x_alpha"
  std::function<double(double)> e;
  std::function<double(double)> e1;
  std::function<double(double)> e2;

  bool enabled() const { return name != "none"; }
};

XcFunctional make_xc_none();
XcFunctional make_xc_xalpha(double alpha);

struct CoulombWell {
  double charge;  // Z > 0 enters as -Z/|x-R|
  Vec3 center;
};

struct GaussianWell {
  double depth;  // signed; wells are negative
  double width;
  Vec3 center;
};

struct GaussianProjector {
  double amplitude;
  double width;
  Vec3 center;
};

struct KohnShamModel {
  int n_orbitals = 1;
  std::vector<CoulombWell> coulomb_wells;
  std::vector<GaussianWell> gaussian_wells;
  std::vector<GaussianProjector> projectors;
  XcFunctional xc = make_xc_none();
  double xc_alpha = 0.0;
  bool hartree = false;
  Box domain_box;

  int n_projectors() const { return static_cast<int>(projectors.size()); }
  bool density_dependent() const { return hartree || xc.enabled(); }

  /// Throws InvalidInput when the static invariants fail (N >= 1, widths
  /// positive, alpha in (0, 1.5], singular centers inside the box).
  void validate() const;

  double projector_value(int j, const Vec3& x) const;
};

double eval_vloc(const KohnShamModel& model, const Vec3& x);
Eigen::VectorXd eval_vloc(const KohnShamModel& model, const std::vector<Vec3>& points);

/// Weak action of the nonlocal part on a coefficient vector: returns
/// y = P (P^T c) in dual coefficients together with the energy
/// contribution sum_j (phi, zeta_j)^2. P is the (ndof x n_proj) matrix of
/// projector inner products, assembled with the potential-order rule.
struct VnlAction {
  Eigen::VectorXd image;
  double energy = 0.0;
};
VnlAction apply_vnl(const KohnShamModel& model, const FeSpace& space,
                    const Eigen::VectorXd& coeffs);

/// Projector inner-product factor P[a, j] = (phi_a, zeta_j).
Eigen::MatrixXd projector_factor(const KohnShamModel& model, const FeSpace& space);

/// Evaluate (e_xc(rho), e_xc'(rho)) on an array of densities. Densities
/// below -1e-12 violate the contract; smaller negatives are clamped.
void xc_eval(const XcFunctional& xc, const Eigen::ArrayXd& rho,
             Eigen::ArrayXd& e, Eigen::ArrayXd& e1);

/// Check |e'(t)| + |t e''(t)| <= c (1 + t^p) on the sample grid, with c
/// calibrated on the lower half of the grid. Returns the first witness of
/// failure, or nullopt when the bound holds.
std::optional<double> check_growth(const XcFunctional& xc, double p,
                                   const std::vector<double>& samples);

/// Quadrature check that v_loc is square integrable on the given mesh.
double vloc_l2_on_mesh(const KohnShamModel& model, const FeSpace& space);

}  // namespace ksafem
