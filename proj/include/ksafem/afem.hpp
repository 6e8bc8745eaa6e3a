// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ksafem/estimator.hpp"
#include "ksafem/marking.hpp"
#include "ksafem/scf.hpp"

namespace ksafem {

enum class MarkStrategy { Dorfler, Maximum };

struct AfemConfig {
  MarkStrategy strategy = MarkStrategy::Dorfler;
  double theta = 0.5;          // Doerfler bulk parameter
  double max_fraction = 0.5;   // Maximum-strategy threshold fraction
  int max_outer_iters = 12;
  double eta2_tol = 0.0;       // stop when eta^2(Omega) <= eta2_tol
  int ndof_max = 200000;
  int degree = 2;
  ScfConfig scf;
  bool validate() const;
};

struct ConvergenceRow {
  int iter = 0;
  int ndof = 0;
  int n_tets = 0;
  double energy = 0.0;
  double eta2 = 0.0;
  double osc2 = 0.0;
  int scf_iters = 0;
  double eig_residual = 0.0;
  double align_dist = 0.0;  // aligned distance to the previous iterate
  double wall_seconds = 0.0;
  Eigen::VectorXd mu;
};

struct ConvergenceRecord {
  std::vector<ConvergenceRow> rows;
  std::string stop_reason;  // "eta_tol" | "ndof_max" | "max_iters" | error stage
  bool clean = true;
};

/// Per-iteration callback; streaming CSV writers hang off this. The
/// Hartree field pointer is null when the model has it switched off.
using AfemObserver = std::function<void(const ConvergenceRow&, const TetMesh&,
                                        const FeSpace&, const OrbitalSet&,
                                        const IndicatorField&, const HartreeField*)>;

/// The Solve -> Estimate -> Mark -> Refine loop for the Kohn-Sham problem,
/// with warm-started SCF via orbital transfer.
ConvergenceRecord run_ks_afem(std::shared_ptr<const TetMesh> mesh0,
                              const KohnShamModel& model, const AfemConfig& config,
                              const AfemObserver& observer = {});

struct Alignment {
  Eigen::MatrixXd U;    // orthogonal, minimizes ||Phi_a U - Phi_b||_M
  double distance = 0.0;  // H1-type norm of the aligned difference
  bool rank_deficient = false;
};

/// Orthogonal Procrustes alignment of two orbital sets on one space.
Alignment align_orbitals(const OrbitalSet& a, const OrbitalSet& b);

struct SlopeFit {
  double slope = 0.0;
  double residual = 0.0;  // rms residual of the least-squares fit
  int points = 0;
};

/// Least-squares slope of log eta vs log ndof and log eta vs
/// log(#T_k - #T_0), over the trailing `window` rows (0: last half).
struct ComplexityCurve {
  SlopeFit vs_ndof;
  SlopeFit vs_tets;
};
ComplexityCurve complexity_curve(const ConvergenceRecord& record, int window = 0);

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ksafem
