// SPDX-License-Identifier: Apache-2.0

#include "ksafem/afem.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>

#include "ksafem/error.hpp"

namespace ksafem {

bool AfemConfig::validate() const {
  if (theta <= 0.0 || theta >= 1.0) return false;
  if (max_fraction <= 0.0 || max_fraction > 1.0) return false;
  if (eta2_tol < 0.0 || ndof_max < 1 || max_outer_iters < 1) return false;
  if (degree != 1 && degree != 2) return false;
  return true;
}

Alignment align_orbitals(const OrbitalSet& a, const OrbitalSet& b) {
  if (a.space.get() != b.space.get())
    throw InvalidInput("align_orbitals: orbital sets live on different spaces");
  if (a.n_orbitals() != b.n_orbitals())
    throw InvalidInput("align_orbitals: orbital counts differ");
  const FeSpace& space = *a.space;
  const int n = a.n_orbitals();

  const SparseSym mass = assemble_mass(space);
  const SparseSym kin = assemble_kinetic(space);

  // U maximizing tr(U^T Phi_a^T M Phi_b): polar factor of the M-Gram matrix
  const Eigen::MatrixXd G = a.C.transpose() * (mass.mat * b.C);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Alignment out;
  out.rank_deficient =
      svd.singularValues().minCoeff() < 1e-12 * std::max(svd.singularValues().maxCoeff(), 1e-300);
  out.U = svd.matrixU() * svd.matrixV().transpose();

  const Eigen::MatrixXd diff = a.C * out.U - b.C;
  double dist_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd d = diff.col(i);
    dist_sq += d.dot(mass.mat * d) + 2.0 * d.dot(kin.mat * d);  // ||.||_0^2 + ||grad .||_0^2
  }
  out.distance = std::sqrt(std::max(dist_sq, 0.0));
  return out;
}

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidInput("fit_loglog_slope: need at least two points");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw InvalidInput("fit_loglog_slope: nonpositive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  SlopeFit fit;
  fit.points = n;
  const double denom = n * sxx - sx * sx;
  fit.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = std::log(y[i]) - (fit.slope * std::log(x[i]) + intercept);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

ComplexityCurve complexity_curve(const ConvergenceRecord& record, int window) {
  const int n = static_cast<int>(record.rows.size());
  if (n < 4) throw InvalidInput("complexity_curve: need at least 4 iterations");
  const int w = window > 0 ? std::min(window, n) : (n + 1) / 2;
  std::vector<double> ndof, tets, eta;
  const double t0 = record.rows.front().n_tets;
  for (int i = n - w; i < n; ++i) {
    const auto& r = record.rows[i];
    if (r.eta2 <= 0.0) continue;
    ndof.push_back(r.ndof);
    eta.push_back(std::sqrt(r.eta2));
    tets.push_back(std::max(1.0, r.n_tets - t0));
  }
  ComplexityCurve out;
  out.vs_ndof = fit_loglog_slope(ndof, eta);
  out.vs_tets = fit_loglog_slope(tets, eta);
  return out;
}

ConvergenceRecord run_ks_afem(std::shared_ptr<const TetMesh> mesh0,
                              const KohnShamModel& model, const AfemConfig& config,
                              const AfemObserver& observer) {
  if (!config.validate()) throw InvalidInput("run_ks_afem: invalid configuration");
  model.validate();

  ConvergenceRecord record;
  std::shared_ptr<const TetMesh> mesh = std::move(mesh0);
  std::shared_ptr<FeSpace> space = make_space(mesh, config.degree);
  Eigen::MatrixXd warm;          // transferred orbitals for the next solve
  bool have_warm = false;
  OrbitalSet previous_on_current;  // previous iterate transferred, for align

  const auto t_start = std::chrono::steady_clock::now();
  for (int k = 0; k < config.max_outer_iters; ++k) {
    ConvergenceRow row;
    row.iter = k;
    row.ndof = space->ndof();
    row.n_tets = mesh->n_tets();

    std::string stage = "solve";
    try {
      ScfResult scf = scf_solve(space, model, config.scf, have_warm ? &warm : nullptr);
      row.scf_iters = scf.report.iterations;
      row.eig_residual = scf.report.history.back().eigen_residual;
      row.energy = scf.report.history.back().energy;

      if (have_warm) {
        previous_on_current.space = space;
        previous_on_current.C = warm;
        row.align_dist = align_orbitals(previous_on_current, scf.orbitals).distance;
      }

      stage = "estimate";
      AssemblyOptions aopts;
      aopts.hartree_path = config.scf.hartree_path;
      aopts.exec = config.scf.exec;
      const IndicatorField ind =
          ks_indicators(*space, model, scf.orbitals, &scf.parts, aopts);
      row.eta2 = ind.total_eta2();
      row.osc2 = ind.total_osc2();
      row.mu = scf.orbitals.mu;
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
              .count();
      record.rows.push_back(row);
      if (observer)
        observer(row, *mesh, *space, scf.orbitals, ind,
                 scf.parts.hartree ? &*scf.parts.hartree : nullptr);

      if (row.eta2 <= config.eta2_tol) {
        record.stop_reason = "eta_tol";
        return record;
      }
      if (row.ndof >= config.ndof_max) {
        record.stop_reason = "ndof_max";
        return record;
      }
      if (k + 1 == config.max_outer_iters) break;

      stage = "mark";
      const MarkedSet marked = config.strategy == MarkStrategy::Dorfler
                                   ? mark_dorfler(ind.eta2, config.theta)
                                   : mark_maximum(ind.eta2, config.max_fraction);
      if (marked.elements.empty()) {
        record.stop_reason = "eta_tol";
        return record;
      }

      stage = "refine";
      auto next_mesh = std::make_shared<TetMesh>(refine(*mesh, marked.elements));
      auto next_space = make_space(next_mesh, config.degree);

      stage = "transfer";
      warm.resize(next_space->ndof(), model.n_orbitals);
      for (int i = 0; i < model.n_orbitals; ++i)
        warm.col(i) = transfer(*space, *next_space, scf.orbitals.C.col(i));
      have_warm = true;

      mesh = next_mesh;
      space = next_space;
    } catch (const std::exception& e) {
      record.stop_reason = stage + ": " + e.what();
      record.clean = false;
      return record;
    }
  }
  record.stop_reason = "max_iters";
  return record;
}

}  // namespace ksafem
