// SPDX-License-Identifier: Apache-2.0

#include "ksafem/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "ksafem/linear_bvp.hpp"
#include "ksafem/vtk.hpp"

namespace ksafem {

namespace {

constexpr const char* kCsvHeader =
    "iter,ndof,nelem,energy,eta2,osc2,scf_iters,eig_resid,align_dist,wall_s\n";

void write_csv_row(FILE* f, const ConvergenceRow& r) {
  std::fprintf(f, "%d,%d,%d,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n", r.iter, r.ndof,
               r.n_tets, r.energy, r.eta2, r.osc2, r.scf_iters, r.eig_residual,
               r.align_dist, r.wall_seconds);
  std::fflush(f);
}

std::string frame_name(const char* stem, int iter) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.vtk", stem, iter);
  return buf;
}

RunOutcome run_linear(const RunConfig& cfg, const std::filesystem::path& dir) {
  RunOutcome out;
  out.output_dir = dir.string();
  const LinearProblem problem = make_linear_problem(cfg.linear_problem, cfg.box);
  auto mesh0 = std::make_shared<TetMesh>(build_box_mesh(cfg.box, cfg.mesh_n));

  FILE* csv = std::fopen((dir / "convergence.csv").string().c_str(), "w");
  if (!csv) return {3, "io: cannot open convergence.csv", out.output_dir};
  std::fputs(kCsvHeader, csv);

  LinearAfemResult result;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    result = afem_linear(mesh0, cfg.degree, problem, cfg.afem.theta,
                         cfg.afem.max_outer_iters);
  } catch (const std::exception& e) {
    std::fclose(csv);
    return {3, std::string("solve: ") + e.what(), out.output_dir};
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& rec : result.records) {
    ConvergenceRow row;
    row.iter = rec.iter;
    row.ndof = rec.ndof;
    row.n_tets = rec.n_tets;
    row.energy = rec.energy;
    row.eta2 = rec.eta2;
    row.osc2 = rec.osc2;
    row.scf_iters = 1;
    row.eig_residual = 0.0;
    row.align_dist = 0.0;
    row.wall_seconds = wall;
    write_csv_row(csv, row);
  }
  std::fclose(csv);

  FILE* summary = std::fopen((dir / "summary.txt").string().c_str(), "w");
  if (!summary) return {3, "io: cannot open summary.txt", out.output_dir};
  std::fprintf(summary, "mode = linear\nproblem = %s\n", cfg.linear_problem.c_str());
  std::fprintf(summary, "gamma_tilde = %.17g\n", result.gamma_tilde);
  std::fprintf(summary, "iterations = %zu\n", result.records.size());
  if (result.records.size() >= 2 && problem.has_exact()) {
    std::fprintf(summary, "quasi_error_contraction_ratios =");
    bool all_below_one = true;
    for (std::size_t i = 1; i < result.records.size(); ++i) {
      const double ratio =
          result.records[i].quasi_error / result.records[i - 1].quasi_error;
      all_below_one = all_below_one && ratio < 1.0;
      std::fprintf(summary, " %.17g", ratio);
    }
    std::fprintf(summary, "\nall_ratios_below_one = %s\n",
                 all_below_one ? "yes" : "no");
    double eff_lo = 1e300, eff_hi = 0.0;
    for (const auto& rec : result.records) {
      eff_lo = std::min(eff_lo, rec.effectivity);
      eff_hi = std::max(eff_hi, rec.effectivity);
    }
    std::fprintf(summary, "effectivity_range = [%.17g, %.17g]\n", eff_lo, eff_hi);
  }
  if (result.records.size() >= 4) {
    std::vector<double> ndof, eta;
    for (std::size_t i = result.records.size() / 2; i < result.records.size(); ++i)
      if (result.records[i].eta2 > 0.0) {
        ndof.push_back(result.records[i].ndof);
        eta.push_back(std::sqrt(result.records[i].eta2));
      }
    if (ndof.size() >= 2) {
      const SlopeFit fit = fit_loglog_slope(ndof, eta);
      std::fprintf(summary, "eta_vs_ndof_slope = %.17g\nfit_residual = %.17g\n",
                   fit.slope, fit.residual);
    }
  }
  std::fclose(summary);

  if (cfg.write_vtk && result.final_mesh)
    write_vtk((dir / "mesh_final.vtk").string(), *result.final_mesh);
  return out;
}

}  // namespace

RunOutcome run(const RunConfig& cfg, const RunOverrides& overrides) {
  RunConfig config = cfg;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.seed) {
    config.seed = *overrides.seed;
    config.afem.scf.seed = *overrides.seed;
  }

  std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return {3, "io: cannot create output directory", config.output_dir};

  if (config.mode == RunMode::Linear) return run_linear(config, dir);

  RunOutcome out;
  out.output_dir = config.output_dir;
  auto mesh0 = std::make_shared<TetMesh>(build_box_mesh(config.box, config.mesh_n));

  FILE* csv = std::fopen((dir / "convergence.csv").string().c_str(), "w");
  if (!csv) return {3, "io: cannot open convergence.csv", out.output_dir};
  std::fputs(kCsvHeader, csv);

  AfemObserver observer = [&](const ConvergenceRow& row, const TetMesh& mesh,
                              const FeSpace& space, const OrbitalSet& phi,
                              const IndicatorField& ind, const HartreeField* vh) {
    write_csv_row(csv, row);
    if (config.write_vtk) {
      write_vtk((dir / frame_name("mesh", row.iter)).string(), mesh);
      // vertex fields: density, and the Hartree potential when present
      const Eigen::VectorXd rho_nodal = space.full_from_dofs(phi.rho.coeffs);
      std::vector<std::pair<std::string, Eigen::VectorXd>> point_data = {
          {"rho", rho_nodal.head(mesh.n_vertices())}};
      if (vh)
        point_data.push_back({"v_hartree", vh->node_values.head(mesh.n_vertices())});
      write_vtk((dir / frame_name("density", row.iter)).string(), mesh, point_data);
      write_vtk((dir / frame_name("indicators", row.iter)).string(), mesh, {},
                {{"eta2", ind.eta2}});
    }
  };

  ConvergenceRecord record = run_ks_afem(mesh0, config.model, config.afem, observer);
  std::fclose(csv);

  FILE* summary = std::fopen((dir / "summary.txt").string().c_str(), "w");
  if (!summary) return {3, "io: cannot open summary.txt", out.output_dir};
  std::fprintf(summary, "mode = ks\nstop_reason = %s\n", record.stop_reason.c_str());
  std::fprintf(summary, "hartree_path = %s\n",
               config.hartree_path == HartreePath::Poisson ? "poisson" : "direct");
  std::fprintf(summary, "iterations = %zu\n", record.rows.size());
  if (!record.rows.empty()) {
    std::fprintf(summary, "final_energy = %.17g\n", record.rows.back().energy);
    std::fprintf(summary, "final_eta2 = %.17g\n", record.rows.back().eta2);
    std::fprintf(summary, "final_ndof = %d\n", record.rows.back().ndof);
    if (record.rows.back().mu.size() > 0) {
      std::fprintf(summary, "final_mu =");
      for (Eigen::Index i = 0; i < record.rows.back().mu.size(); ++i)
        std::fprintf(summary, " %.17g", record.rows.back().mu(i));
      std::fprintf(summary, "\n");
    }
  }
  if (record.rows.size() >= 4) {
    try {
      const ComplexityCurve curve = complexity_curve(record);
      std::fprintf(summary, "eta_vs_ndof_slope = %.17g\n", curve.vs_ndof.slope);
      std::fprintf(summary, "eta_vs_tets_slope = %.17g\n", curve.vs_tets.slope);
      std::fprintf(summary, "fit_residual = %.17g\n", curve.vs_ndof.residual);
    } catch (const std::exception&) {
      // too few usable points; slopes omitted
    }
  }
  std::fclose(summary);

  if (!record.clean) return {3, record.stop_reason, out.output_dir};
  return out;
}

RunOutcome run_config_text(const std::string& text, const RunOverrides& overrides) {
  RunConfig config;
  try {
    config = parse_config(text);
  } catch (const std::exception& e) {
    return {2, std::string("config: ") + e.what(), ""};
  }
  return run(config, overrides);
}

}  // namespace ksafem
