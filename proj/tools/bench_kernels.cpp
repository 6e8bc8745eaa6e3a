// SPDX-License-Identifier: Apache-2.0

// Timings of the hot kernels, serial reference vs OpenMP, on a uniform
// refinement ladder. The OpenMP paths are bitwise identical to the serial
// ones (per-element map + in-order reduce), which is also asserted here.

#include <chrono>
#include <cstdio>
#include <memory>

#include "ksafem/assembly.hpp"
#include "ksafem/estimator.hpp"
#include "ksafem/hartree.hpp"
#include "ksafem/model.hpp"
#include "ksafem/parallel.hpp"

using namespace ksafem;

namespace {

template <class Fn>
double time_of(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 8;
  const Box box{{-4, -4, -4}, {4, 4, 4}};
  auto mesh = std::make_shared<TetMesh>(build_box_mesh(box, n));
  auto space = make_space(mesh, 2);

  KohnShamModel model;
  model.domain_box = box;
  model.n_orbitals = 2;
  model.gaussian_wells.push_back({-3.0, 1.2, {0.3, 0.1, -0.2}});
  model.xc = make_xc_xalpha(0.7);
  model.xc_alpha = 0.7;

  std::printf("mesh: %d tets, space: %d dofs, threads: %d\n", mesh->n_tets(),
              space->ndof(), max_threads());

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(space->ndof(), model.n_orbitals);
  for (int i = 0; i < space->ndof(); ++i) {
    C(i, 0) = std::sin(0.01 * i + 0.3);
    C(i, 1) = std::cos(0.017 * i);
  }
  const DensityField rho = density(*space, C);

  // potential assembly
  HartreeField vh;
  vh.method = "none";
  vh.node_values = Eigen::VectorXd::Zero(space->n_nodes());
  const double t_pot_s = time_of([&] {
    auto v = potential_quad_values(*space, model, rho, nullptr, Exec::Serial);
    (void)assemble_potential(*space, v, Exec::Serial);
  });
  Eigen::MatrixXd v_serial = potential_quad_values(*space, model, rho, nullptr, Exec::Serial);
  SparseSym B_serial = assemble_potential(*space, v_serial, Exec::Serial);
  SparseSym B_parallel;
  const double t_pot_p = time_of([&] {
    auto v = potential_quad_values(*space, model, rho, nullptr, Exec::Parallel);
    B_parallel = assemble_potential(*space, v, Exec::Parallel);
  });
  Eigen::SparseMatrix<double, Eigen::RowMajor> diff = B_serial.mat - B_parallel.mat;
  std::printf("potential assembly: serial %.3fs, omp %.3fs, speedup %.2fx, bitwise %s\n",
              t_pot_s, t_pot_p, t_pot_s / t_pot_p,
              diff.coeffs().size() == 0 || diff.coeffs().cwiseAbs().maxCoeff() == 0.0
                  ? "yes"
                  : "NO");

  // stiffness
  const double t_kin_s = time_of([&] { (void)assemble_kinetic(*space, Exec::Serial); });
  const double t_kin_p = time_of([&] { (void)assemble_kinetic(*space, Exec::Parallel); });
  std::printf("kinetic assembly: serial %.3fs, omp %.3fs, speedup %.2fx\n", t_kin_s,
              t_kin_p, t_kin_s / t_kin_p);

  // indicators
  OrbitalSet phi;
  phi.space = space;
  phi.C = C;
  phi.mu = Eigen::VectorXd::Zero(2);
  phi.Lambda = Eigen::MatrixXd::Zero(2, 2);
  phi.rho = rho;
  AssemblyOptions serial_opts;
  serial_opts.exec = Exec::Serial;
  AssemblyOptions parallel_opts;
  parallel_opts.exec = Exec::Parallel;
  HamiltonianParts parts = assemble_parts(*space, model, rho, parallel_opts);
  const double t_est_s =
      time_of([&] { (void)ks_indicators(*space, model, phi, &parts, serial_opts); });
  IndicatorField ind_s = ks_indicators(*space, model, phi, &parts, serial_opts);
  IndicatorField ind_p;
  const double t_est_p =
      time_of([&] { ind_p = ks_indicators(*space, model, phi, &parts, parallel_opts); });
  std::printf("indicators: serial %.3fs, omp %.3fs, speedup %.2fx, bitwise %s\n", t_est_s,
              t_est_p, t_est_s / t_est_p,
              (ind_s.eta2 - ind_p.eta2).cwiseAbs().maxCoeff() == 0.0 ? "yes" : "NO");

  // direct Hartree on a smaller mesh (oracle-sized)
  auto mesh_small = std::make_shared<TetMesh>(build_box_mesh(box, std::min(n, 5)));
  auto space_small = make_space(mesh_small, 2);
  Eigen::MatrixXd Cs = Eigen::MatrixXd::Zero(space_small->ndof(), 1);
  for (int i = 0; i < space_small->ndof(); ++i) Cs(i, 0) = std::exp(-0.001 * i);
  const DensityField rho_small = density(*space_small, Cs);
  const double t_h_s =
      time_of([&] { (void)hartree_direct(*space_small, rho_small, Exec::Serial); });
  const double t_h_p =
      time_of([&] { (void)hartree_direct(*space_small, rho_small, Exec::Parallel); });
  std::printf("direct hartree (%d tets): serial %.3fs, omp %.3fs, speedup %.2fx\n",
              mesh_small->n_tets(), t_h_s, t_h_p, t_h_s / t_h_p);
  return 0;
}
