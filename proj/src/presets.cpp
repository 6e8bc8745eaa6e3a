// SPDX-License-Identifier: Apache-2.0

#include "ksafem/presets.hpp"

#include "ksafem/error.hpp"

namespace ksafem {

namespace {

std::vector<Preset> build_presets() {
  std::vector<Preset> out;

  out.push_back(
      {"linear_manufactured",
       "Appendix-style linear harness: manufactured sine solution on the unit cube",
       R"(# linear AFEM harness with a known exact solution
[domain]
box_lo = 0 0 0
box_hi = 1 1 1

[mesh]
n = 2
degree = 2

[afem]
mode = linear
strategy = dorfler
theta = 0.5
max_iters = 10

[linear]
problem = sin_manufactured

[output]
dir = out_linear_manufactured
seed = 20240501
)",
       std::nullopt, 0.0});

  out.push_back(
      {"laplace_eigs_cube",
       "Dirichlet Laplacian spectrum on the unit cube, lowest four eigenpairs",
       R"(# analytic spectrum check: mu_1 -> 3 pi^2 / 2, next three -> 3 pi^2
[domain]
box_lo = 0 0 0
box_hi = 1 1 1

[mesh]
n = 2
degree = 2

[model]
n_orbitals = 4
hartree = off
xc = none

[afem]
mode = ks
strategy = dorfler
theta = 0.5
max_iters = 20
ndof_max = 60000

[eig]
tol = 1e-9

[output]
dir = out_laplace_eigs_cube
seed = 20240501
)",
       std::nullopt, 0.0});

  out.push_back(
      {"gaussian_well_n1",
       "One orbital in a Gaussian well with Hartree and X_alpha switched on",
       R"(# nonlinear ground state at toy scale
[domain]
box_lo = -7 -7 -7
box_hi = 7 7 7

[mesh]
n = 3
degree = 2

[model]
n_orbitals = 1
hartree = on
xc = x_alpha
xc_alpha = 0.7
well1 = gaussian -3.0 2.0 0.1 0.1 0.1

[afem]
mode = ks
strategy = dorfler
theta = 0.5
max_iters = 18
ndof_max = 5000

[scf]
tol = 1e-8
mix_beta = 0.5

[hartree]
path = poisson

[output]
dir = out_gaussian_well_n1
seed = 20240501
)",
       std::nullopt, 0.0});

  // The nucleus sits off the quadrature lattice: offset by h0 sqrt(2)/16
  // from the box center (h0 = 4 on the 5-cell initial mesh).
  out.push_back(
      {"hydrogen_coulomb",
       "Hydrogen-like Coulomb well, V = -1/r on [-10,10]^3",
       R"(# hydrogen ground state; analytic reference -0.5 hartree
[domain]
box_lo = -10 -10 -10
box_hi = 10 10 10

[mesh]
n = 5
degree = 2

[model]
n_orbitals = 1
hartree = off
xc = none
well1 = coulomb 1.0 0.35355339059327373 0.35355339059327373 0.35355339059327373

[afem]
mode = ks
strategy = dorfler
theta = 0.5
max_iters = 26
ndof_max = 200000

[eig]
tol = 1e-8

[output]
dir = out_hydrogen_coulomb
seed = 20240501
)",
       -0.5, 0.02});

  out.push_back(
      {"two_orbital_toy",
       "Two orbitals over two Gaussian wells, Hartree and X_alpha on",
       R"(# smallest genuinely multi-orbital nonlinear case
[domain]
box_lo = -8 -8 -8
box_hi = 8 8 8

[mesh]
n = 3
degree = 2

[model]
n_orbitals = 2
hartree = on
xc = x_alpha
xc_alpha = 0.7
well1 = gaussian -3.0 1.2 -1.7 0.1 0.1
well2 = gaussian -3.0 1.2 1.7 -0.1 -0.1

[afem]
mode = ks
strategy = dorfler
theta = 0.5
max_iters = 10
ndof_max = 6000

[scf]
tol = 1e-8
mix_beta = 0.5

[hartree]
path = poisson

[output]
dir = out_two_orbital_toy
seed = 20240501
)",
       std::nullopt, 0.0});

  out.push_back(
      {"nonlocal_demo",
       "One Gaussian projector on top of a Gaussian well",
       R"(# rank-1 nonlocal term demo
[domain]
box_lo = -6 -6 -6
box_hi = 6 6 6

[mesh]
n = 3
degree = 2

[model]
n_orbitals = 1
hartree = off
xc = none
well1 = gaussian -3.0 1.5 0.0 0.0 0.0
projector1 = gaussian 1.5 1.0 0.0 0.0 0.0

[afem]
mode = ks
strategy = dorfler
theta = 0.5
max_iters = 10
ndof_max = 5000

[output]
dir = out_nonlocal_demo
seed = 20240501
)",
       std::nullopt, 0.0});

  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build_presets();
  return all;
}

const Preset& preset(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return p;
  throw InvalidInput("unknown preset: " + name);
}

}  // namespace ksafem
