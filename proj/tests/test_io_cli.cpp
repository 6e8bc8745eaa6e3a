// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ksafem/presets.hpp"
#include "ksafem/runner.hpp"

using namespace ksafem;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTinyKs = R"(
[domain]
box_lo = -4 -4 -4
box_hi = 4 4 4
[mesh]
n = 2
degree = 2
[model]
n_orbitals = 1
well1 = gaussian -3.0 1.2 0.1 0.0 -0.1
[afem]
max_iters = 3
[output]
dir = /tmp/ksafem_io_test/ks
)";

}  // namespace

TEST_CASE("minimal config parses with documented defaults") {
  const RunConfig cfg = parse_config("[mesh]\nn = 3\n");
  CHECK(cfg.mesh_n == 3);
  CHECK(cfg.degree == 2);
  CHECK(cfg.afem.theta == 0.5);
  CHECK(cfg.afem.scf.tol == 1e-7);
  CHECK(cfg.afem.scf.mix_beta == 0.3);
  CHECK(cfg.mode == RunMode::KohnSham);
  CHECK(cfg.hartree_path == HartreePath::Poisson);
}

TEST_CASE("out-of-range value names the key and the line") {
  try {
    parse_config("[afem]\n\ntheta = 1.5\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("theta") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);  // line number
  }
}

TEST_CASE("duplicate keys cite both lines") {
  try {
    parse_config("[mesh]\nn = 2\nn = 3\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS(parse_config("[mesh]\nresolution = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("typo = 1\n"), ConfigError);
}

TEST_CASE("the catalog ships all six presets and they all parse") {
  const std::vector<std::string> expected = {
      "linear_manufactured", "laplace_eigs_cube", "gaussian_well_n1",
      "hydrogen_coulomb",    "two_orbital_toy",   "nonlocal_demo"};
  for (const auto& name : expected) {
    const Preset& p = preset(name);
    CHECK(p.name == name);
    CHECK_NOTHROW(parse_config(p.config_text));
  }
  CHECK(presets().size() == expected.size());
}

TEST_CASE("hydrogen preset declares the reference energy with a band") {
  const Preset& p = preset("hydrogen_coulomb");
  REQUIRE(p.expected_energy.has_value());
  CHECK(*p.expected_energy == -0.5);
  CHECK(p.energy_band > 0.0);
}

TEST_CASE("invalid config exits 2 and leaves no partial CSV") {
  std::filesystem::remove_all("/tmp/ksafem_io_test/bad");
  RunOverrides ov;
  ov.output_dir = "/tmp/ksafem_io_test/bad";
  const RunOutcome out = run_config_text("[afem]\ntheta = 7\n", ov);
  CHECK(out.exit_code == 2);
  CHECK(!std::filesystem::exists("/tmp/ksafem_io_test/bad/convergence.csv"));
}

TEST_CASE("a small run writes the CSV with the documented header and summary") {
  std::filesystem::remove_all("/tmp/ksafem_io_test/ks");
  const RunOutcome out = run_config_text(kTinyKs);
  REQUIRE(out.exit_code == 0);
  const std::string csv = slurp("/tmp/ksafem_io_test/ks/convergence.csv");
  CHECK(csv.rfind("iter,ndof,nelem,energy,eta2,osc2,scf_iters,eig_resid,align_dist,wall_s\n",
                  0) == 0);
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + 3);  // header + one row per outer iteration
  const std::string summary = slurp("/tmp/ksafem_io_test/ks/summary.txt");
  CHECK(summary.find("stop_reason") != std::string::npos);
  CHECK(summary.find("hartree_path = poisson") != std::string::npos);
}

TEST_CASE("identical config and seed reproduce the CSV bitwise") {
  std::filesystem::remove_all("/tmp/ksafem_io_test/rep1");
  std::filesystem::remove_all("/tmp/ksafem_io_test/rep2");
  RunOverrides a, b;
  a.output_dir = "/tmp/ksafem_io_test/rep1";
  b.output_dir = "/tmp/ksafem_io_test/rep2";
  a.seed = b.seed = 777;
  REQUIRE(run_config_text(kTinyKs, a).exit_code == 0);
  REQUIRE(run_config_text(kTinyKs, b).exit_code == 0);
  std::string c1 = slurp("/tmp/ksafem_io_test/rep1/convergence.csv");
  std::string c2 = slurp("/tmp/ksafem_io_test/rep2/convergence.csv");
  // the wall-clock column is the one legitimate difference; strip it
  auto strip_wall = [](std::string s) {
    std::istringstream in(s);
    std::string line, out;
    while (std::getline(in, line)) {
      const auto last = line.rfind(',');
      out += line.substr(0, last) + "\n";
    }
    return out;
  };
  CHECK(strip_wall(c1) == strip_wall(c2));
}

TEST_CASE("vtk dumps appear when requested and parse as legacy files") {
  std::filesystem::remove_all("/tmp/ksafem_io_test/vtk");
  std::string text = kTinyKs;
  text += "vtk = on\n";  // appends to [output]
  RunOverrides ov;
  ov.output_dir = "/tmp/ksafem_io_test/vtk";
  REQUIRE(run_config_text(text, ov).exit_code == 0);
  for (const char* name : {"mesh_0000.vtk", "density_0000.vtk", "indicators_0000.vtk"}) {
    const std::filesystem::path p = std::filesystem::path("/tmp/ksafem_io_test/vtk") / name;
    REQUIRE(std::filesystem::exists(p));
    const std::string head = slurp(p).substr(0, 26);
    CHECK(head == "# vtk DataFile Version 3.0");
  }
}

TEST_CASE("linear preset run reports contraction ratios below one") {
  std::filesystem::remove_all("/tmp/ksafem_io_test/lin");
  std::string text = preset("linear_manufactured").config_text;
  // shrink for test speed
  text += "\n[output]\ndir = /tmp/ksafem_io_test/lin\n";
  // the preset already has [output]; rely on the duplicate check to fail
  // instead: use overrides
  RunOverrides ov;
  ov.output_dir = "/tmp/ksafem_io_test/lin";
  const RunOutcome out = run_config_text(preset("linear_manufactured").config_text, ov);
  REQUIRE(out.exit_code == 0);
  const std::string summary = slurp("/tmp/ksafem_io_test/lin/summary.txt");
  CHECK(summary.find("all_ratios_below_one = yes") != std::string::npos);
  CHECK(summary.find("effectivity_range") != std::string::npos);
}
