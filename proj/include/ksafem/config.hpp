// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "ksafem/afem.hpp"
#include "ksafem/error.hpp"
#include "ksafem/model.hpp"

namespace ksafem {

struct ConfigError : InvalidInput {
  explicit ConfigError(const std::string& msg) : InvalidInput(msg) {}
};

enum class RunMode { KohnSham, Linear };

/// Parsed and validated run configuration. Flat `key = value` lines under
/// `[section]` headers; unknown keys, duplicate keys and out-of-range
/// values are rejected with line numbers.
struct RunConfig {
  // [domain]
  Box box{{0, 0, 0}, {1, 1, 1}};
  // [mesh]
  int mesh_n = 2;
  int degree = 2;
  // [model]
  KohnShamModel model;
  // [afem]
  RunMode mode = RunMode::KohnSham;
  AfemConfig afem;
  // [linear]
  std::string linear_problem = "sin_manufactured";
  // [hartree]
  HartreePath hartree_path = HartreePath::Poisson;
  // [output]
  std::string output_dir = "out";
  bool write_vtk = false;
  std::uint64_t seed = 20240501u;
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// The [linear] problems shipped with the runner.
LinearProblem make_linear_problem(const std::string& name, const Box& box);

}  // namespace ksafem
