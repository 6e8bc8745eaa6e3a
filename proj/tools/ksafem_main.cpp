// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "ksafem/parallel.hpp"
#include "ksafem/presets.hpp"
#include "ksafem/runner.hpp"

namespace {

std::string read_config_arg(const std::string& arg) {
  // "preset:<name>" resolves from the built-in catalog
  if (arg.rfind("preset:", 0) == 0) return ksafem::preset(arg.substr(7)).config_text;
  std::ifstream in(arg);
  if (!in) throw ksafem::InvalidInput("cannot open config file: " + arg);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive finite-element solver for Kohn-Sham ground states"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string preset_name;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--output-dir", output_dir, "override the [output] dir");
    cmd->add_option("--seed", seed, "override the run seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--threads", threads,
                    "OpenMP thread count (overrides OMP_NUM_THREADS)");
  };

  CLI::App* solve = app.add_subcommand("solve", "run a config (file or preset:<name>)");
  solve->add_option("config", config_path, "config file path or preset:<name>")
      ->required();
  add_common(solve);

  CLI::App* check = app.add_subcommand("check", "validate a config and exit");
  check->add_option("config", config_path, "config file path or preset:<name>")
      ->required();

  CLI::App* presets_cmd = app.add_subcommand("presets", "list or print presets");
  presets_cmd->add_option("name", preset_name, "print this preset's config text");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets_cmd->parsed()) {
      if (preset_name.empty()) {
        for (const auto& p : ksafem::presets())
          std::printf("%-22s %s\n", p.name.c_str(), p.summary.c_str());
      } else {
        std::fputs(ksafem::preset(preset_name).config_text.c_str(), stdout);
      }
      return 0;
    }

    const std::string text = read_config_arg(config_path);

    if (check->parsed()) {
      try {
        ksafem::parse_config(text);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "invalid: %s\n", e.what());
        return 2;
      }
      std::printf("ok\n");
      return 0;
    }

    if (threads > 0) ksafem::set_threads(threads);
    ksafem::RunOverrides overrides;
    if (!output_dir.empty()) overrides.output_dir = output_dir;
    if (seed_set) overrides.seed = seed;

    const ksafem::RunOutcome outcome = ksafem::run_config_text(text, overrides);
    if (outcome.exit_code != 0)
      std::fprintf(stderr, "error: %s\n", outcome.message.c_str());
    else
      std::printf("done: %s\n", outcome.output_dir.c_str());
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
