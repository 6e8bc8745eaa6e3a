// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ksafem {

struct Preset {
  std::string name;
  std::string summary;
  std::string config_text;
  // declared reference values, when the preset has any
  std::optional<double> expected_energy;
  double energy_band = 0.0;  // +- band around expected_energy
};

const std::vector<Preset>& presets();
const Preset& preset(const std::string& name);

}  // namespace ksafem
