// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ksafem {

struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalFailure : std::runtime_error {
  explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct ContractViolation : std::runtime_error {
  explicit ContractViolation(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ksafem
