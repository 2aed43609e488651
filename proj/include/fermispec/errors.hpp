#pragma once

#include <stdexcept>
#include <string>

namespace fermispec {

// Exit-code carriers for the CLI: config_error -> 2, convergence_error -> 3, guard_error -> 4.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& m) : std::runtime_error(m) {}
};
struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& m) : std::runtime_error(m) {}
};
struct guard_error : std::runtime_error {
  explicit guard_error(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace fermispec
