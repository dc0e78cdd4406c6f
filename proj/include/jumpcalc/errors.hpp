#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace jumpcalc {

// A numeric routine produced a non-finite value or failed to reach its
// tolerance.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A transformed point left the configuration window [0, T).
struct window_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A model invariant was violated at runtime (e.g. rate exceeding its
// envelope).
struct model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Trajectory norm exceeded the blow-up guard; almost always a model or
// configuration bug.
struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An estimator was fed inputs it cannot work with (e.g. empty sample sets).
struct degenerate_input : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Experiment-config validation failure; carries every violation found.
struct config_error : std::runtime_error {
  explicit config_error(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations(std::move(violations)) {}
  std::vector<std::string> violations;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid experiment config:";
    for (const auto& e : v) s += "\n  - " + e;
    return s;
  }
};

}  // namespace jumpcalc
