#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>

#include <json.hpp>

#include "jumpcalc/numerics.hpp"

namespace jumpcalc::mc {

// 0 or negative requests machine parallelism.
int resolve_threads(int requested);

// Serial reference sweep: body(i) for i in [0, n).  The parallel sweep must
// reproduce its results bit for bit, which holds because bodies only write
// per-path slots and all reductions happen afterwards in index order.
template <typename Body>
void serial_paths(std::uint64_t n, Body&& body) {
  for (std::uint64_t i = 0; i < n; ++i) body(i);
}

// OpenMP sweep over path indices.  Exceptions from workers are captured and
// rethrown once on the calling thread.
void parallel_paths(std::uint64_t n, int threads, const std::function<void(std::uint64_t)>& body);

// One Monte Carlo verdict: |estimate - target| <= tol_se * se, reproducible
// from the stored fields alone.
struct McReport {
  std::string name;
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;
  double estimate = 0;
  double se = 0;
  double target = 0;
  double tol_se = 3.0;
  bool pass = false;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  void judge() { pass = std::abs(estimate - target) <= tol_se * se; }
};

nlohmann::ordered_json to_json(const McReport& r);

}  // namespace jumpcalc::mc
