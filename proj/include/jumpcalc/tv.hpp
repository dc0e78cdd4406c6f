#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumpcalc/rng.hpp"

namespace jumpcalc::tv {

// Kept samples of a (possibly restricted) law; each carries weight 1/total,
// so the histogram masses are sub-probabilities when kept < total.
struct WeightedSamples {
  std::vector<Eigen::VectorXd> kept;
  std::uint64_t total = 0;
};

struct TvOptions {
  int bins_per_dim = 32;
  int bootstrap_resamples = 200;
  std::uint64_t bootstrap_seed = 0;
  double ci_level = 0.95;
};

struct TvReport {
  double tv = 0;
  double ci_lo = 0, ci_hi = 0;
  double baseline = 0;  // same-law value from splitting the first sample set
  double mass_a = 0, mass_b = 0;
  std::uint64_t kept_a = 0, kept_b = 0, total_a = 0, total_b = 0;
  int bins_per_dim = 0;
  int dim = 0;
  std::vector<double> box_lo, box_hi;
  std::string label;
};

// Common-histogram total-variation estimate between two weighted sample sets:
//   TV = 1/2 * sum over bins |mass_a(bin) - mass_b(bin)|,
// which folds in the sub-probability mass difference by construction.  The
// bounding box is the pooled range of the kept samples; the same binning is
// reused for the bootstrap and the same-law baseline.
TvReport estimate_tv(const WeightedSamples& a, const WeightedSamples& b, const TvOptions& opt);

nlohmann::ordered_json to_json(const TvReport& r);

}  // namespace jumpcalc::tv
