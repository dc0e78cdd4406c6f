#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jumpcalc/mark_space.hpp"
#include "jumpcalc/rng.hpp"

namespace jumpcalc {

struct ConfigPoint {
  double t = 0;
  Eigen::VectorXd mark;
  int atom = -1;  // atom index for atomic truncations, -1 for band marks
};

// One realization of the point measure on [0, T) x (mark truncation).
// Immutable after construction; times strictly increasing.  Float ties are
// resolved by nudging the later time one ulp up and counting the fix.
class Configuration {
 public:
  Configuration(double window_end, std::vector<ConfigPoint> points, std::string source_id);

  double window_end() const { return window_end_; }
  const std::vector<ConfigPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const std::string& source() const { return source_; }
  int ties_fixed() const { return ties_fixed_; }

 private:
  double window_end_;
  std::vector<ConfigPoint> points_;
  std::string source_;
  int ties_fixed_ = 0;
};

// Poisson sample on [0, T) x subset: count ~ Poisson(mass * T), times i.i.d.
// uniform then sorted, marks i.i.d. from the truncation restricted to the
// subset.  Deterministic given the stream.
Configuration sample_configuration(const MarkSpace& space, const MarkSubset& subset, double T,
                                   rng::Stream stream);
Configuration sample_configuration(const MarkSpace& space, const MarkSubset& subset, double T,
                                   std::uint64_t seed);

// Number of points with time <= t and mark in the subset.
int count(const Configuration& config, double t, const MarkSubset& subset);

// Sum of f over subset points; with compensate, minus the window integral of
// f against dt x (intensity restricted to the subset).
double integrate(const Configuration& config,
                 const std::function<double(double, const Eigen::VectorXd&)>& f, bool compensate,
                 const MarkSpace& space, const MarkSubset& subset);

Configuration restrict_to(const Configuration& config, const MarkSubset& subset);

std::vector<double> jump_times(const Configuration& config, const MarkSubset& subset);

std::string to_csv(const Configuration& config);

}  // namespace jumpcalc
