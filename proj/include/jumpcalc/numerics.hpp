#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>

namespace jumpcalc::num {

// Neumaier-compensated total, summed in index order so the result does not
// depend on how the values were produced.
double compensated_total(std::span<const double> xs);

struct Summary {
  std::uint64_t n = 0;
  double mean = 0;
  double var = 0;  // unbiased
  double sd = 0;
  double se = 0;
};

Summary summarize(std::span<const double> xs);

// Standard error of the sample variance via the fourth central moment.
double variance_se(std::span<const double> xs);

// Adaptive Simpson quadrature.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10, int max_depth = 48);

// Dormand-Prince 5(4) with adaptive steps for autonomous systems.
// Integrates y' = field(y) from t0 to t1 (t1 >= t0) with local error
// control at `tol` (used both absolutely and relatively).
Eigen::VectorXd ode45(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
                      Eigen::VectorXd y0, double t0, double t1, double tol = 1e-10);

}  // namespace jumpcalc::num
