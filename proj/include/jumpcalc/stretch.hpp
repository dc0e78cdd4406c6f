#pragma once

#include <vector>

#include "jumpcalc/configuration.hpp"
#include "jumpcalc/mark_space.hpp"

namespace jumpcalc {

// Piecewise-constant direction h on the time axis: value values[k] on
// [breakpoints[k], breakpoints[k+1]) and zero beyond the last breakpoint.
// The antiderivative J is continuous piecewise linear with J(0) = 0 and is
// constant past the support, so the time-stretch flow is exactly solvable
// segment by segment.
class StretchFunction {
 public:
  // breakpoints = {s_0 = 0, s_1, ..., s_K}, values = {h_1, ..., h_K}.
  StretchFunction(std::vector<double> breakpoints, std::vector<double> values);

  static StretchFunction zero();
  // Canonical antisymmetric bump: +1 on [a, mid), -1 on [mid, b).
  static StretchFunction bump(double a, double b);

  double operator()(double x) const;  // h(x)
  double J(double x) const;           // integral of h over [0, x], exact
  double support_end() const { return bp_.back(); }
  double terminal_velocity() const { return jbp_.back(); }  // J past the support
  // Past this time the unit-time flow reduces to a pure shift by J(s_K) and
  // the log-Jacobian vanishes.
  double influence_end() const;

  StretchFunction scaled(double factor) const;

  const std::vector<double>& breakpoints() const { return bp_; }
  const std::vector<double>& values() const { return vals_; }
  bool is_zero() const;

 private:
  std::vector<double> bp_;    // size K+1, bp_[0] == 0
  std::vector<double> vals_;  // size K
  std::vector<double> jbp_;   // J at breakpoints, size K+1
};

// Direction attached to a time cell (a, b): J > 0 strictly inside, J == 0
// outside, so the flow maps (a, b) onto itself and fixes the complement.
class GridDirection {
 public:
  GridDirection(double a, double b);  // canonical bump
  GridDirection(double a, double b, StretchFunction h);

  double a() const { return a_; }
  double b() const { return b_; }
  const StretchFunction& h() const { return h_; }

 private:
  double a_, b_;
  StretchFunction h_;
};

struct FlowResult {
  double x = 0;
  double log_jacobian = 0;  // d/dx of the flow map equals exp of this
};

// Value at parameter time t of z' = J(z), z(0) = x, plus the accumulated
// log-Jacobian; exact per linear segment of J (exponential/affine pieces with
// event detection at the breakpoints).
FlowResult flow_with_jacobian(const StretchFunction& h, double t, double x);
double flow(const StretchFunction& h, double t, double x);

// r_h(x): log of the unit-time flow Jacobian, equal to the time average of h
// along the flow path.
double log_jacobian(const StretchFunction& h, double x);

// Points with mark in the subset get time tau -> flow(h, -1, tau); everything
// else is untouched; nothing is added or removed.
Configuration transform_configuration(const Configuration& config, const StretchFunction& h,
                                      const MarkSubset& subset);

// Change-of-measure density p for the transformation above:
//   exp( sum of r_h over subset points  -  [unit-time shift past the support] * mass ).
// Requires the window to cover the influence zone of h so no contributing
// point can be missing.
double density(const Configuration& config, const StretchFunction& h, const MarkSubset& subset);

// Logarithmic derivative of the density family eps -> p_{eps h}:
//   rho = -( sum of h over subset points - mass * J(T) ),
// the compensated integral of -h over the subset.
double log_derivative_rho(const Configuration& config, const StretchFunction& h,
                          const MarkSubset& subset);

}  // namespace jumpcalc
