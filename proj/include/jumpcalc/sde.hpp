#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jumpcalc/configuration.hpp"
#include "jumpcalc/grid.hpp"
#include "jumpcalc/rng.hpp"

namespace jumpcalc {

using StateFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using StateJacFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// Norm guard: exceeding this along a trajectory raises divergence_error.
inline constexpr double kBlowUpNorm = 1e12;

// dX = a(X) dt + jumps c(u) against the sampled point measure; the
// compensator drift (a constant vector) absorbs both the centering of the
// compensated mark part and the discarded small-jump tail of the truncation.
struct AdditiveModel {
  int dim = 1;
  std::string name = "additive";
  StateFn drift;
  StateJacFn drift_jac;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> jump;  // c(u)
  Eigen::VectorXd compensator;                                  // added to a(X) between jumps
  double small_jump_threshold = 0;                              // reported, not acted on

  Eigen::VectorXd effective_drift(const Eigen::VectorXd& x) const {
    return compensator.size() ? Eigen::VectorXd(drift(x) + compensator) : drift(x);
  }
  // Spot-checks drift_jac against finite differences of drift at random
  // points, tol 1e-5.
  void validate(rng::Stream stream, int checks = 8) const;
};

// State-dependent rate via thinning: candidates carry marks [v; p], p uniform
// under the envelope beta(v); a candidate at time s is accepted when
// p <= b(X(s-), v) and then adds c(X(s-), v).
struct ThinnedModel {
  int dim = 1;
  std::string name = "thinned";
  std::shared_ptr<const MarkSpace> base;  // (V, pi) truncation
  StateFn drift;
  StateJacFn drift_jac;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> rate;        // b(x, v)
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> jump;  // c(x, v)
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> jump_jac;  // d c / d x
  std::function<double(const Eigen::VectorXd&)> beta;   // envelope for b
  std::function<double(const Eigen::VectorXd&)> gamma;  // envelope for ||c||
  // Declared structural metadata (rate split and envelope exponents); carried
  // into reports, not enforced numerically.
  std::map<std::string, double> rate_split_metadata;

  double candidate_rate() const;  // integral of beta against the truncation
  void validate(rng::Stream stream, int checks = 16) const;
};

struct TrajectoryEvent {
  double time = 0;
  Eigen::VectorXd pre_state;
  Eigen::VectorXd mark;  // thinned: [v; p]
  int atom = -1;
  bool accepted = true;
  Eigen::VectorXd post_state;
};

struct Trajectory {
  Eigen::VectorXd x0;
  double t_end = 0;
  bool thinned = false;
  std::string model_name;
  std::vector<TrajectoryEvent> events;  // every configuration point up to t_end
  Eigen::VectorXd terminal;
  std::shared_ptr<const Configuration> config;  // the driving configuration
};

// Deterministic solve against a given configuration; inter-jump flow by
// adaptive RK with local tolerance 1e-10, jump times hit exactly.
Trajectory simulate_additive(const AdditiveModel& model, const Eigen::VectorXd& x, double t,
                             const Configuration& config);

// Candidate stream for the thinned solver: Poisson with rate
// candidate_rate() in time, v proportional to beta d(pi), p uniform on
// [0, beta(v)).
Configuration sample_thinned_candidates(const ThinnedModel& model, double t, rng::Stream stream);

Trajectory simulate_thinned(const ThinnedModel& model, const Eigen::VectorXd& x, double t,
                            rng::Stream stream);
// Re-run on an explicit candidate configuration (used by transforms and
// finite differences).
Trajectory simulate_thinned_on(const ThinnedModel& model, const Eigen::VectorXd& x, double t,
                               const Configuration& candidates);

// State at an intermediate time, re-anchored at the recorded events.
Eigen::VectorXd state_at(const AdditiveModel& model, const Trajectory& traj, double s);
Eigen::VectorXd state_at(const ThinnedModel& model, const Trajectory& traj, double s);

// Fundamental matrix of the linearized flow on (s, t]: between jumps
// E' = grad_a(X) E; thinned trajectories additionally pick up a factor
// (I + grad_c) at each accepted jump strictly after s.
Eigen::MatrixXd stochastic_exponent(const AdditiveModel& model, const Trajectory& traj, double s,
                                    double t);
Eigen::MatrixXd stochastic_exponent(const ThinnedModel& model, const Trajectory& traj, double s,
                                    double t);

//

// Jump response fields.
Eigen::VectorXd delta(const AdditiveModel& model, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& u);
Eigen::VectorXd delta(const ThinnedModel& model, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& v);
// (I + grad_c)^{-1} delta where the factor is invertible; nullopt signals the
// caller to skip the mark.
std::optional<Eigen::VectorXd> tilde_delta(const ThinnedModel& model, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& v, double rel_tol = 1e-10);

// Analytic grid derivatives of the endpoint, propagated forward by variation
// of constants (no inversion of the exponent, which may be singular).
Eigen::VectorXd derivative_additive(const AdditiveModel& model, const Trajectory& traj,
                                    const DifferentialGrid& grid, int i);
Eigen::VectorXd derivative_thinned(const ThinnedModel& model, const Trajectory& traj,
                                   const DifferentialGrid& grid, int i);

struct SpanRank {
  int rank = 0;
  Eigen::MatrixXd vectors;  // propagated jump responses, one column per jump
};

// Rank of span{ E_tau^t delta(X(tau-), mark) } over (accepted) jumps up to t.
SpanRank span_rank(const AdditiveModel& model, const Trajectory& traj, double t,
                   double rel_tol = 1e-8);
SpanRank span_rank(const ThinnedModel& model, const Trajectory& traj, double t,
                   double rel_tol = 1e-8);

// Mass of {u : |<response(y,u), l>| > threshold} per direction l and
// per truncation level; growth along the ladder is the numerical face of the
// infinite-mass non-degeneracy conditions.
struct ConditionProbeTable {
  std::vector<std::string> level_labels;
  std::vector<Eigen::VectorXd> directions;
  Eigen::MatrixXd mass;  // levels x directions
};

ConditionProbeTable condition_probe(const AdditiveModel& model, const MarkSpace& space,
                                    const Eigen::VectorXd& y,
                                    const std::vector<Eigen::VectorXd>& directions,
                                    const std::vector<MarkSubset>& truncation_ladder,
                                    double threshold = 1e-9);
ConditionProbeTable condition_probe(const ThinnedModel& model, const Eigen::VectorXd& y,
                                    const std::vector<Eigen::VectorXd>& directions,
                                    const std::vector<MarkSubset>& truncation_ladder,
                                    double threshold = 1e-9);

// Endpoint functionals over configurations; analytic derivative hooks come
// from the model equations.
Functional endpoint_functional(const AdditiveModel& model, Eigen::VectorXd x0, double t);
Functional endpoint_functional(const ThinnedModel& model, Eigen::VectorXd x0, double t);

}  // namespace jumpcalc
