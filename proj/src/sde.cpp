#include "jumpcalc/sde.hpp"

#include <algorithm>
#include <cmath>

#include "jumpcalc/errors.hpp"
#include "jumpcalc/numerics.hpp"

namespace jumpcalc {

namespace {

void check_norm(const Eigen::VectorXd& x) {
  if (!x.allFinite() || x.norm() > kBlowUpNorm)
    throw divergence_error("trajectory norm exceeded the blow-up guard");
}

// Augmented integration of (x, M): x' = drift(x), M' = jac(x) * M.
struct AugmentedFlow {
  const StateFn& drift;
  const StateJacFn& jac;
  int m;

  Eigen::VectorXd pack(const Eigen::VectorXd& x, const Eigen::MatrixXd& M) const {
    Eigen::VectorXd y(m + M.size());
    y.head(m) = x;
    for (Eigen::Index c = 0; c < M.cols(); ++c) y.segment(m + c * m, m) = M.col(c);
    return y;
  }
  void unpack(const Eigen::VectorXd& y, Eigen::VectorXd& x, Eigen::MatrixXd& M) const {
    x = y.head(m);
    for (Eigen::Index c = 0; c < M.cols(); ++c) M.col(c) = y.segment(m + c * m, m);
  }
  void advance(Eigen::VectorXd& x, Eigen::MatrixXd& M, double t0, double t1) const {
    if (t1 <= t0) return;
    const Eigen::Index cols = M.cols();
    auto field = [&](const Eigen::VectorXd& y) {
      Eigen::VectorXd x_(m);
      Eigen::MatrixXd M_(m, cols);
      unpack(y, x_, M_);
      Eigen::VectorXd dy(y.size());
      dy.head(m) = drift(x_);
      const Eigen::MatrixXd J = jac(x_);
      Eigen::MatrixXd dM = J * M_;
      for (Eigen::Index c = 0; c < cols; ++c) dy.segment(m + c * m, m) = dM.col(c);
      return dy;
    };
    Eigen::VectorXd y = num::ode45(field, pack(x, M), t0, t1, 1e-10);
    unpack(y, x, M);
    check_norm(x);
  }
};

}  // namespace

// --- model validation ---------------------------------------------------------

void AdditiveModel::validate(rng::Stream stream, int checks) const {
  for (int c = 0; c < checks; ++c) {
    Eigen::VectorXd x(dim);
    for (int d = 0; d < dim; ++d) x[d] = stream.uniform(-2.0, 2.0);
    const Eigen::MatrixXd J = drift_jac(x);
    const double delta = 1e-6;
    for (int d = 0; d < dim; ++d) {
      Eigen::VectorXd xp = x, xm = x;
      xp[d] += delta;
      xm[d] -= delta;
      const Eigen::VectorXd col = (drift(xp) - drift(xm)) / (2 * delta);
      if ((col - J.col(d)).cwiseAbs().maxCoeff() > 1e-5 * (1.0 + J.cwiseAbs().maxCoeff()))
        throw model_error("AdditiveModel: drift_jac disagrees with finite differences of drift");
    }
  }
}

double ThinnedModel::candidate_rate() const {
  if (!base) throw model_error("ThinnedModel: missing base mark space");
  if (base->is_atomic()) {
    double r = 0;
    for (const auto& a : base->atoms()) r += a.weight * beta(a.mark);
    return r;
  }
  return num::integrate(
      [&](double v) {
        Eigen::VectorXd m = Eigen::VectorXd::Constant(1, v);
        return base->band_density(v) * beta(m);
      },
      base->band_lo(), base->band_hi(), 1e-10);
}

void ThinnedModel::validate(rng::Stream stream, int checks) const {
  for (int c = 0; c < checks; ++c) {
    Eigen::VectorXd x(dim), y(dim);
    for (int d = 0; d < dim; ++d) {
      x[d] = stream.uniform(-2.0, 2.0);
      y[d] = stream.uniform(-2.0, 2.0);
    }
    Eigen::VectorXd v;
    if (base->is_atomic()) {
      const auto& atoms = base->atoms();
      v = atoms[stream.next_u64() % atoms.size()].mark;
    } else {
      v = Eigen::VectorXd::Constant(1, stream.uniform(base->band_lo(), base->band_hi()));
    }
    const double bv = beta(v);
    const double gv = gamma(v);
    if (rate(x, v) > bv * (1 + 1e-9) + 1e-12)
      throw model_error("ThinnedModel: rate exceeds its envelope beta");
    if (jump(x, v).norm() > gv * (1 + 1e-9) + 1e-12)
      throw model_error("ThinnedModel: jump size exceeds its envelope gamma");
    const double dxy = (x - y).norm();
    if (std::abs(rate(x, v) - rate(y, v)) > dxy * bv * (1 + 1e-6) + 1e-9)
      throw model_error("ThinnedModel: rate is not beta-Lipschitz at a spot check");
    if ((jump(x, v) - jump(y, v)).norm() > dxy * gv * (1 + 1e-6) + 1e-9)
      throw model_error("ThinnedModel: jump map is not gamma-Lipschitz at a spot check");
  }
}

// --- solvers -------------------------------------------------------------------

Trajectory simulate_additive(const AdditiveModel& model, const Eigen::VectorXd& x, double t,
                             const Configuration& config) {
  if (x.size() != model.dim) throw std::invalid_argument("simulate_additive: state dimension mismatch");
  if (config.window_end() < t)
    throw std::invalid_argument("simulate_additive: configuration window shorter than horizon");

  const StateFn field = [&model](const Eigen::VectorXd& y) { return model.effective_drift(y); };

  Trajectory traj;
  traj.x0 = x;
  traj.t_end = t;
  traj.thinned = false;
  traj.model_name = model.name;
  traj.config = std::make_shared<Configuration>(config);

  Eigen::VectorXd state = x;
  double cur = 0;
  for (const auto& p : config.points()) {
    if (p.t > t) break;
    state = num::ode45(field, state, cur, p.t, 1e-10);
    check_norm(state);
    TrajectoryEvent ev;
    ev.time = p.t;
    ev.pre_state = state;
    ev.mark = p.mark;
    ev.atom = p.atom;
    ev.accepted = true;
    state = state + model.jump(p.mark);
    check_norm(state);
    ev.post_state = state;
    traj.events.push_back(std::move(ev));
    cur = p.t;
  }
  state = num::ode45(field, state, cur, t, 1e-10);
  check_norm(state);
  traj.terminal = state;
  return traj;
}

Configuration sample_thinned_candidates(const ThinnedModel& model, double t, rng::Stream stream) {
  const double rate = model.candidate_rate();
  if (!std::isfinite(rate) || rate < 0)
    throw model_error("sample_thinned_candidates: candidate rate must be finite");

  const std::uint64_t n = stream.poisson(rate * t);
  std::vector<double> times(n);
  for (auto& s : times) s = stream.uniform() * t;
  std::sort(times.begin(), times.end());

  std::vector<double> atom_weights;
  double beta_max = 0;
  if (model.base->is_atomic()) {
    for (const auto& a : model.base->atoms()) atom_weights.push_back(a.weight * model.beta(a.mark));
  } else {
    for (int i = 0; i <= 1024; ++i) {
      const double v = model.base->band_lo() +
                       (model.base->band_hi() - model.base->band_lo()) * i / 1024.0;
      beta_max = std::max(beta_max, model.beta(Eigen::VectorXd::Constant(1, v)));
    }
    beta_max *= 1.0 + 1e-9;
  }

  std::vector<ConfigPoint> pts;
  pts.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    Eigen::VectorXd v;
    int atom = -1;
    if (model.base->is_atomic()) {
      atom = static_cast<int>(stream.categorical(atom_weights));
      v = model.base->atoms()[static_cast<std::size_t>(atom)].mark;
    } else {
      // v proportional to beta * density, by rejection under the beta envelope.
      for (;;) {
        const double cand = model.base->sample_band(stream, model.base->band_lo(), model.base->band_hi());
        v = Eigen::VectorXd::Constant(1, cand);
        if (stream.uniform() * beta_max <= model.beta(v)) break;
      }
    }
    ConfigPoint p;
    p.t = times[k];
    p.atom = atom;
    p.mark.resize(v.size() + 1);
    p.mark.head(v.size()) = v;
    p.mark[v.size()] = stream.uniform() * model.beta(v);
    pts.push_back(std::move(p));
  }
  return Configuration(t, std::move(pts), "candidates/" + model.name);
}

Trajectory simulate_thinned_on(const ThinnedModel& model, const Eigen::VectorXd& x, double t,
                               const Configuration& candidates) {
  if (x.size() != model.dim) throw std::invalid_argument("simulate_thinned: state dimension mismatch");
  if (candidates.window_end() < t)
    throw std::invalid_argument("simulate_thinned: candidate window shorter than horizon");

  Trajectory traj;
  traj.x0 = x;
  traj.t_end = t;
  traj.thinned = true;
  traj.model_name = model.name;
  traj.config = std::make_shared<Configuration>(candidates);

  Eigen::VectorXd state = x;
  double cur = 0;
  for (const auto& p : candidates.points()) {
    if (p.t > t) break;
    state = num::ode45(model.drift, state, cur, p.t, 1e-10);
    check_norm(state);
    const Eigen::VectorXd v = p.mark.head(p.mark.size() - 1);
    const double pp = p.mark[p.mark.size() - 1];
    const double bv = model.rate(state, v);
    if (bv > model.beta(v) * (1 + 1e-9) + 1e-12)
      throw model_error("simulate_thinned: rate exceeded its envelope along the path");
    TrajectoryEvent ev;
    ev.time = p.t;
    ev.pre_state = state;
    ev.mark = p.mark;
    ev.atom = p.atom;
    ev.accepted = pp <= bv;
    if (ev.accepted) {
      state = state + model.jump(state, v);
      check_norm(state);
    }
    ev.post_state = state;
    traj.events.push_back(std::move(ev));
    cur = p.t;
  }
  state = num::ode45(model.drift, state, cur, t, 1e-10);
  check_norm(state);
  traj.terminal = state;
  return traj;
}

Trajectory simulate_thinned(const ThinnedModel& model, const Eigen::VectorXd& x, double t,
                            rng::Stream stream) {
  return simulate_thinned_on(model, x, t, sample_thinned_candidates(model, t, stream));
}

// --- dense evaluation and exponent ---------------------------------------------

namespace {

Eigen::VectorXd state_at_impl(const StateFn& field, const Trajectory& traj, double s) {
  if (s < 0 || s > traj.t_end) throw std::domain_error("state_at: time outside the trajectory");
  Eigen::VectorXd x = traj.x0;
  double cur = 0;
  for (const auto& ev : traj.events) {
    if (ev.time > s) break;
    x = ev.post_state;
    cur = ev.time;
  }
  return num::ode45(field, x, cur, s, 1e-10);
}

struct JumpHooks {
  // Factor applied to propagated columns at an event (identity if none).
  std::function<Eigen::MatrixXd(const TrajectoryEvent&)> factor;
  bool has_factor = false;
};

Eigen::MatrixXd propagate_matrix(const StateFn& field, const StateJacFn& jac, int m,
                                 const Trajectory& traj, double s, double t, Eigen::MatrixXd M,
                                 const JumpHooks& hooks) {
  if (!(s <= t) || t > traj.t_end + 1e-12)
    throw std::domain_error("stochastic_exponent: need s <= t within the horizon");
  AugmentedFlow aug{field, jac, m};
  Eigen::VectorXd x = state_at_impl(field, traj, s);
  double cur = s;
  for (const auto& ev : traj.events) {
    if (ev.time <= s) continue;
    if (ev.time > t) break;
    aug.advance(x, M, cur, ev.time);
    if (hooks.has_factor && ev.accepted) M = hooks.factor(ev) * M;
    x = ev.post_state;
    cur = ev.time;
  }
  aug.advance(x, M, cur, t);
  return M;
}

}  // namespace

Eigen::VectorXd state_at(const AdditiveModel& model, const Trajectory& traj, double s) {
  const StateFn field = [&model](const Eigen::VectorXd& y) { return model.effective_drift(y); };
  return state_at_impl(field, traj, s);
}

Eigen::VectorXd state_at(const ThinnedModel& model, const Trajectory& traj, double s) {
  return state_at_impl(model.drift, traj, s);
}

Eigen::MatrixXd stochastic_exponent(const AdditiveModel& model, const Trajectory& traj, double s,
                                    double t) {
  const StateFn field = [&model](const Eigen::VectorXd& y) { return model.effective_drift(y); };
  return propagate_matrix(field, model.drift_jac, model.dim, traj, s, t,
                          Eigen::MatrixXd::Identity(model.dim, model.dim), {});
}

Eigen::MatrixXd stochastic_exponent(const ThinnedModel& model, const Trajectory& traj, double s,
                                    double t) {
  JumpHooks hooks;
  hooks.has_factor = true;
  hooks.factor = [&model](const TrajectoryEvent& ev) {
    const Eigen::VectorXd v = ev.mark.head(ev.mark.size() - 1);
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(model.dim, model.dim) +
                           model.jump_jac(ev.pre_state, v));
  };
  return propagate_matrix(model.drift, model.drift_jac, model.dim, traj, s, t,
                          Eigen::MatrixXd::Identity(model.dim, model.dim), hooks);
}

// --- jump responses -------------------------------------------------------------

Eigen::VectorXd delta(const AdditiveModel& model, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& u) {
  return model.drift(y + model.jump(u)) - model.drift(y);
}

Eigen::VectorXd delta(const ThinnedModel& model, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& v) {
  return model.drift(y + model.jump(y, v)) - model.drift(y) - model.jump_jac(y, v) * model.drift(y);
}

std::optional<Eigen::VectorXd> tilde_delta(const ThinnedModel& model, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& v, double rel_tol) {
  const Eigen::MatrixXd F =
      Eigen::MatrixXd::Identity(model.dim, model.dim) + model.jump_jac(y, v);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0) || sv[sv.size() - 1] <= rel_tol * sv[0]) return std::nullopt;
  return svd.solve(delta(model, y, v));
}

// --- analytic derivatives -------------------------------------------------------

namespace {

// Forward propagation shared by both model classes: columns of B evolve by the
// linearized flow; `on_event` may mutate B and append responses.
template <typename OnEvent>
Eigen::MatrixXd forward_walk(const StateFn& field, const StateJacFn& jac, int m,
                             const Trajectory& traj, double t, Eigen::MatrixXd B,
                             OnEvent&& on_event) {
  AugmentedFlow aug{field, jac, m};
  Eigen::VectorXd x = traj.x0;
  double cur = 0;
  for (const auto& ev : traj.events) {
    if (ev.time > t) break;
    aug.advance(x, B, cur, ev.time);
    on_event(ev, B);
    x = ev.post_state;
    cur = ev.time;
  }
  aug.advance(x, B, cur, t);
  return B;
}

}  // namespace

Eigen::VectorXd derivative_additive(const AdditiveModel& model, const Trajectory& traj,
                                    const DifferentialGrid& grid, int i) {
  if (traj.thinned) throw std::invalid_argument("derivative_additive: trajectory is thinned");
  const StateFn field = [&model](const Eigen::VectorXd& y) { return model.effective_drift(y); };
  const auto& dir = grid.cell(i).direction;
  Eigen::MatrixXd y0 = Eigen::MatrixXd::Zero(model.dim, 1);
  Eigen::MatrixXd out = forward_walk(
      field, model.drift_jac, model.dim, traj, traj.t_end, y0,
      [&](const TrajectoryEvent& ev, Eigen::MatrixXd& B) {
        if (!grid.in_cell(i, ev.time, ev.mark, ev.atom)) return;
        B.col(0) += dir.h().J(ev.time) * delta(model, ev.pre_state, ev.mark);
      });
  return out.col(0);
}

Eigen::VectorXd derivative_thinned(const ThinnedModel& model, const Trajectory& traj,
                                   const DifferentialGrid& grid, int i) {
  if (!traj.thinned) throw std::invalid_argument("derivative_thinned: trajectory is not thinned");
  const auto& dir = grid.cell(i).direction;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(model.dim, model.dim);
  Eigen::MatrixXd y0 = Eigen::MatrixXd::Zero(model.dim, 1);
  Eigen::MatrixXd out = forward_walk(
      model.drift, model.drift_jac, model.dim, traj, traj.t_end, y0,
      [&](const TrajectoryEvent& ev, Eigen::MatrixXd& B) {
        if (!ev.accepted) return;
        const Eigen::VectorXd v = ev.mark.head(ev.mark.size() - 1);
        B = (id + model.jump_jac(ev.pre_state, v)) * B;
        if (!grid.in_cell(i, ev.time, ev.mark, ev.atom)) return;
        B.col(0) += dir.h().J(ev.time) * delta(model, ev.pre_state, v);
      });
  return out.col(0);
}

// --- rank of the propagated jump responses --------------------------------------

namespace {

int rank_of(const Eigen::MatrixXd& B, double rel_tol) {
  if (B.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0)) return 0;
  int r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > rel_tol * sv[0]) ++r;
  return r;
}

}  // namespace

SpanRank span_rank(const AdditiveModel& model, const Trajectory& traj, double t, double rel_tol) {
  const StateFn field = [&model](const Eigen::VectorXd& y) { return model.effective_drift(y); };
  Eigen::MatrixXd B(model.dim, 0);
  B = forward_walk(field, model.drift_jac, model.dim, traj, t, B,
                   [&](const TrajectoryEvent& ev, Eigen::MatrixXd& cols) {
                     cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
                     cols.col(cols.cols() - 1) = delta(model, ev.pre_state, ev.mark);
                   });
  SpanRank r;
  r.vectors = B;
  r.rank = rank_of(B, rel_tol);
  return r;
}

SpanRank span_rank(const ThinnedModel& model, const Trajectory& traj, double t, double rel_tol) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(model.dim, model.dim);
  Eigen::MatrixXd B(model.dim, 0);
  B = forward_walk(model.drift, model.drift_jac, model.dim, traj, t, B,
                   [&](const TrajectoryEvent& ev, Eigen::MatrixXd& cols) {
                     if (!ev.accepted) return;
                     const Eigen::VectorXd v = ev.mark.head(ev.mark.size() - 1);
                     if (cols.cols() > 0) cols = (id + model.jump_jac(ev.pre_state, v)) * cols;
                     cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
                     cols.col(cols.cols() - 1) = delta(model, ev.pre_state, v);
                   });
  SpanRank r;
  r.vectors = B;
  r.rank = rank_of(B, rel_tol);
  return r;
}

// --- condition probes ------------------------------------------------------------

namespace {

ConditionProbeTable probe_impl(const MarkSpace& space,
                               const std::function<std::optional<Eigen::VectorXd>(
                                   const Eigen::VectorXd&, int)>& response,
                               const std::function<double(const Eigen::VectorXd&, int)>& weight,
                               const std::vector<Eigen::VectorXd>& directions,
                               const std::vector<MarkSubset>& ladder, double threshold) {
  ConditionProbeTable table;
  table.directions = directions;
  table.mass = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ladder.size()),
                                     static_cast<Eigen::Index>(directions.size()));
  for (std::size_t lev = 0; lev < ladder.size(); ++lev) {
    table.level_labels.push_back(ladder[lev].describe());
    const auto accumulate = [&](const Eigen::VectorXd& mark, int atom, double w) {
      if (!ladder[lev].contains(mark, atom)) return;
      const auto vec = response(mark, atom);
      if (!vec) return;
      for (std::size_t d = 0; d < directions.size(); ++d)
        if (std::abs(vec->dot(directions[d])) > threshold)
          table.mass(static_cast<Eigen::Index>(lev), static_cast<Eigen::Index>(d)) += w;
    };
    if (space.is_atomic()) {
      for (std::size_t k = 0; k < space.atoms().size(); ++k)
        accumulate(space.atoms()[k].mark, static_cast<int>(k),
                   space.atoms()[k].weight * weight(space.atoms()[k].mark, static_cast<int>(k)));
    } else {
      const int kGrid = 4096;
      const double du = (space.band_hi() - space.band_lo()) / kGrid;
      for (int g = 0; g < kGrid; ++g) {
        const double u = space.band_lo() + (g + 0.5) * du;
        const Eigen::VectorXd mark = Eigen::VectorXd::Constant(1, u);
        accumulate(mark, -1, space.band_density(u) * du * weight(mark, -1));
      }
    }
  }
  return table;
}

}  // namespace

ConditionProbeTable condition_probe(const AdditiveModel& model, const MarkSpace& space,
                                    const Eigen::VectorXd& y,
                                    const std::vector<Eigen::VectorXd>& directions,
                                    const std::vector<MarkSubset>& truncation_ladder,
                                    double threshold) {
  return probe_impl(
      space,
      [&](const Eigen::VectorXd& u, int) { return std::optional<Eigen::VectorXd>(delta(model, y, u)); },
      [](const Eigen::VectorXd&, int) { return 1.0; }, directions, truncation_ladder, threshold);
}

ConditionProbeTable condition_probe(const ThinnedModel& model, const Eigen::VectorXd& y,
                                    const std::vector<Eigen::VectorXd>& directions,
                                    const std::vector<MarkSubset>& truncation_ladder,
                                    double threshold) {
  return probe_impl(
      *model.base,
      [&](const Eigen::VectorXd& v, int) { return tilde_delta(model, y, v); },
      [&](const Eigen::VectorXd& v, int) { return model.rate(y, v); }, directions,
      truncation_ladder, threshold);
}

// --- endpoint functionals ----------------------------------------------------------

Functional endpoint_functional(const AdditiveModel& model, Eigen::VectorXd x0, double t) {
  Functional f;
  f.dimension = model.dim;
  f.name = model.name + "-endpoint";
  f.eval = [model, x0, t](const Configuration& c) {
    return simulate_additive(model, x0, t, c).terminal;
  };
  f.analytic = [model, x0, t](const Configuration& c, const DifferentialGrid& g, int i) {
    const Trajectory traj = simulate_additive(model, x0, t, c);
    return derivative_additive(model, traj, g, i);
  };
  return f;
}

Functional endpoint_functional(const ThinnedModel& model, Eigen::VectorXd x0, double t) {
  Functional f;
  f.dimension = model.dim;
  f.name = model.name + "-endpoint";
  f.eval = [model, x0, t](const Configuration& c) {
    return simulate_thinned_on(model, x0, t, c).terminal;
  };
  f.analytic = [model, x0, t](const Configuration& c, const DifferentialGrid& g, int i) {
    const Trajectory traj = simulate_thinned_on(model, x0, t, c);
    return derivative_thinned(model, traj, g, i);
  };
  return f;
}

}  // namespace jumpcalc
