#include "jumpcalc/stretch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpcalc/errors.hpp"

namespace jumpcalc {

StretchFunction::StretchFunction(std::vector<double> breakpoints, std::vector<double> values)
    : bp_(std::move(breakpoints)), vals_(std::move(values)) {
  if (bp_.empty() || bp_.front() != 0.0)
    throw std::invalid_argument("StretchFunction: breakpoints must start at 0");
  if (vals_.size() + 1 != bp_.size())
    throw std::invalid_argument("StretchFunction: need one value per segment");
  for (std::size_t i = 1; i < bp_.size(); ++i)
    if (!(bp_[i] > bp_[i - 1]) || !std::isfinite(bp_[i]))
      throw std::invalid_argument("StretchFunction: breakpoints must be finite and increasing");
  for (double v : vals_)
    if (!std::isfinite(v)) throw std::invalid_argument("StretchFunction: values must be finite");
  jbp_.resize(bp_.size());
  jbp_[0] = 0;
  for (std::size_t k = 0; k + 1 < bp_.size(); ++k)
    jbp_[k + 1] = jbp_[k] + vals_[k] * (bp_[k + 1] - bp_[k]);
}

StretchFunction StretchFunction::zero() { return StretchFunction({0.0}, {}); }

StretchFunction StretchFunction::bump(double a, double b) {
  if (!(0 <= a && a < b)) throw std::invalid_argument("StretchFunction::bump: need 0 <= a < b");
  const double mid = a + 0.5 * (b - a);
  if (a == 0.0) return StretchFunction({0.0, mid, b}, {1.0, -1.0});
  return StretchFunction({0.0, a, mid, b}, {0.0, 1.0, -1.0});
}

bool StretchFunction::is_zero() const {
  for (double v : vals_)
    if (v != 0.0) return false;
  return true;
}

double StretchFunction::operator()(double x) const {
  if (x < 0) throw std::domain_error("StretchFunction: negative time");
  if (x >= bp_.back()) return 0.0;
  const auto it = std::upper_bound(bp_.begin(), bp_.end(), x);
  const std::size_t k = static_cast<std::size_t>(std::distance(bp_.begin(), it)) - 1;
  return vals_[k];
}

double StretchFunction::J(double x) const {
  if (x < 0) throw std::domain_error("StretchFunction: negative time");
  if (x >= bp_.back()) return jbp_.back();
  const auto it = std::upper_bound(bp_.begin(), bp_.end(), x);
  const std::size_t k = static_cast<std::size_t>(std::distance(bp_.begin(), it)) - 1;
  return jbp_[k] + vals_[k] * (x - bp_[k]);
}

double StretchFunction::influence_end() const {
  return bp_.back() + std::max(0.0, -jbp_.back());
}

StretchFunction StretchFunction::scaled(double factor) const {
  std::vector<double> v = vals_;
  for (double& x : v) x *= factor;
  return StretchFunction(bp_, std::move(v));
}

// --- flow --------------------------------------------------------------------

FlowResult flow_with_jacobian(const StretchFunction& h, double t, double x) {
  if (x < 0) throw std::domain_error("flow: negative starting point");
  if (!std::isfinite(t)) throw std::domain_error("flow: non-finite parameter");
  FlowResult out{x, 0.0};
  if (t == 0.0 || h.is_zero()) return out;

  const auto& bp = h.breakpoints();
  const auto& vals = h.values();
  const std::size_t K = vals.size();
  const double inf = std::numeric_limits<double>::infinity();

  double z = x;
  double remaining = t;
  double logjac = 0;
  int guard = static_cast<int>(4 * K + 16);

  while (remaining != 0.0 && guard-- > 0) {
    const double v = h.J(z);
    if (v == 0.0) break;  // fixed point: the flow never leaves it
    const int dir = ((v > 0) == (remaining > 0)) ? +1 : -1;

    // Segment of J containing z, biased by motion direction on exact hits.
    double beta, lower, upper, alpha;
    if (z > bp.back() || (z == bp.back() && dir > 0)) {
      beta = 0.0;
      alpha = h.terminal_velocity();
      lower = bp.back();
      upper = inf;
    } else {
      auto it = std::upper_bound(bp.begin(), bp.end(), z);
      std::size_t k = static_cast<std::size_t>(std::distance(bp.begin(), it)) - 1;
      if (z == bp[k] && dir < 0 && k > 0) --k;
      beta = vals[k];
      lower = bp[k];
      upper = (k + 1 < bp.size()) ? bp[k + 1] : inf;
      alpha = h.J(bp[k]) - beta * bp[k];
    }

    const double bound = dir > 0 ? upper : lower;

    if (beta == 0.0) {
      // Constant speed alpha within the segment.
      if (!std::isfinite(bound)) {
        z += alpha * remaining;
        remaining = 0;
        break;
      }
      const double t_hit = (bound - z) / alpha;
      if (std::abs(t_hit) >= std::abs(remaining) || (t_hit > 0) != (remaining > 0)) {
        z += alpha * remaining;
        remaining = 0;
      } else {
        z = bound;
        remaining -= t_hit;
      }
    } else {
      const double zstar = -alpha / beta;
      const double w0 = z - zstar;
      const double wb = bound - zstar;
      const double ratio = wb / w0;
      bool reach = std::isfinite(bound) && ratio > 0;
      double t_hit = 0;
      if (reach) {
        t_hit = std::log(ratio) / beta;
        reach = (t_hit > 0) == (remaining > 0) && t_hit != 0;
      }
      if (!reach || std::abs(t_hit) >= std::abs(remaining)) {
        z = zstar + w0 * std::exp(beta * remaining);
        logjac += beta * remaining;
        remaining = 0;
      } else {
        z = bound;
        logjac += beta * t_hit;
        remaining -= t_hit;
      }
    }
  }

  if (guard <= 0) throw numeric_error("flow: segment iteration did not terminate");
  if (!std::isfinite(z) || !std::isfinite(logjac)) throw numeric_error("flow: non-finite result");
  out.x = z;
  out.log_jacobian = logjac;
  return out;
}

double flow(const StretchFunction& h, double t, double x) { return flow_with_jacobian(h, t, x).x; }

double log_jacobian(const StretchFunction& h, double x) {
  return flow_with_jacobian(h, 1.0, x).log_jacobian;
}

// --- grid directions ----------------------------------------------------------

GridDirection::GridDirection(double a, double b) : GridDirection(a, b, StretchFunction::bump(a, b)) {}

GridDirection::GridDirection(double a, double b, StretchFunction h)
    : a_(a), b_(b), h_(std::move(h)) {
  if (!(0 <= a_ && a_ < b_)) throw std::invalid_argument("GridDirection: need 0 <= a < b");

  const auto& bp = h_.breakpoints();
  const auto& vals = h_.values();
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (vals[k] == 0.0) continue;
    if (bp[k] < a_ - 1e-12 || bp[k + 1] > b_ + 1e-12)
      throw std::invalid_argument("GridDirection: direction must vanish outside [a, b]");
  }
  double jmax = 0;
  for (std::size_t k = 0; k < bp.size(); ++k) jmax = std::max(jmax, std::abs(h_.J(bp[k])));
  const double tol = 1e-12 * std::max(1.0, jmax);
  if (std::abs(h_.J(a_)) > tol || std::abs(h_.J(b_)) > tol || std::abs(h_.terminal_velocity()) > tol)
    throw std::invalid_argument("GridDirection: J must vanish at the cell edges");

  bool has_interior = false;
  for (std::size_t k = 0; k < bp.size(); ++k) {
    if (bp[k] > a_ + tol && bp[k] < b_ - tol) {
      has_interior = true;
      if (!(h_.J(bp[k]) > tol))
        throw std::invalid_argument("GridDirection: J must be strictly positive inside (a, b)");
    }
  }
  if (!has_interior) throw std::invalid_argument("GridDirection: direction is degenerate on (a, b)");
}

// --- configuration-level operations -------------------------------------------

Configuration transform_configuration(const Configuration& config, const StretchFunction& h,
                                      const MarkSubset& subset) {
  std::vector<ConfigPoint> pts = config.points();
  for (auto& p : pts) {
    if (!subset.contains(p.mark, p.atom)) continue;
    const double moved = flow(h, -1.0, p.t);
    if (!(moved >= 0) || moved >= config.window_end())
      throw window_error("transform_configuration: transformed time left the window");
    p.t = moved;
  }
  return Configuration(config.window_end(), std::move(pts), config.source());
}

double density(const Configuration& config, const StretchFunction& h, const MarkSubset& subset) {
  if (h.is_zero()) return 1.0;
  const double influence = h.influence_end();
  if (config.window_end() < influence)
    throw window_error("density: window must cover the influence zone of the direction");

  double sum_r = 0;
  for (const auto& p : config.points()) {
    if (p.t >= influence) break;
    if (!subset.contains(p.mark, p.atom)) continue;
    sum_r += log_jacobian(h, p.t);
  }
  const double tstar = influence + 1.0;
  const double limit_term = flow(h, 1.0, tstar) - tstar;
  return std::exp(sum_r - limit_term * subset.mass());
}

double log_derivative_rho(const Configuration& config, const StretchFunction& h,
                          const MarkSubset& subset) {
  if (h.is_zero()) return 0.0;
  if (config.window_end() < h.support_end())
    throw window_error("log_derivative_rho: window must cover the support of the direction");
  double sum_h = 0;
  for (const auto& p : config.points()) {
    if (p.t >= h.support_end()) break;
    if (!subset.contains(p.mark, p.atom)) continue;
    sum_h += h(p.t);
  }
  const double compensator = subset.mass() * h.J(config.window_end());
  return -(sum_h - compensator);
}

}  // namespace jumpcalc
