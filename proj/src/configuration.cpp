#include "jumpcalc/configuration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jumpcalc/errors.hpp"
#include "jumpcalc/numerics.hpp"

namespace jumpcalc {

Configuration::Configuration(double window_end, std::vector<ConfigPoint> points,
                             std::string source_id)
    : window_end_(window_end), points_(std::move(points)), source_(std::move(source_id)) {
  if (!(window_end_ > 0)) throw std::domain_error("Configuration: window end must be positive");
  std::stable_sort(points_.begin(), points_.end(),
                   [](const ConfigPoint& a, const ConfigPoint& b) { return a.t < b.t; });
  for (auto& p : points_) {
    if (!std::isfinite(p.t) || p.t < 0 || p.t >= window_end_)
      throw window_error("Configuration: point time outside [0, T)");
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    while (points_[i].t <= points_[i - 1].t) {
      points_[i].t = std::nextafter(points_[i - 1].t, window_end_);
      ++ties_fixed_;
      if (points_[i].t >= window_end_)
        throw window_error("Configuration: tie fix pushed a point past the window");
    }
  }
}

Configuration sample_configuration(const MarkSpace& space, const MarkSubset& subset, double T,
                                   rng::Stream stream) {
  if (!(T > 0)) throw std::domain_error("sample_configuration: T must be positive");
  const double mass = subset.mass();
  if (!std::isfinite(mass) || mass < 0)
    throw std::invalid_argument("sample_configuration: subset mass must be finite and nonnegative");
  if (subset.kind() == MarkSubset::Kind::Product)
    throw std::invalid_argument("sample_configuration: product subsets are sampled by the thinned solver");

  std::vector<ConfigPoint> pts;
  const std::uint64_t n = stream.poisson(mass * T);
  pts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    ConfigPoint p;
    p.t = stream.uniform() * T;
    pts.push_back(std::move(p));
  }
  std::sort(pts.begin(), pts.end(),
            [](const ConfigPoint& a, const ConfigPoint& b) { return a.t < b.t; });

  if (n > 0) {
    if (space.is_atomic()) {
      std::vector<int> allowed;
      std::vector<double> weights;
      for (std::size_t i = 0; i < space.atoms().size(); ++i) {
        if (subset.contains(space.atoms()[i].mark, static_cast<int>(i))) {
          allowed.push_back(static_cast<int>(i));
          weights.push_back(space.atoms()[i].weight);
        }
      }
      if (allowed.empty()) throw std::invalid_argument("sample_configuration: subset carries no atoms but positive count");
      for (auto& p : pts) {
        const int idx = allowed[stream.categorical(weights)];
        p.atom = idx;
        p.mark = space.atoms()[idx].mark;
      }
    } else {
      double lo = space.band_lo(), hi = space.band_hi();
      if (subset.kind() == MarkSubset::Kind::BandInterval || subset.kind() == MarkSubset::Kind::All) {
        lo = std::max(lo, subset.interval_lo());
        hi = std::min(hi, subset.interval_hi());
      }
      for (auto& p : pts) {
        p.mark = Eigen::VectorXd::Constant(1, space.sample_band(stream, lo, hi));
        p.atom = -1;
      }
    }
  }
  return Configuration(T, std::move(pts), space.id() + "/" + subset.describe());
}

Configuration sample_configuration(const MarkSpace& space, const MarkSubset& subset, double T,
                                   std::uint64_t seed) {
  return sample_configuration(space, subset, T, rng::Stream(seed));
}

int count(const Configuration& config, double t, const MarkSubset& subset) {
  if (!(t >= 0) || t > config.window_end())
    throw std::domain_error("count: t outside [0, T]");
  int c = 0;
  for (const auto& p : config.points()) {
    if (p.t > t) break;
    if (subset.contains(p.mark, p.atom)) ++c;
  }
  return c;
}

double integrate(const Configuration& config,
                 const std::function<double(double, const Eigen::VectorXd&)>& f, bool compensate,
                 const MarkSpace& space, const MarkSubset& subset) {
  std::vector<double> terms;
  terms.reserve(config.size());
  for (const auto& p : config.points()) {
    if (!subset.contains(p.mark, p.atom)) continue;
    const double v = f(p.t, p.mark);
    if (!std::isfinite(v)) throw numeric_error("integrate: non-finite integrand value at a point");
    terms.push_back(v);
  }
  double total = num::compensated_total(terms);

  if (compensate) {
    const double T = config.window_end();
    double comp = 0;
    if (space.is_atomic()) {
      for (std::size_t i = 0; i < space.atoms().size(); ++i) {
        const auto& a = space.atoms()[i];
        if (!subset.contains(a.mark, static_cast<int>(i))) continue;
        comp += a.weight * num::integrate([&](double t) { return f(t, a.mark); }, 0, T, 1e-10);
      }
    } else {
      double lo = space.band_lo(), hi = space.band_hi();
      if (subset.kind() == MarkSubset::Kind::BandInterval || subset.kind() == MarkSubset::Kind::All) {
        lo = std::max(lo, subset.interval_lo());
        hi = std::min(hi, subset.interval_hi());
      }
      if (lo < hi) {
        Eigen::VectorXd mark(1);
        comp = num::integrate(
            [&](double u) {
              Eigen::VectorXd m = Eigen::VectorXd::Constant(1, u);
              const double inner = num::integrate([&](double t) { return f(t, m); }, 0, T, 1e-10);
              return space.band_density(u) * inner;
            },
            lo, hi, 1e-9);
      }
    }
    if (!std::isfinite(comp)) throw numeric_error("integrate: non-finite compensator");
    total -= comp;
  }
  return total;
}

Configuration restrict_to(const Configuration& config, const MarkSubset& subset) {
  std::vector<ConfigPoint> pts;
  for (const auto& p : config.points())
    if (subset.contains(p.mark, p.atom)) pts.push_back(p);
  return Configuration(config.window_end(), std::move(pts), config.source());
}

std::vector<double> jump_times(const Configuration& config, const MarkSubset& subset) {
  std::vector<double> ts;
  for (const auto& p : config.points())
    if (subset.contains(p.mark, p.atom)) ts.push_back(p.t);
  return ts;
}

std::string to_csv(const Configuration& config) {
  std::ostringstream os;
  os.precision(17);
  const int dim = config.size() ? static_cast<int>(config.points().front().mark.size()) : 0;
  os << "t";
  for (int d = 0; d < dim; ++d) os << ",mark" << d;
  os << "\n";
  for (const auto& p : config.points()) {
    os << p.t;
    for (int d = 0; d < dim; ++d) os << "," << p.mark[d];
    os << "\n";
  }
  return os.str();
}

}  // namespace jumpcalc
