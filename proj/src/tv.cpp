#include "jumpcalc/tv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpcalc/errors.hpp"

namespace jumpcalc::tv {

namespace {

struct Binning {
  std::vector<double> lo, hi;
  int bins_per_dim = 0;
  int dim = 0;

  std::size_t cells() const {
    std::size_t c = 1;
    for (int d = 0; d < dim; ++d) c *= static_cast<std::size_t>(bins_per_dim);
    return c;
  }
  std::size_t index(const Eigen::VectorXd& x) const {
    std::size_t idx = 0;
    for (int d = 0; d < dim; ++d) {
      const double w = hi[d] - lo[d];
      int b = 0;
      if (w > 0) {
        b = static_cast<int>((x[d] - lo[d]) / w * bins_per_dim);
        b = std::clamp(b, 0, bins_per_dim - 1);
      }
      idx = idx * static_cast<std::size_t>(bins_per_dim) + static_cast<std::size_t>(b);
    }
    return idx;
  }
};

std::vector<double> histogram(const std::vector<Eigen::VectorXd>& kept, std::uint64_t total,
                              const Binning& bins) {
  std::vector<double> h(bins.cells(), 0.0);
  const double w = total > 0 ? 1.0 / static_cast<double>(total) : 0.0;
  for (const auto& x : kept) h[bins.index(x)] += w;
  return h;
}

double half_l1(const std::vector<double>& pa, const std::vector<double>& pb) {
  double s = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) s += std::abs(pa[i] - pb[i]);
  return 0.5 * s;
}

double tv_between(const std::vector<Eigen::VectorXd>& ka, std::uint64_t ta,
                  const std::vector<Eigen::VectorXd>& kb, std::uint64_t tb, const Binning& bins) {
  return half_l1(histogram(ka, ta, bins), histogram(kb, tb, bins));
}

std::vector<Eigen::VectorXd> bootstrap_kept(const std::vector<Eigen::VectorXd>& kept,
                                            std::uint64_t total, rng::Stream& stream) {
  // Resample the path-level outcome: each of `total` paths is kept with the
  // empirical probability and, when kept, lands on one of the kept values.
  std::vector<Eigen::VectorXd> out;
  if (kept.empty()) return out;
  const double keep_prob = static_cast<double>(kept.size()) / static_cast<double>(total);
  std::uint64_t n_kept = 0;
  for (std::uint64_t i = 0; i < total; ++i)
    if (stream.uniform() < keep_prob) ++n_kept;
  out.reserve(n_kept);
  for (std::uint64_t i = 0; i < n_kept; ++i)
    out.push_back(kept[static_cast<std::size_t>(stream.next_u64() % kept.size())]);
  return out;
}

}  // namespace

TvReport estimate_tv(const WeightedSamples& a, const WeightedSamples& b, const TvOptions& opt) {
  if (a.kept.empty() || b.kept.empty())
    throw degenerate_input("estimate_tv: both sample sets must have kept points");
  if (a.total == 0 || b.total == 0) throw degenerate_input("estimate_tv: totals must be positive");

  const int dim = static_cast<int>(a.kept.front().size());
  Binning bins;
  bins.dim = dim;
  bins.bins_per_dim = opt.bins_per_dim;
  bins.lo.assign(dim, std::numeric_limits<double>::infinity());
  bins.hi.assign(dim, -std::numeric_limits<double>::infinity());
  for (const auto* set : {&a.kept, &b.kept}) {
    for (const auto& x : *set) {
      if (x.size() != dim) throw degenerate_input("estimate_tv: mixed sample dimensions");
      for (int d = 0; d < dim; ++d) {
        bins.lo[d] = std::min(bins.lo[d], x[d]);
        bins.hi[d] = std::max(bins.hi[d], x[d]);
      }
    }
  }

  TvReport r;
  r.dim = dim;
  r.bins_per_dim = opt.bins_per_dim;
  r.box_lo = bins.lo;
  r.box_hi = bins.hi;
  r.kept_a = a.kept.size();
  r.kept_b = b.kept.size();
  r.total_a = a.total;
  r.total_b = b.total;
  r.mass_a = static_cast<double>(r.kept_a) / static_cast<double>(r.total_a);
  r.mass_b = static_cast<double>(r.kept_b) / static_cast<double>(r.total_b);
  r.tv = tv_between(a.kept, a.total, b.kept, b.total, bins);

  // Same-law baseline: split the first sample set by index parity, identical
  // binning.  It measures the pure binning-noise floor of the estimator.
  {
    std::vector<Eigen::VectorXd> even, odd;
    for (std::size_t i = 0; i < a.kept.size(); ++i)
      (i % 2 == 0 ? even : odd).push_back(a.kept[i]);
    const std::uint64_t te = (a.total + 1) / 2, to = a.total / 2;
    if (!even.empty() && !odd.empty() && te > 0 && to > 0)
      r.baseline = tv_between(even, te, odd, to, bins);
  }

  // Percentile bootstrap around the point estimate.
  if (opt.bootstrap_resamples > 0) {
    rng::Stream stream = rng::Stream::derive(opt.bootstrap_seed, 0, rng::role::bootstrap);
    std::vector<double> replicas;
    replicas.reserve(static_cast<std::size_t>(opt.bootstrap_resamples));
    for (int rsm = 0; rsm < opt.bootstrap_resamples; ++rsm) {
      const auto ka = bootstrap_kept(a.kept, a.total, stream);
      const auto kb = bootstrap_kept(b.kept, b.total, stream);
      if (ka.empty() || kb.empty()) {
        replicas.push_back(r.tv);
        continue;
      }
      replicas.push_back(tv_between(ka, a.total, kb, b.total, bins));
    }
    std::sort(replicas.begin(), replicas.end());
    const double alpha = 0.5 * (1.0 - opt.ci_level);
    const auto pick = [&](double q) {
      const double pos = q * static_cast<double>(replicas.size() - 1);
      const std::size_t i = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(i);
      if (i + 1 < replicas.size()) return replicas[i] * (1 - frac) + replicas[i + 1] * frac;
      return replicas.back();
    };
    r.ci_lo = pick(alpha);
    r.ci_hi = pick(1.0 - alpha);
  } else {
    r.ci_lo = r.ci_hi = r.tv;
  }
  return r;
}

nlohmann::ordered_json to_json(const TvReport& r) {
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["tv"] = r.tv;
  j["ci_lo"] = r.ci_lo;
  j["ci_hi"] = r.ci_hi;
  j["baseline"] = r.baseline;
  j["mass_a"] = r.mass_a;
  j["mass_b"] = r.mass_b;
  j["kept_a"] = r.kept_a;
  j["kept_b"] = r.kept_b;
  j["total_a"] = r.total_a;
  j["total_b"] = r.total_b;
  j["bins_per_dim"] = r.bins_per_dim;
  j["dim"] = r.dim;
  j["box_lo"] = r.box_lo;
  j["box_hi"] = r.box_hi;
  return j;
}

}  // namespace jumpcalc::tv
