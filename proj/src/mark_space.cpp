#include "jumpcalc/mark_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "jumpcalc/errors.hpp"
#include "jumpcalc/numerics.hpp"

namespace jumpcalc {

namespace {
constexpr int kBandPanels = 4096;
}

MarkSpace MarkSpace::atomic(std::vector<Atom> atoms, std::string id) {
  if (atoms.empty()) throw std::invalid_argument("MarkSpace::atomic: no atoms");
  const Eigen::Index dim = atoms.front().mark.size();
  for (const auto& a : atoms) {
    if (a.mark.size() != dim) throw std::invalid_argument("MarkSpace::atomic: mixed mark dimensions");
    if (!(a.weight > 0) || !std::isfinite(a.weight))
      throw std::invalid_argument("MarkSpace::atomic: weights must be positive and finite");
  }
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      if (atoms[i].mark == atoms[j].mark)
        throw std::invalid_argument("MarkSpace::atomic: atoms must be distinct");

  MarkSpace s;
  s.is_atomic_ = true;
  s.dimension_ = static_cast<int>(dim);
  s.atoms_ = std::move(atoms);
  double total = 0;
  for (const auto& a : s.atoms_) total += a.weight;
  s.total_mass_ = total;
  s.id_ = std::move(id);
  return s;
}

MarkSpace MarkSpace::band(double lo, double hi, std::function<double(double)> density,
                          double total_mass, std::string id) {
  if (!(lo < hi)) throw std::invalid_argument("MarkSpace::band: need lo < hi");
  if (!(total_mass > 0)) throw std::invalid_argument("MarkSpace::band: total_mass must be positive");

  const double check = num::integrate([&](double u) { return density(u); }, lo, hi, 1e-12);
  if (std::abs(check - total_mass) > 1e-6 * std::abs(total_mass))
    throw std::invalid_argument("MarkSpace::band: declared total_mass disagrees with quadrature of the density");

  MarkSpace s;
  s.is_atomic_ = false;
  s.dimension_ = 1;
  s.band_lo_ = lo;
  s.band_hi_ = hi;
  s.density_ = std::move(density);
  s.total_mass_ = total_mass;
  s.id_ = std::move(id);

  // Cumulative-mass table on a uniform grid; Simpson per panel.
  s.cdf_.resize(kBandPanels + 1);
  s.cdf_[0] = 0;
  const double dx = (hi - lo) / kBandPanels;
  for (int i = 0; i < kBandPanels; ++i) {
    const double a = lo + i * dx, b = a + dx;
    const double panel = dx / 6.0 * (s.density_(a) + 4.0 * s.density_(0.5 * (a + b)) + s.density_(b));
    if (panel < 0 || !std::isfinite(panel))
      throw std::invalid_argument("MarkSpace::band: density must be finite and nonnegative");
    s.cdf_[i + 1] = s.cdf_[i] + panel;
  }
  return s;
}

const std::vector<Atom>& MarkSpace::atoms() const {
  if (!is_atomic_) throw std::logic_error("MarkSpace: not atomic");
  return atoms_;
}

double MarkSpace::cdf_at(double u) const {
  if (u <= band_lo_) return 0;
  if (u >= band_hi_) return cdf_.back();
  const double dx = (band_hi_ - band_lo_) / kBandPanels;
  const double pos = (u - band_lo_) / dx;
  const int i = std::min(static_cast<int>(pos), kBandPanels - 1);
  const double frac = pos - i;
  return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
}

double MarkSpace::cdf_inverse(double mass) const {
  mass = std::clamp(mass, 0.0, cdf_.back());
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), mass);
  int i = static_cast<int>(std::distance(cdf_.begin(), it)) - 1;
  i = std::clamp(i, 0, kBandPanels - 1);
  const double dx = (band_hi_ - band_lo_) / kBandPanels;
  const double seg = cdf_[i + 1] - cdf_[i];
  const double frac = seg > 0 ? (mass - cdf_[i]) / seg : 0.0;
  return band_lo_ + (i + frac) * dx;
}

double MarkSpace::band_mass(double a, double b) const {
  if (is_atomic_) throw std::logic_error("MarkSpace: not a band");
  if (!(a <= b)) return 0;
  return std::max(0.0, cdf_at(b) - cdf_at(a));
}

double MarkSpace::sample_band(rng::Stream& stream, double a, double b) const {
  if (is_atomic_) throw std::logic_error("MarkSpace: not a band");
  const double ca = cdf_at(a), cb = cdf_at(b);
  if (!(cb > ca)) throw degenerate_input("MarkSpace::sample_band: interval carries no mass");
  return cdf_inverse(ca + stream.uniform() * (cb - ca));
}

// --- MarkSubset -------------------------------------------------------------

MarkSubset MarkSubset::all(const MarkSpace& space) {
  MarkSubset s;
  s.kind_ = Kind::All;
  s.mass_ = space.total_mass();
  if (!space.is_atomic()) {
    s.lo_ = space.band_lo();
    s.hi_ = space.band_hi();
  } else {
    s.indices_.resize(space.atoms().size());
    for (std::size_t i = 0; i < s.indices_.size(); ++i) s.indices_[i] = static_cast<int>(i);
  }
  return s;
}

MarkSubset MarkSubset::none() {
  MarkSubset s;
  s.kind_ = Kind::None;
  s.mass_ = 0;
  return s;
}

MarkSubset MarkSubset::atom_indices(const MarkSpace& space, std::vector<int> indices) {
  if (!space.is_atomic()) throw std::invalid_argument("MarkSubset::atom_indices: space is not atomic");
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  double mass = 0;
  for (int i : indices) {
    if (i < 0 || i >= static_cast<int>(space.atoms().size()))
      throw std::invalid_argument("MarkSubset::atom_indices: index out of range");
    mass += space.atoms()[i].weight;
  }
  MarkSubset s;
  s.kind_ = indices.empty() ? Kind::None : Kind::AtomSet;
  s.indices_ = std::move(indices);
  s.mass_ = mass;
  return s;
}

MarkSubset MarkSubset::band_interval(const MarkSpace& space, double lo, double hi) {
  if (space.is_atomic()) throw std::invalid_argument("MarkSubset::band_interval: space is not a band");
  MarkSubset s;
  s.kind_ = Kind::BandInterval;
  s.lo_ = lo;
  s.hi_ = hi;
  s.mass_ = space.band_mass(lo, hi);
  return s;
}

MarkSubset MarkSubset::product(MarkSubset v_subset, double p_lo, double p_hi, double mass) {
  if (!(p_lo <= p_hi)) throw std::invalid_argument("MarkSubset::product: need p_lo <= p_hi");
  if (!(mass >= 0) || !std::isfinite(mass))
    throw std::invalid_argument("MarkSubset::product: mass must be finite and nonnegative");
  MarkSubset s;
  s.kind_ = Kind::Product;
  s.lo_ = p_lo;
  s.hi_ = p_hi;
  s.mass_ = mass;
  s.v_subset_ = std::make_shared<MarkSubset>(std::move(v_subset));
  return s;
}

bool MarkSubset::contains(const Eigen::VectorXd& mark, int atom_index) const {
  switch (kind_) {
    case Kind::All:
      return true;
    case Kind::None:
      return false;
    case Kind::AtomSet:
      return std::binary_search(indices_.begin(), indices_.end(), atom_index);
    case Kind::BandInterval:
      return mark.size() >= 1 && mark[0] >= lo_ && mark[0] < hi_;
    case Kind::Product: {
      if (mark.size() < 2) return false;
      const double p = mark[mark.size() - 1];
      if (!(p >= lo_ && p < hi_)) return false;
      return v_subset_->contains(mark.head(mark.size() - 1), atom_index);
    }
  }
  return false;
}

bool MarkSubset::disjoint_with(const MarkSubset& other) const {
  if (kind_ == Kind::None || other.kind_ == Kind::None) return true;
  if (kind_ == Kind::All || other.kind_ == Kind::All) return false;
  if (kind_ == Kind::AtomSet && other.kind_ == Kind::AtomSet) {
    std::vector<int> common;
    std::set_intersection(indices_.begin(), indices_.end(), other.indices_.begin(),
                          other.indices_.end(), std::back_inserter(common));
    return common.empty();
  }
  if (kind_ == Kind::BandInterval && other.kind_ == Kind::BandInterval)
    return hi_ <= other.lo_ || other.hi_ <= lo_;
  if (kind_ == Kind::Product && other.kind_ == Kind::Product) {
    if (hi_ <= other.lo_ || other.hi_ <= lo_) return true;
    return v_subset_->disjoint_with(*other.v_subset_);
  }
  throw std::invalid_argument("MarkSubset::disjoint_with: incomparable subset kinds");
}

MarkSubset MarkSubset::intersect(const MarkSubset& other, const MarkSpace& space) const {
  if (kind_ == Kind::None || other.kind_ == Kind::None) return none();
  if (kind_ == Kind::All) return other;
  if (other.kind_ == Kind::All) return *this;
  if (kind_ == Kind::AtomSet && other.kind_ == Kind::AtomSet) {
    std::vector<int> common;
    std::set_intersection(indices_.begin(), indices_.end(), other.indices_.begin(),
                          other.indices_.end(), std::back_inserter(common));
    return atom_indices(space, std::move(common));
  }
  if (kind_ == Kind::BandInterval && other.kind_ == Kind::BandInterval) {
    const double lo = std::max(lo_, other.lo_);
    const double hi = std::min(hi_, other.hi_);
    if (!(lo < hi)) return none();
    return band_interval(space, lo, hi);
  }
  throw std::invalid_argument("MarkSubset::intersect: incomparable subset kinds");
}

std::string MarkSubset::describe() const {
  switch (kind_) {
    case Kind::All:
      return "all";
    case Kind::None:
      return "none";
    case Kind::AtomSet: {
      std::string s = "atoms{";
      for (std::size_t i = 0; i < indices_.size(); ++i)
        s += (i ? "," : "") + std::to_string(indices_[i]);
      return s + "}";
    }
    case Kind::BandInterval:
      return "interval[" + std::to_string(lo_) + "," + std::to_string(hi_) + ")";
    case Kind::Product:
      return "product(" + v_subset_->describe() + " x [" + std::to_string(lo_) + "," +
             std::to_string(hi_) + "))";
  }
  return "?";
}

}  // namespace jumpcalc
