#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "jumpcalc/rng.hpp"

namespace jumpcalc {

struct Atom {
  Eigen::VectorXd mark;
  double weight = 0;
};

// Finite-mass truncation of the mark intensity measure.  Either a list of
// weighted atoms or a one-dimensional band with a density.  All sampling in
// the library happens against such truncations; infinite-mass intensities are
// represented by a family of truncations declared by the caller.
class MarkSpace {
 public:
  static MarkSpace atomic(std::vector<Atom> atoms, std::string id = "atomic");
  // Declared total_mass is validated against quadrature of the density to
  // 1e-6 relative.
  static MarkSpace band(double lo, double hi, std::function<double(double)> density,
                        double total_mass, std::string id = "band");

  bool is_atomic() const { return is_atomic_; }
  int dimension() const { return dimension_; }
  double total_mass() const { return total_mass_; }
  const std::string& id() const { return id_; }

  const std::vector<Atom>& atoms() const;
  double band_lo() const { return band_lo_; }
  double band_hi() const { return band_hi_; }
  double band_density(double u) const { return density_(u); }

  // Mass of the sub-interval [a, b) of a band truncation.
  double band_mass(double a, double b) const;
  // Sample from the density conditioned on [a, b); inverse CDF on the
  // precomputed table.
  double sample_band(rng::Stream& stream, double a, double b) const;

 private:
  MarkSpace() = default;

  bool is_atomic_ = true;
  int dimension_ = 1;
  double total_mass_ = 0;
  std::string id_;

  std::vector<Atom> atoms_;

  double band_lo_ = 0, band_hi_ = 0;
  std::function<double(double)> density_;
  std::vector<double> cdf_;  // cumulative masses at grid nodes
  double cdf_at(double u) const;
  double cdf_inverse(double mass) const;
};

// Predicate over marks with a precomputed finite mass under a given
// truncation.  Membership for atomic spaces is by atom index, never by
// floating-point equality of the mark vector.
class MarkSubset {
 public:
  enum class Kind { All, None, AtomSet, BandInterval, Product };

  static MarkSubset all(const MarkSpace& space);
  static MarkSubset none();
  static MarkSubset atom_indices(const MarkSpace& space, std::vector<int> indices);
  static MarkSubset band_interval(const MarkSpace& space, double lo, double hi);
  // Product subset over marks of the form [v; p]: v in `v_subset`, p in
  // [p_lo, p_hi).  `mass` is supplied by whoever knows the product intensity.
  static MarkSubset product(MarkSubset v_subset, double p_lo, double p_hi, double mass);

  Kind kind() const { return kind_; }
  double mass() const { return mass_; }
  bool contains(const Eigen::VectorXd& mark, int atom_index) const;

  const std::vector<int>& indices() const { return indices_; }
  double interval_lo() const { return lo_; }
  double interval_hi() const { return hi_; }
  const MarkSubset& v_subset() const { return *v_subset_; }
  double p_lo() const { return lo_; }
  double p_hi() const { return hi_; }

  // Exact set algebra on the structured kinds; used by grid validation and
  // the restriction laws.  Throws on incomparable kinds.
  bool disjoint_with(const MarkSubset& other) const;
  MarkSubset intersect(const MarkSubset& other, const MarkSpace& space) const;

  std::string describe() const;

 private:
  MarkSubset() = default;

  Kind kind_ = Kind::None;
  double mass_ = 0;
  std::vector<int> indices_;       // AtomSet (sorted)
  double lo_ = 0, hi_ = 0;         // BandInterval, or the p-interval of Product
  std::shared_ptr<const MarkSubset> v_subset_;  // Product
};

}  // namespace jumpcalc
