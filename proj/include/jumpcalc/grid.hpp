#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jumpcalc/configuration.hpp"
#include "jumpcalc/stretch.hpp"

namespace jumpcalc {

struct GridCell {
  GridDirection direction;
  MarkSubset marks;
  double a() const { return direction.a(); }
  double b() const { return direction.b(); }
};

// m disjoint product cells [a_i, b_i) x Gamma_i, each with a direction whose
// flow keeps the cell invariant.  Generates the additive m-parameter
// transformation group of configurations.
class DifferentialGrid {
 public:
  explicit DifferentialGrid(std::vector<GridCell> cells);

  int dimension() const { return static_cast<int>(cells_.size()); }
  const GridCell& cell(int i) const { return cells_.at(static_cast<std::size_t>(i)); }
  const std::vector<GridCell>& cells() const { return cells_; }

  // True when the point (t, mark) lies in cell i.
  bool in_cell(int i, double t, const Eigen::VectorXd& mark, int atom_index) const;

 private:
  std::vector<GridCell> cells_;
};

// Applies the cell transformations with parameter vector z (one component per
// cell).  Cells are disjoint and each flow keeps its cell invariant, so the
// result is independent of application order; we apply all cells in one pass.
Configuration grid_transform(const Configuration& config, const DifferentialGrid& grid,
                             const Eigen::VectorXd& z);

// A vector-valued functional of configurations, with an optional analytic
// grid derivative supplied by the model that produced it.
struct Functional {
  int dimension = 1;
  std::string name;
  std::function<Eigen::VectorXd(const Configuration&)> eval;
  std::function<Eigen::VectorXd(const Configuration&, const DifferentialGrid&, int)> analytic;
};

struct FdResult {
  Eigen::VectorXd value;
  double err_est = 0;
  bool unstable = false;
};

inline constexpr double kDefaultFdSchedule[] = {1e-2, 1e-3, 1e-4};

// Central differences along direction i of the grid, Richardson-extrapolated
// over the schedule (largest step first).  Never averages away instability:
// when the tableau fails to settle the value is still returned, flagged.
FdResult fd_derivative(const Functional& f, const Configuration& config,
                       const DifferentialGrid& grid, int i,
                       std::span<const double> schedule = kDefaultFdSchedule,
                       double instability_tol = 1e-3);

enum class DerivativeSource { Fd, Analytic };

// Column i holds the derivative of f along direction i.
Eigen::MatrixXd jacobian_matrix(const Functional& f, const Configuration& config,
                                const DifferentialGrid& grid, DerivativeSource source,
                                std::vector<FdResult>* fd_diagnostics = nullptr);

// Smallest singular value above rel_tol times the largest.
bool nondegenerate(const Eigen::MatrixXd& sigma, double rel_tol = 1e-8);

struct MixedSecond {
  double outer_h_inner_g = 0;  // d/dh applied to (d/dg f)
  double outer_g_inner_h = 0;  // d/dg applied to (d/dh f)
  double err_est = 0;
  bool unstable = false;
};

// Two mixed second-order differences of a scalar functional along directions
// g and h acting on a shared mark subset; the pair exposes their
// non-commutativity.
MixedSecond mixed_second_fd(const Functional& f, const Configuration& config,
                            const MarkSubset& gamma, const StretchFunction& g,
                            const StretchFunction& h,
                            std::span<const double> schedule = kDefaultFdSchedule,
                            double instability_tol = 1e-3);

}  // namespace jumpcalc
