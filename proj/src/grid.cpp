#include "jumpcalc/grid.hpp"

#include <cmath>

#include "jumpcalc/errors.hpp"

namespace jumpcalc {

DifferentialGrid::DifferentialGrid(std::vector<GridCell> cells) : cells_(std::move(cells)) {
  if (cells_.empty()) throw std::invalid_argument("DifferentialGrid: no cells");
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    for (std::size_t j = i + 1; j < cells_.size(); ++j) {
      const bool time_disjoint =
          cells_[i].b() <= cells_[j].a() || cells_[j].b() <= cells_[i].a();
      if (time_disjoint) continue;
      if (!cells_[i].marks.disjoint_with(cells_[j].marks))
        throw std::invalid_argument("DifferentialGrid: product cells must be pairwise disjoint");
    }
  }
}

bool DifferentialGrid::in_cell(int i, double t, const Eigen::VectorXd& mark, int atom_index) const {
  const GridCell& c = cell(i);
  return t >= c.a() && t < c.b() && c.marks.contains(mark, atom_index);
}

Configuration grid_transform(const Configuration& config, const DifferentialGrid& grid,
                             const Eigen::VectorXd& z) {
  if (z.size() != grid.dimension())
    throw std::invalid_argument("grid_transform: parameter dimension mismatch");
  std::vector<ConfigPoint> pts = config.points();
  for (auto& p : pts) {
    for (int i = 0; i < grid.dimension(); ++i) {
      if (z[i] == 0.0 || !grid.in_cell(i, p.t, p.mark, p.atom)) continue;
      const double moved = flow(grid.cell(i).direction.h(), -z[i], p.t);
      if (!(moved >= 0) || moved >= config.window_end())
        throw window_error("grid_transform: transformed time left the window");
      p.t = moved;
      break;  // cells are disjoint, at most one can own the point
    }
  }
  return Configuration(config.window_end(), std::move(pts), config.source());
}

namespace {

// Neville tableau for quantities with an eps^2 error expansion (central
// differences).  Returns the extrapolated value and an error estimate from
// the last corrections.
struct Extrapolated {
  Eigen::VectorXd value;
  double err = 0;
};

Extrapolated richardson(const std::vector<Eigen::VectorXd>& d, std::span<const double> eps) {
  const std::size_t n = d.size();
  std::vector<std::vector<Eigen::VectorXd>> t(n);
  for (std::size_t j = 0; j < n; ++j) {
    t[j].resize(j + 1);
    t[j][0] = d[j];
    for (std::size_t k = 1; k <= j; ++k) {
      const double r = eps[j - k] / eps[j];
      const double w = r * r;
      t[j][k] = (w * t[j][k - 1] - t[j - 1][k - 1]) / (w - 1.0);
    }
  }
  Extrapolated out;
  out.value = t[n - 1][n - 1];
  if (n >= 2) {
    const double last_step = (t[n - 1][n - 1] - t[n - 2][n - 2]).cwiseAbs().maxCoeff();
    const double raw_gap = (t[n - 1][n - 1] - t[n - 1][0]).cwiseAbs().maxCoeff();
    out.err = std::max(last_step, 1e-3 * raw_gap);
  }
  return out;
}

}  // namespace

FdResult fd_derivative(const Functional& f, const Configuration& config,
                       const DifferentialGrid& grid, int i, std::span<const double> schedule,
                       double instability_tol) {
  if (schedule.empty()) throw std::invalid_argument("fd_derivative: empty schedule");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(grid.dimension());
  std::vector<Eigen::VectorXd> diffs;
  diffs.reserve(schedule.size());
  for (double eps : schedule) {
    z[i] = eps;
    const Eigen::VectorXd plus = f.eval(grid_transform(config, grid, z));
    z[i] = -eps;
    const Eigen::VectorXd minus = f.eval(grid_transform(config, grid, z));
    z[i] = 0;
    diffs.push_back((plus - minus) / (2.0 * eps));
  }
  FdResult out;
  if (diffs.size() == 1) {
    out.value = diffs[0];
    return out;
  }
  const Extrapolated ex = richardson(diffs, schedule);
  out.value = ex.value;
  out.err_est = ex.err;
  out.unstable = ex.err > instability_tol * (1.0 + out.value.cwiseAbs().maxCoeff());
  return out;
}

Eigen::MatrixXd jacobian_matrix(const Functional& f, const Configuration& config,
                                const DifferentialGrid& grid, DerivativeSource source,
                                std::vector<FdResult>* fd_diagnostics) {
  const int m = grid.dimension();
  if (f.dimension != m)
    throw std::invalid_argument("jacobian_matrix: functional dimension must equal grid dimension");
  Eigen::MatrixXd sigma(m, m);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd col;
    if (source == DerivativeSource::Analytic) {
      if (!f.analytic) throw std::invalid_argument("jacobian_matrix: functional has no analytic derivative");
      col = f.analytic(config, grid, i);
    } else {
      FdResult r = fd_derivative(f, config, grid, i);
      col = r.value;
      if (fd_diagnostics) fd_diagnostics->push_back(std::move(r));
    }
    if (col.size() != m) throw std::invalid_argument("jacobian_matrix: derivative dimension mismatch");
    sigma.col(i) = col;
  }
  return sigma;
}

bool nondegenerate(const Eigen::MatrixXd& sigma, double rel_tol) {
  if (sigma.rows() != sigma.cols()) throw std::invalid_argument("nondegenerate: matrix must be square");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return false;
  const double smax = sv[0];
  if (!(smax > 0)) return false;
  return sv[sv.size() - 1] > rel_tol * smax;
}

MixedSecond mixed_second_fd(const Functional& f, const Configuration& config,
                            const MarkSubset& gamma, const StretchFunction& g,
                            const StretchFunction& h, std::span<const double> schedule,
                            double instability_tol) {
  if (schedule.empty()) throw std::invalid_argument("mixed_second_fd: empty schedule");

  // Composite transform: inner direction applied first, outer applied to the
  // result.  outer=g corresponds to differentiating (d/dg f) along h.
  const auto value = [&](const StretchFunction& outer, double eo, const StretchFunction& inner,
                         double ei) {
    const Configuration c1 = transform_configuration(config, inner.scaled(ei), gamma);
    const Configuration c2 = transform_configuration(c1, outer.scaled(eo), gamma);
    return f.eval(c2)[0];
  };

  const auto mixed = [&](const StretchFunction& outer, const StretchFunction& inner, double eps) {
    return (value(outer, eps, inner, eps) - value(outer, eps, inner, -eps) -
            value(outer, -eps, inner, eps) + value(outer, -eps, inner, -eps)) /
           (4.0 * eps * eps);
  };

  std::vector<Eigen::VectorXd> d_hg, d_gh;
  for (double eps : schedule) {
    d_hg.push_back(Eigen::VectorXd::Constant(1, mixed(g, h, eps)));
    d_gh.push_back(Eigen::VectorXd::Constant(1, mixed(h, g, eps)));
  }

  MixedSecond out;
  if (schedule.size() == 1) {
    out.outer_h_inner_g = d_gh[0][0];
    out.outer_g_inner_h = d_hg[0][0];
    return out;
  }
  const Extrapolated eg = richardson(d_hg, schedule);
  const Extrapolated eh = richardson(d_gh, schedule);
  out.outer_g_inner_h = eg.value[0];
  out.outer_h_inner_g = eh.value[0];
  out.err_est = std::max(eg.err, eh.err);
  const double scale =
      1.0 + std::max(std::abs(out.outer_g_inner_h), std::abs(out.outer_h_inner_g));
  out.unstable = out.err_est > instability_tol * scale;
  return out;
}

}  // namespace jumpcalc
