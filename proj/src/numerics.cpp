#include "jumpcalc/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "jumpcalc/errors.hpp"

namespace jumpcalc::num {

double compensated_total(std::span<const double> xs) {
  double sum = 0, comp = 0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  s.mean = compensated_total(xs) / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double sq = 0, comp = 0;
  for (double x : xs) {
    const double d = (x - s.mean) * (x - s.mean);
    const double t = sq + d;
    comp += (std::abs(sq) >= d) ? (sq - t) + d : (d - t) + sq;
    sq = t;
  }
  s.var = (sq + comp) / static_cast<double>(s.n - 1);
  s.sd = std::sqrt(std::max(0.0, s.var));
  s.se = s.sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

double variance_se(std::span<const double> xs) {
  const Summary s = summarize(xs);
  if (s.n < 4) return 0;
  double m4 = 0;
  for (double x : xs) {
    const double d = x - s.mean;
    m4 += d * d * d * d;
  }
  m4 /= static_cast<double>(s.n);
  const double v = s.var * static_cast<double>(s.n - 1) / static_cast<double>(s.n);
  const double var_of_var = (m4 - v * v) / static_cast<double>(s.n);
  return std::sqrt(std::max(0.0, var_of_var));
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double r = simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
  if (!std::isfinite(r)) throw numeric_error("integrate: non-finite quadrature result");
  return r;
}

Eigen::VectorXd ode45(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
                      Eigen::VectorXd y, double t0, double t1, double tol) {
  if (!(t1 >= t0)) throw std::domain_error("ode45: t1 must be >= t0");
  if (t1 == t0) return y;

  // Dormand-Prince coefficients.
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                      e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  const double span = t1 - t0;
  double t = t0;
  double h = span / 8.0;
  const double hmin = std::max(span, 1.0) * 1e-15;
  int rejects_in_a_row = 0;

  while (t < t1) {
    h = std::min(h, t1 - t);
    const Eigen::VectorXd k1 = field(y);
    const Eigen::VectorXd k2 = field(y + h * (a21 * k1));
    const Eigen::VectorXd k3 = field(y + h * (a31 * k1 + a32 * k2));
    const Eigen::VectorXd k4 = field(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Eigen::VectorXd k5 = field(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXd k6 =
        field(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Eigen::VectorXd y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Eigen::VectorXd k7 = field(y5);
    const Eigen::VectorXd err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double scaled = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      scaled = std::max(scaled, std::abs(err[i]) / sc);
    }
    if (!std::isfinite(scaled)) throw numeric_error("ode45: non-finite state");

    if (scaled <= 1.0) {
      t += h;
      y = y5;
      rejects_in_a_row = 0;
      const double grow = scaled > 0 ? 0.9 * std::pow(scaled, -0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
    } else {
      h *= std::clamp(0.9 * std::pow(scaled, -0.2), 0.1, 0.9);
      if (++rejects_in_a_row > 200 || h < hmin)
        throw numeric_error("ode45: step size underflow");
    }
  }
  return y;
}

}  // namespace jumpcalc::num
