#include "layoutkit/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace layoutkit::solver {

namespace {

using Eigen::VectorXd;

struct LinePoint {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative
};

// Minimizer of the cubic interpolating two points with derivatives, or the
// bisection point when the cubic is degenerate or leaves the interval.
double cubic_step(const LinePoint& a, const LinePoint& b) {
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.step - b.step);
  const double disc = d1 * d1 - a.slope * b.slope;
  const double lo = std::min(a.step, b.step);
  const double hi = std::max(a.step, b.step);
  const double mid = 0.5 * (lo + hi);
  if (disc < 0.0) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
  const double t = b.step - (b.step - a.step) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
  if (!std::isfinite(t)) return mid;
  const double margin = 0.1 * (hi - lo);
  if (t < lo + margin || t > hi - margin) return mid;
  return t;
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const VectorXd& x, const VectorXd& dir, const LbfgsOptions& opt, int& evals)
      : f_(f), x_(x), dir_(dir), opt_(opt), evals_(evals), grad_(x.size()) {}

  // Returns true and fills the accepted point when strong Wolfe holds.
  bool run(double f0, double g0, double step, VectorXd& x_out, VectorXd& g_out, double& f_out) {
    const LinePoint zero{0.0, f0, g0};
    LinePoint prev = zero;
    for (int i = 0; i < opt_.max_line_search_evals; ++i) {
      const LinePoint cur = eval(step);
      if (!std::isfinite(cur.value) || cur.value > f0 + opt_.c1 * step * g0 || (i > 0 && cur.value >= prev.value)) {
        return zoom(zero, prev, cur, x_out, g_out, f_out);
      }
      if (std::abs(cur.slope) <= -opt_.c2 * g0) return accept(x_out, g_out, f_out, cur);
      if (cur.slope >= 0.0) return zoom(zero, cur, prev, x_out, g_out, f_out);
      prev = cur;
      step *= 2.0;
    }
    return false;
  }

 private:
  LinePoint eval(double step) {
    ++evals_;
    trial_ = x_ + step * dir_;
    const double v = f_(trial_, grad_);
    return {step, v, grad_.dot(dir_)};
  }

  bool accept(VectorXd& x_out, VectorXd& g_out, double& f_out, const LinePoint& p) {
    x_out = trial_;
    g_out = grad_;
    f_out = p.value;
    return true;
  }

  bool zoom(const LinePoint& zero, LinePoint lo, LinePoint hi, VectorXd& x_out, VectorXd& g_out, double& f_out) {
    // Non-finite trial values get bisected away.
    for (int i = 0; i < opt_.max_line_search_evals; ++i) {
      const double step = (std::isfinite(hi.value) && std::isfinite(hi.slope)) ? cubic_step(lo, hi)
                                                                              : 0.5 * (lo.step + hi.step);
      if (std::abs(hi.step - lo.step) < 1e-16 * std::max(1.0, std::abs(lo.step))) break;
      const LinePoint cur = eval(step);
      if (!std::isfinite(cur.value) || cur.value > zero.value + opt_.c1 * step * zero.slope || cur.value >= lo.value) {
        hi = cur;
      } else {
        if (std::abs(cur.slope) <= -opt_.c2 * zero.slope) return accept(x_out, g_out, f_out, cur);
        if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
        lo = cur;
      }
    }
    // Fall back to the best sufficient-decrease point found, if any.
    if (lo.step > 0.0 && lo.value < zero.value) {
      eval(lo.step);
      return accept(x_out, g_out, f_out, lo);
    }
    return false;
  }

  const Objective& f_;
  const VectorXd& x_;
  const VectorXd& dir_;
  const LbfgsOptions& opt_;
  int& evals_;
  VectorXd grad_;
  VectorXd trial_;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& f, VectorXd x0, const LbfgsOptions& opt) {
  LbfgsResult res;
  const Eigen::Index n = x0.size();
  VectorXd x = std::move(x0);
  VectorXd g(n);
  double fx = f(x, g);
  res.evaluations = 1;
  res.x = x;
  res.value = fx;
  res.gradient_norm = n > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
  if (n == 0 || res.gradient_norm <= opt.gradient_tolerance) {
    res.converged = true;
    return res;
  }

  std::deque<VectorXd> s_hist;
  std::deque<VectorXd> y_hist;
  std::deque<double> rho_hist;
  std::vector<double> alpha(static_cast<std::size_t>(opt.history));
  VectorXd x_new(n);
  VectorXd g_new(n);

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    // Two-loop recursion.
    VectorXd dir = -g;
    const int m = static_cast<int>(s_hist.size());
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(dir);
      dir -= alpha[i] * y_hist[i];
    }
    if (m > 0) dir *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      // Lost descent; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      slope = g.dot(dir);
    }
    const double step0 = m == 0 ? std::min(1.0, 1.0 / std::max(dir.norm(), 1e-300)) : 1.0;

    double f_new = fx;
    LineSearch ls(f, x, dir, opt, res.evaluations);
    if (!ls.run(fx, slope, step0, x_new, g_new, f_new)) {
      if (m == 0) break;  // steepest descent failed too
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    res.iterations = iter + 1;

    const VectorXd s = x_new - x;
    const VectorXd y = g_new - g;
    const double sy = s.dot(y);
    x = x_new;
    g = g_new;
    fx = f_new;
    if (fx < res.value) {
      res.x = x;
      res.value = fx;
    }
    res.gradient_norm = g.cwiseAbs().maxCoeff();
    if (res.gradient_norm <= opt.gradient_tolerance) {
      res.x = x;
      res.value = fx;
      res.converged = true;
      return res;
    }
    if (sy > 1e-300) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
  }
  return res;
}

}  // namespace layoutkit::solver
