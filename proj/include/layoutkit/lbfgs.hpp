#pragma once

#include <Eigen/Core>

#include <functional>

namespace layoutkit::solver {

/// Objective returning f(x) and writing its gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  int history = 10;
  double gradient_tolerance = 1e-9;  // infinity norm
  int max_iterations = 500;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature
  int max_line_search_evals = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;  // gradient tolerance reached
};

/// Limited-memory BFGS with a strong-Wolfe line search. Always returns the
/// best iterate seen; `converged` is false when the tolerance was not met.
[[nodiscard]] LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options = {});

}  // namespace layoutkit::solver
