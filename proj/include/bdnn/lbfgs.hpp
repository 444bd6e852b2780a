#pragma once

#include <functional>

#include "bdnn/matrix.hpp"

namespace bdnn {

struct LbfgsConfig {
  int memory = 10;                  // history pairs
  int max_iterations = 50;
  double grad_tolerance = 1e-6;     // stop when ||g||_inf <= tol
  double wolfe_c1 = 1e-4;           // sufficient decrease
  double wolfe_c2 = 0.9;            // curvature
  int max_line_search_steps = 20;   // objective evaluations per line search

  void validate() const;
};

/// Evaluates f at x and fills grad (same dimension as x). Must be pure
/// with respect to x.
using ObjectiveFn = std::function<double(const Vec& x, Vec& grad)>;

struct LbfgsResult {
  Vec x;                           // best point found
  double f = 0.0;                  // objective at x
  int iterations = 0;              // accepted quasi-Newton steps
  bool converged = false;          // gradient tolerance reached
  bool line_search_failed = false; // stopped early, x is still the best point
};

/// Limited-memory BFGS with a strong-Wolfe line search (two-loop
/// recursion, cubic interpolation). Every accepted step satisfies the
/// Wolfe conditions, so the sequence of accepted values is non-increasing.
/// Line-search failure is non-fatal: the best point so far is returned
/// with the flag set.
LbfgsResult minimize(const ObjectiveFn& objective, const Vec& x0,
                     const LbfgsConfig& cfg);

}  // namespace bdnn
