#pragma once

#include <functional>

namespace ebmix {

struct Minimum {
  double x;
  double f;
};

/// Golden-section search for a minimum of f on [a, b] (assumed unimodal
/// there). Stops when the bracket is narrower than tol.
Minimum golden_section(const std::function<double(double)>& f, double a, double b,
                       double tol = 1e-10, int max_iter = 200);

/// Evaluates f on an n-point grid over [a, b], then refines around the best
/// grid point by golden-section search on its neighbouring cells.
Minimum grid_then_golden(const std::function<double(double)>& f, double a, double b,
                         int n = 200, double tol = 1e-10);

}  // namespace ebmix
