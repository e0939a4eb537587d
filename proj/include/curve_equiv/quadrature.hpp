// Adaptive Simpson quadrature and bisection root refinement.
#pragma once

#include <functional>

#include "curve_equiv/errors.hpp"

namespace curve_equiv {

// Integral of f over [a, b] to absolute tolerance tol.  Throws
// quadrature_error when the refinement budget is exhausted or f is not finite.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

// Integral of |f| over [a, b]: locates sign changes of f on a scan grid,
// integrates f on each sign-constant piece, sums absolute values.
double integrate_abs(const std::function<double(double)>& f, double a, double b,
                     double tol, int scan_points = 129);

// Root of continuous g in [lo, hi]; requires a sign change (or a zero
// endpoint).  Bisection is branch-symmetric under g -> -g.
double bisect_root(const std::function<double(double)>& g, double lo, double hi,
                   double xtol, int max_iter = 200);

}  // namespace curve_equiv
