// Box-constrained nonlinear least squares per group (Levenberg-Marquardt with
// multi-start) and the distance-equality-constrained joint fit used by the
// constrained bootstrap.
#pragma once

#include <cstdint>

#include "curve_equiv/data.hpp"
#include "curve_equiv/model.hpp"

namespace curve_equiv {

struct FitOptions {
    int max_iter = 200;           // LM iterations per start
    double sse_rel_tol = 1e-10;   // relative SSE decrease convergence cut
    double step_tol = 1e-8;       // parameter step norm convergence cut
    int n_starts = 10;            // user start + (n_starts - 1) Latin-hypercube draws
    // Internal stream for the hypercube draws; fixed so fits are pure
    // functions of (data, start, options).
    std::uint64_t multistart_seed = 0x51a3c5e9d1b20ef7ULL;
};

struct FittedGroup {
    ParameterVector beta_hat;
    double sigma2_hat = 0.0;       // sse / n  (no degrees-of-freedom correction)
    double sse = 0.0;
    bool converged = false;
    int iterations = 0;            // LM iterations of the winning start
    bool underdetermined = false;  // n <= p; fit attempted anyway
};

struct FittedPair {
    FittedGroup g1, g2;
    double kappa_hat = 0.0;  // n / n1
};

FittedGroup ls_fit(const ModelSpec& spec, const GroupSample& g, const ParameterVector& start,
                   const FitOptions& opt = {});

FittedPair fit_both(const ModelSpec& spec1, const ModelSpec& spec2, const TwoGroupData& d,
                    const ParameterVector& start1, const ParameterVector& start2,
                    const FitOptions& opt = {});

// |d1 - eps| tolerance of the constrained fit.
double constrained_fit_tolerance(double eps);

struct ConstrainedFit {
    FittedPair pair;        // sse/sigma2 evaluated at the constrained solution
    double d1 = 0.0;        // distance at the returned parameters
    double gap = 0.0;       // |d1 - eps|
    int outer_rounds = 0;
    bool reused_start = false;  // start already satisfied the constraint
};

// Minimizes SSE1/n1 + SSE2/n2 subject to |d1(beta1, beta2) - eps| <= ctol
// (augmented Lagrangian outer loop, projected Nelder-Mead inner minimizer,
// secant restoration along the additive first parameter).  Throws
// procedure_error when the constraint cannot be met after restarts.
ConstrainedFit constrained_fit(const ModelSpec& spec1, const ModelSpec& spec2,
                               const TwoGroupData& d, double eps, const FittedPair& start,
                               const FitOptions& opt = {});

}  // namespace curve_equiv
