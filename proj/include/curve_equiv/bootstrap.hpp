// Parametric bootstrap procedures: CI + dual test resampled at the
// unconstrained fit, the constrained bootstrap test resampled at the
// distance-boundary fit, and the derivative-statistic variant.
#pragma once

#include <cstdint>
#include <functional>
#include <limits>

#include "curve_equiv/data.hpp"
#include "curve_equiv/fit.hpp"
#include "curve_equiv/inference.hpp"
#include "curve_equiv/report.hpp"

namespace curve_equiv {

// Threshold rule n -> s_n for the derivative statistic.
using SnRule = std::function<double(std::size_t)>;

// Default s_n = sqrt(n / log n): the threshold 1/s_n matches the null-set
// threshold at const_c = 1.
double default_sn(std::size_t n);

struct BootstrapConfig {
    std::size_t B = 300;
    double alpha = 0.05;
    double eps = 1.0;  // tests only
    std::uint64_t seed = 0;
    double max_dropped_frac = 0.10;  // hard failure above this dropped fraction
    // Derivative test only: resample at the unconstrained fit even when
    // d1_hat < eps (the branch rule is the default).
    bool resample_unconstrained = false;
    SnRule sn_rule;  // empty -> default_sn
    FitOptions fit{};
    // Starts for the original fit; empty -> parameter box midpoint.
    ParameterVector start1, start2;
};

struct BootReplicate {
    double d1_star = std::numeric_limits<double>::quiet_NaN();
    double phi_star = std::numeric_limits<double>::quiet_NaN();
    ParameterVector beta1_star, beta2_star;
    std::uint64_t seed = 0;
};

// New responses m(x, beta) + N(0, sigma2) on the same design (levels and
// per-level counts) as `design`.  Deterministic draw order: group 1 levels
// ascending then group 2, observations in stored order.
TwoGroupData resample(const ModelSpec& spec1, const ModelSpec& spec2,
                      const TwoGroupData& design, const ParameterVector& beta1,
                      const ParameterVector& beta2, double sigma2_1, double sigma2_2,
                      std::uint64_t seed);

// [0, (1-alpha)-quantile of the replicate distances).
CiReport bootstrap_ci(const ModelSpec& spec1, const ModelSpec& spec2, const TwoGroupData& data,
                      const BootstrapConfig& cfg);

// Rejects iff the bootstrap CI upper endpoint < eps (exact duality).
TestReport bootstrap_ci_test(const ModelSpec& spec1, const ModelSpec& spec2,
                             const TwoGroupData& data, const BootstrapConfig& cfg);

// Resamples at the unconstrained fit when d1_hat >= eps, else at the
// constrained fit; rejects iff d1_hat < alpha-quantile of replicate distances.
TestReport constrained_bootstrap_test(const ModelSpec& spec1, const ModelSpec& spec2,
                                      const TwoGroupData& data, const BootstrapConfig& cfg);

// Directional-derivative functional: integral of sgn(theta_hat)*f where
// |theta_hat| >= 1/s_n plus integral of |f| where |theta_hat| < 1/s_n.
double phi_prime_hat(const DiffCurve& theta_hat, const std::function<double(double)>& f,
                     std::size_t n, const SnRule& sn_rule = {});

// Same replicate generation as constrained_bootstrap_test; replicate statistic
// is phi_prime_hat(theta* - theta) around the generating curve; rejects iff
// d1_hat < alpha-quantile + eps.
TestReport derivative_bootstrap_test(const ModelSpec& spec1, const ModelSpec& spec2,
                                     const TwoGroupData& data, const BootstrapConfig& cfg);

}  // namespace curve_equiv
