// Result records for confidence intervals and equivalence tests.
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "curve_equiv/distance.hpp"

namespace curve_equiv {

namespace method_tag {
inline constexpr const char* asymptotic = "asymptotic";
inline constexpr const char* bootstrap = "bootstrap";  // CI reports
inline constexpr const char* bootstrap_ci = "bootstrap-ci";
inline constexpr const char* constrained_bootstrap = "constrained-bootstrap";
inline constexpr const char* derivative_bootstrap = "derivative-bootstrap";
}  // namespace method_tag

struct CiReport {
    std::string method;  // "asymptotic" | "bootstrap"
    bool two_sided = false;
    double lower = 0.0, upper = 0.0;  // 0 <= lower <= upper
    double alpha = 0.0;
    double d1_hat = 0.0;
    std::vector<double> quantiles_used;  // limit-law / bootstrap quantiles behind endpoints
    std::size_t n = 0, n1 = 0, n2 = 0;
    std::size_t reps = 0;  // M (asymptotic) or B (bootstrap)
    std::uint64_t seed = 0;
    double kappa = 0.0;
    std::size_t dropped = 0;          // bootstrap replicate refit failures
    bool degenerate = false;          // zero residual variance in both groups
    std::vector<Interval> null_set;   // thresholded near-coincidence set (asymptotic)
};

// Decision rules per method, in terms of the stored numbers:
//   asymptotic:            reject iff d1_hat <= critical  (critical = eps + q_alpha/sqrt(n))
//   bootstrap-ci:          reject iff critical < eps      (critical = bootstrap CI upper)
//   constrained-bootstrap: reject iff d1_hat < critical   (critical = alpha-quantile of d1*)
//   derivative-bootstrap:  reject iff d1_hat < critical   (critical = alpha-quantile + eps)
struct TestReport {
    std::string method;
    bool reject = false;
    double d1_hat = 0.0;
    double eps = 0.0;
    double alpha = 0.0;
    double critical = 0.0;
    std::vector<double> quantiles_used;
    std::size_t n = 0, n1 = 0, n2 = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    double kappa = 0.0;
    std::size_t dropped = 0;
    bool degenerate = false;
    // Constrained/derivative paths: which resampling branch fired and the
    // distance at the generating parameters.
    std::string branch;
    double gen_d1 = std::numeric_limits<double>::quiet_NaN();
    double constraint_gap = std::numeric_limits<double>::quiet_NaN();
    double sn_threshold = std::numeric_limits<double>::quiet_NaN();
    std::vector<Interval> null_set;
};

}  // namespace curve_equiv
