// Plug-in limit-law machinery: per-group information matrices, simulation of
// the limiting statistic, empirical quantiles, and the resulting confidence
// intervals and equivalence test.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "curve_equiv/data.hpp"
#include "curve_equiv/distance.hpp"
#include "curve_equiv/fit.hpp"
#include "curve_equiv/report.hpp"

namespace curve_equiv {

struct InfoMatrix {
    Eigen::MatrixXd sigma;     // (1/sigma2) * sum_i w_i g_i g_i^T
    Eigen::MatrixXd inv_sqrt;  // symmetric A with A*A = sigma^{-1}
    double min_eig = 0.0, max_eig = 0.0;
};

// Throws procedure_error when sigma is numerically singular
// (smallest eigenvalue < 1e-10 * largest) or sigma2 is not positive.
InfoMatrix info_matrix(const ModelSpec& spec, const GroupSample& g,
                       const ParameterVector& beta, double sigma2);
InfoMatrix info_matrix(const ModelSpec& spec, const GroupSample& g, const FittedGroup& fit);

// Assembled simulation problem for the limiting statistic: quadrature nodes
// with Simpson weights, pieces split at the null-set boundaries, and per-node
// premultiplied coefficient vectors for the two standard-normal blocks.
struct LimitSimSpec {
    std::vector<double> node_x, node_w;
    std::vector<int> node_region;       // +1/-1: signed region, 0: null region
    Eigen::MatrixXd a1, a2;             // p x nodes coefficient columns
    std::vector<int> sign_pattern;      // sign per complement piece, in order
    IntervalSet null_set;
    double kappa = 2.0;
    std::size_t M = 10000;
    std::uint64_t seed = 0;
};

// grid_points nodes distributed over the pieces (at least 3 per piece, odd).
LimitSimSpec make_limit_sim_spec(const ModelSpec& spec1, const ModelSpec& spec2,
                                 const FittedPair& pair, const TwoGroupData& data,
                                 const IntervalSet& nhat, std::size_t M, std::uint64_t seed,
                                 int grid_points = 2001);

// M draws of the limiting statistic; draw i uses substream(seed, i) and
// samples Z1 then Z2 componentwise.
std::vector<double> simulate_T_hat(const LimitSimSpec& s);

// Type-1 empirical quantile: the ceil(alpha*M)-th order statistic.
double quantile(std::vector<double> draws, double alpha);

// One-sided interval [0, d1_hat - q_alpha/sqrt(n)).
CiReport asymptotic_ci(const ModelSpec& spec1, const ModelSpec& spec2, const FittedPair& pair,
                       const TwoGroupData& data, double alpha = 0.05, std::size_t M = 10000,
                       std::uint64_t seed = 0, double const_c = 1.0);

// Two-sided interval [d1_hat - q_{1-alpha/2}/sqrt(n), d1_hat - q_{alpha/2}/sqrt(n)].
CiReport two_sided_ci(const ModelSpec& spec1, const ModelSpec& spec2, const FittedPair& pair,
                      const TwoGroupData& data, double alpha = 0.05, std::size_t M = 10000,
                      std::uint64_t seed = 0, double const_c = 1.0);

// Rejects equivalence's complement (certifies d1 < eps) iff the one-sided CI
// lies inside [0, eps); shares draws with asymptotic_ci so the duality is exact.
TestReport asymptotic_test(const ModelSpec& spec1, const ModelSpec& spec2,
                           const FittedPair& pair, const TwoGroupData& data, double eps,
                           double alpha = 0.05, std::size_t M = 10000, std::uint64_t seed = 0,
                           double const_c = 1.0);

}  // namespace curve_equiv
