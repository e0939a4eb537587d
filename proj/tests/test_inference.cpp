#include <algorithm>
#include <cmath>
#include <numeric>

#include "curve_equiv/distance.hpp"
#include "curve_equiv/errors.hpp"
#include "curve_equiv/inference.hpp"
#include "curve_equiv/simstudy.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace curve_equiv;

namespace {

// True-parameter stand-in for a fitted pair (balanced design, kappa = 2).
FittedPair pair_at(const ParameterVector& b1, const ParameterVector& b2, double sigma2) {
    FittedPair p;
    p.g1.beta_hat = b1;
    p.g1.sigma2_hat = sigma2;
    p.g1.converged = true;
    p.g2.beta_hat = b2;
    p.g2.sigma2_hat = sigma2;
    p.g2.converged = true;
    p.kappa_hat = 2.0;
    return p;
}

Scenario parallel_scenario(double delta, std::size_t n_per_group) {
    Scenario sc;
    sc.shape = ScenarioShape::parallel;
    sc.value = delta;
    sc.n1 = sc.n2 = n_per_group;
    return sc;
}

}  // namespace

TEST_CASE("information matrix matches the closed form for the linear model") {
    const ModelSpec lin = ModelSpec::linear();
    GroupSample g;
    for (double x : {0.0, 1.0, 2.0})
        for (int j = 0; j < 2; ++j) g.add(x, x);  // responses are irrelevant here
    const InfoMatrix im = info_matrix(lin, g, {0.0, 1.0}, 0.5);
    // (1/0.5) * (1/3) * sum over levels of (1,x)(1,x)^T
    CHECK(im.sigma(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(im.sigma(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(im.sigma(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(im.sigma(1, 1) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
    CHECK((im.sigma - im.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(im.min_eig > 0.0);

    const Eigen::MatrixXd resid =
        im.inv_sqrt * im.sigma * im.inv_sqrt - Eigen::MatrixXd::Identity(2, 2);
    CHECK(resid.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("rank-deficient designs and zero variance are procedure errors") {
    const ModelSpec quad = ModelSpec::quadratic();
    GroupSample two_levels;
    for (double x : {0.0, 4.0})
        for (int j = 0; j < 3; ++j) two_levels.add(x, x);
    CHECK_THROWS_WITH_AS(info_matrix(quad, two_levels, {0.0, 1.0, 0.0}, 1.0),
                         doctest::Contains("singular"), procedure_error);
    GroupSample ok;
    for (double x : {0.0, 2.0, 4.0}) ok.add(x, x);
    CHECK_THROWS_AS(info_matrix(quad, ok, {0.0, 1.0, 0.0}, 0.0), procedure_error);
}

TEST_CASE("empirical quantile uses the ceil(alpha*m) order statistic") {
    std::vector<double> v(300);
    std::iota(v.begin(), v.end(), 1.0);  // 1..300
    CHECK(quantile(v, 0.95) == 285.0);   // guard against 0.95*300 rounding up
    CHECK(quantile(v, 0.05) == 15.0);
    CHECK(quantile(v, 0.5) == 150.0);
    CHECK(quantile(v, 0.001) == 1.0);
    CHECK(quantile(v, 0.9999) == 300.0);

    std::vector<double> ten{3, 1, 4, 1.5, 5, 9, 2.5, 6, 5.5, 3.5};
    CHECK(quantile(ten, 0.1) == 1.0);
    CHECK(quantile(ten, 0.2) == 1.5);

    double prev = -1e300;
    for (double a : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95}) {
        const double q = quantile(v, a);
        CHECK(q >= prev);
        prev = q;
    }
    CHECK_THROWS_AS(quantile({}, 0.5), input_error);
    CHECK_THROWS_AS(quantile(v, 0.0), input_error);
    CHECK_THROWS_AS(quantile(v, 1.0), input_error);
}

TEST_CASE("limit simulation setup validates its inputs") {
    const ModelSpec emax = ModelSpec::emax();
    const FittedPair p = pair_at({0.25, 5.0, 1.0}, {0.0, 5.0, 1.0}, 0.25);
    const TwoGroupData data = make_scenario_data(parallel_scenario(0.25, 100), 1);
    CHECK_THROWS_AS(make_limit_sim_spec(emax, emax, p, data, IntervalSet{}, 999, 0),
                    input_error);
    const LimitSimSpec s = make_limit_sim_spec(emax, emax, p, data, IntervalSet{}, 1000, 0);
    // Simpson weights over the pieces must add up to the domain length.
    const double wsum = std::accumulate(s.node_w.begin(), s.node_w.end(), 0.0);
    CHECK(wsum == doctest::Approx(4.0).epsilon(1e-9));
    REQUIRE(s.sign_pattern.size() == 1);
    CHECK(s.sign_pattern[0] == 1);  // theta = +0.25 on the whole interval
}

TEST_CASE("sign pattern and regions for an intersecting pair") {
    const ModelSpec emax = ModelSpec::emax();
    const ParameterVector b1{5.0, 3.0, 1.0}, b2{5.0, 5.7, 3.7};  // gamma = 2.7
    const FittedPair p = pair_at(b1, b2, 0.25);
    Scenario sc;
    sc.shape = ScenarioShape::intersecting;
    sc.value = 2.7;
    sc.n1 = sc.n2 = 200;
    const TwoGroupData data = make_scenario_data(sc, 3);
    const IntervalSet nhat = estimate_null_set(DiffCurve(emax, b1, emax, b2), 400);
    const LimitSimSpec s = make_limit_sim_spec(emax, emax, p, data, nhat, 2000, 5);
    REQUIRE(s.sign_pattern.size() == 2);
    CHECK(s.sign_pattern[0] == 1);   // positive between the first two boundaries
    CHECK(s.sign_pattern[1] == -1);  // negative beyond the crossing at x = 2
    // Null-region nodes carry region code 0 and exist for this pair.
    CHECK(std::count(s.node_region.begin(), s.node_region.end(), 0) > 0);
}

TEST_CASE("limit draws are deterministic in the seed") {
    const ModelSpec emax = ModelSpec::emax();
    const FittedPair p = pair_at({0.25, 5.0, 1.0}, {0.0, 5.0, 1.0}, 0.25);
    const TwoGroupData data = make_scenario_data(parallel_scenario(0.25, 100), 1);
    const LimitSimSpec s = make_limit_sim_spec(emax, emax, p, data, IntervalSet{}, 1500, 11);
    const auto a = simulate_T_hat(s);
    const auto b = simulate_T_hat(s);
    CHECK(a == b);  // bitwise
    LimitSimSpec s2 = s;
    s2.seed = 12;
    CHECK(simulate_T_hat(s2) != a);
}

TEST_CASE("draws on a pure null region are nonnegative, signed draws are centered") {
    const ModelSpec emax = ModelSpec::emax();
    const TwoGroupData data = make_scenario_data(parallel_scenario(0.25, 100), 1);

    // Identical curves: the whole domain is the near-coincidence set.
    const FittedPair same = pair_at({5.0, 3.0, 1.0}, {5.0, 3.0, 1.0}, 0.25);
    const IntervalSet whole = IntervalSet::whole(emax.domain());
    const auto abs_draws =
        simulate_T_hat(make_limit_sim_spec(emax, emax, same, data, whole, 2000, 4));
    CHECK(*std::min_element(abs_draws.begin(), abs_draws.end()) >= 0.0);

    // Pure signed region: the linear Gaussian functional has mean zero.
    const FittedPair shifted = pair_at({0.25, 5.0, 1.0}, {0.0, 5.0, 1.0}, 0.25);
    const auto signed_draws =
        simulate_T_hat(make_limit_sim_spec(emax, emax, shifted, data, IntervalSet{}, 20000, 4));
    const double sd = oracles::sample_sd(signed_draws);
    CHECK(std::abs(oracles::mean(signed_draws)) <= 4.0 * sd / std::sqrt(20000.0));

    // Frozen covariance-kernel oracle for this configuration.
    CHECK(sd == doctest::Approx(4.4607518).epsilon(0.05));
}

TEST_CASE("asymptotic CI and test are exactly dual") {
    Scenario sc;
    sc.shape = ScenarioShape::intersecting;
    sc.value = 2.7;
    sc.n1 = sc.n2 = 50;
    const TwoGroupData data = make_scenario_data(sc, 42);
    const ModelSpec emax = ModelSpec::emax();
    const auto [b1, b2] = make_scenario_params(sc.shape, sc.value);
    const FittedPair pair = fit_both(emax, emax, data, b1, b2);
    REQUIRE(pair.g1.converged);
    REQUIRE(pair.g2.converged);

    const CiReport ci = asymptotic_ci(emax, emax, pair, data, 0.05, 2000, 7);
    CHECK(ci.lower == 0.0);
    CHECK(ci.upper >= 0.0);
    CHECK(ci.null_set.size() >= 1);

    for (double eps : {0.25, 0.5, 1.0, 2.0, ci.upper}) {
        if (!(eps > 0.0)) continue;
        const TestReport t = asymptotic_test(emax, emax, pair, data, eps, 0.05, 2000, 7);
        CHECK(t.reject == (ci.upper <= eps));
        CHECK(t.critical ==
              doctest::Approx(eps + ci.quantiles_used[0] / std::sqrt(100.0)).epsilon(1e-12));
    }
}

TEST_CASE("two-sided interval is ordered and reproducible") {
    Scenario sc;
    sc.shape = ScenarioShape::intersecting;
    sc.value = 2.7;
    sc.n1 = sc.n2 = 100;
    const TwoGroupData data = make_scenario_data(sc, 9);
    const ModelSpec emax = ModelSpec::emax();
    const auto [b1, b2] = make_scenario_params(sc.shape, sc.value);
    const FittedPair pair = fit_both(emax, emax, data, b1, b2);

    const CiReport ci = two_sided_ci(emax, emax, pair, data, 0.1, 2000, 3);
    CHECK(ci.two_sided);
    CHECK(ci.lower >= 0.0);
    CHECK(ci.lower <= ci.upper);
    REQUIRE(ci.quantiles_used.size() == 2);
    CHECK(ci.quantiles_used[0] <= ci.quantiles_used[1]);
    const CiReport again = two_sided_ci(emax, emax, pair, data, 0.1, 2000, 3);
    CHECK(again.lower == ci.lower);
    CHECK(again.upper == ci.upper);
}

TEST_CASE("asymptotic inference refuses unconverged fits") {
    const ModelSpec emax = ModelSpec::emax();
    FittedPair bad = pair_at({0.25, 5.0, 1.0}, {0.0, 5.0, 1.0}, 0.25);
    bad.g2.converged = false;
    const TwoGroupData data = make_scenario_data(parallel_scenario(0.25, 100), 1);
    CHECK_THROWS_AS(asymptotic_ci(emax, emax, bad, data), procedure_error);
}
