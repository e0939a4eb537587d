#include <algorithm>
#include <cmath>
#include <vector>

#include "curve_equiv/bootstrap.hpp"
#include "curve_equiv/distance.hpp"
#include "curve_equiv/errors.hpp"
#include "curve_equiv/inference.hpp"
#include "curve_equiv/rng.hpp"
#include "curve_equiv/simstudy.hpp"
#include "doctest.h"

using namespace curve_equiv;

namespace {

TwoGroupData exact_parallel_data(double delta, std::size_t k) {
    const ModelSpec emax = ModelSpec::emax();
    TwoGroupData d;
    for (double x : {0.0, 1.0, 2.0, 3.0, 4.0})
        for (std::size_t j = 0; j < k; ++j) {
            d.group1.add(x, emax.eval(x, {delta, 5.0, 1.0}));
            d.group2.add(x, emax.eval(x, {0.0, 5.0, 1.0}));
        }
    return d;
}

TwoGroupData noisy_parallel_data(double delta, std::size_t n_per_group, double sigma2,
                                 std::uint64_t seed) {
    Scenario sc;
    sc.shape = ScenarioShape::parallel;
    sc.value = delta;
    sc.n1 = sc.n2 = n_per_group;
    sc.sigma2_1 = sc.sigma2_2 = sigma2;
    return make_scenario_data(sc, seed);
}

}  // namespace

TEST_CASE("resampling is deterministic and respects the design") {
    const ModelSpec emax = ModelSpec::emax();
    const TwoGroupData design = exact_parallel_data(0.25, 3);
    const ParameterVector b1{0.25, 5.0, 1.0}, b2{0.0, 5.0, 1.0};
    const TwoGroupData a = resample(emax, emax, design, b1, b2, 0.25, 0.25, 99);
    const TwoGroupData b = resample(emax, emax, design, b1, b2, 0.25, 0.25, 99);
    CHECK(a.group1.obs == b.group1.obs);
    CHECK(a.group2.obs == b.group2.obs);
    const TwoGroupData c = resample(emax, emax, design, b1, b2, 0.25, 0.25, 100);
    CHECK(a.group1.obs != c.group1.obs);
    CHECK(a.group1.levels == design.group1.levels);
    REQUIRE(a.group1.obs.size() == design.group1.obs.size());
    CHECK(a.group1.obs[2].size() == design.group1.obs[2].size());

    // Zero variance reproduces the curve values exactly.
    const TwoGroupData z = resample(emax, emax, design, b1, b2, 0.0, 0.0, 5);
    for (std::size_t i = 0; i < z.group1.levels.size(); ++i)
        for (double y : z.group1.obs[i])
            CHECK(y == emax.eval(z.group1.levels[i], b1));
    CHECK_THROWS_AS(resample(emax, emax, design, b1, b2, -1.0, 0.25, 5), input_error);
}

TEST_CASE("bootstrap CI upper bound equals an independently rebuilt order statistic") {
    const ModelSpec emax = ModelSpec::emax();
    const TwoGroupData data = noisy_parallel_data(0.25, 20, 0.25, 7);
    BootstrapConfig cfg;
    cfg.B = 50;
    cfg.alpha = 0.05;
    cfg.seed = 31;
    cfg.start1 = {0.25, 5.0, 1.0};
    cfg.start2 = {0.0, 5.0, 1.0};
    const CiReport ci = bootstrap_ci(emax, emax, data, cfg);
    REQUIRE(ci.dropped == 0);

    // Re-run the documented replicate recipe by hand through the public API.
    const FittedPair fit = fit_both(emax, emax, data, cfg.start1, cfg.start2);
    std::vector<double> d1s;
    for (std::size_t b = 0; b < cfg.B; ++b) {
        const TwoGroupData star =
            resample(emax, emax, data, fit.g1.beta_hat, fit.g2.beta_hat, fit.g1.sigma2_hat,
                     fit.g2.sigma2_hat, derive_seed(cfg.seed, b));
        const FittedGroup f1 = ls_fit(emax, star.group1, fit.g1.beta_hat);
        const FittedGroup f2 = ls_fit(emax, star.group2, fit.g2.beta_hat);
        REQUIRE(f1.converged);
        REQUIRE(f2.converged);
        d1s.push_back(l1_distance(emax, f1.beta_hat, emax, f2.beta_hat));
    }
    std::sort(d1s.begin(), d1s.end());
    const std::size_t k = static_cast<std::size_t>(std::ceil(0.95 * 50.0 - 1e-9));
    CHECK(ci.upper == d1s[k - 1]);  // bitwise equality with the engine
    CHECK(ci.d1_hat ==
          l1_distance(emax, fit.g1.beta_hat, emax, fit.g2.beta_hat));
}

TEST_CASE("zero residual variance gives the degenerate interval [0, d1_hat]") {
    const ModelSpec emax = ModelSpec::emax();
    const TwoGroupData data = exact_parallel_data(0.3, 4);  // d1 = 1.2 exactly
    BootstrapConfig cfg;
    cfg.B = 50;
    cfg.seed = 1;
    cfg.start1 = {0.3, 5.0, 1.0};
    cfg.start2 = {0.0, 5.0, 1.0};
    const CiReport ci = bootstrap_ci(emax, emax, data, cfg);
    CHECK(ci.degenerate);
    CHECK(ci.upper == ci.d1_hat);
    CHECK(ci.dropped == 0);

    cfg.eps = 1.0;
    const TestReport reject_no = bootstrap_ci_test(emax, emax, data, cfg);
    CHECK_FALSE(reject_no.reject);  // 1.2 < 1 is false; tie-free here
    CHECK(reject_no.critical == ci.upper);
    cfg.eps = 1.3;
    CHECK(bootstrap_ci_test(emax, emax, data, cfg).reject);
    // Exact tie: the dual test uses a strict inequality, so upper == eps keeps H0.
    cfg.eps = ci.upper;
    CHECK_FALSE(bootstrap_ci_test(emax, emax, data, cfg).reject);
}

TEST_CASE("bootstrap configs are validated") {
    const ModelSpec emax = ModelSpec::emax();
    const TwoGroupData data = exact_parallel_data(0.25, 2);
    BootstrapConfig cfg;
    cfg.B = 49;
    CHECK_THROWS_WITH_AS(bootstrap_ci(emax, emax, data, cfg), doctest::Contains("50"),
                         input_error);
    cfg.B = 50;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(bootstrap_ci(emax, emax, data, cfg), input_error);
    cfg.alpha = 0.05;
    cfg.eps = 0.0;
    CHECK_THROWS_AS(bootstrap_ci_test(emax, emax, data, cfg), input_error);
}

TEST_CASE("replicate refit failures beyond the budget abort the run") {
    // A one-iteration budget converges on the observed data when started at
    // its exact optimum (zero step), but cannot converge on any resampled
    // dataset, so every replicate is dropped and the 10% budget trips.
    const ModelSpec emax = ModelSpec::emax();
    const TwoGroupData data = noisy_parallel_data(0.25, 20, 0.25, 3);
    const FittedPair full = fit_both(emax, emax, data, {0.25, 5.0, 1.0}, {0.0, 5.0, 1.0});
    REQUIRE(full.g1.converged);
    BootstrapConfig cfg;
    cfg.B = 50;
    cfg.seed = 17;
    cfg.start1 = full.g1.beta_hat;
    cfg.start2 = full.g2.beta_hat;
    cfg.fit.max_iter = 1;
    cfg.fit.n_starts = 1;
    CHECK_THROWS_WITH_AS(bootstrap_ci(emax, emax, data, cfg), doctest::Contains("dropped"),
                         procedure_error);
}

TEST_CASE("constrained bootstrap branches on the estimated distance") {
    const ModelSpec emax = ModelSpec::emax();
    BootstrapConfig cfg;
    cfg.B = 50;
    cfg.eps = 1.0;
    cfg.seed = 2;

    // d1_hat = 1.2 >= eps: resample at the unconstrained fit.
    cfg.start1 = {0.3, 5.0, 1.0};
    cfg.start2 = {0.0, 5.0, 1.0};
    const TwoGroupData wide = exact_parallel_data(0.3, 4);
    const TestReport far = constrained_bootstrap_test(emax, emax, wide, cfg);
    CHECK(far.branch == "unconstrained");
    CHECK(far.gen_d1 == far.d1_hat);
    CHECK(std::isnan(far.constraint_gap));
    CHECK_FALSE(far.reject);  // replicates reproduce d1 = 1.2; 1.2 < 1.2 is false

    // d1_hat = 0.4 < eps: resample at the boundary fit.
    cfg.start1 = {0.1, 5.0, 1.0};
    const TwoGroupData close = exact_parallel_data(0.1, 4);
    const TestReport near = constrained_bootstrap_test(emax, emax, close, cfg);
    CHECK(near.branch == "constrained");
    CHECK(std::abs(near.gen_d1 - cfg.eps) <= constrained_fit_tolerance(cfg.eps));
    CHECK(near.constraint_gap <= constrained_fit_tolerance(cfg.eps));
    CHECK(near.reject);  // 0.4 < ~1.0
}

TEST_CASE("derivative statistic integrates sign-resolved differences") {
    const ModelSpec emax = ModelSpec::emax();

    // No near-coincidence region: theta = 0.25, threshold at n = 400 is ~0.122.
    const DiffCurve shifted(emax, {0.25, 5.0, 1.0}, emax, {0.0, 5.0, 1.0});
    const double signed_part =
        phi_prime_hat(shifted, [](double x) { return std::sin(x); }, 400);
    CHECK(signed_part == doctest::Approx(1.0 - std::cos(4.0)).epsilon(1e-8));

    // Identical curves: everything is the absolute part.
    const DiffCurve zero(emax, {5.0, 3.0, 1.0}, emax, {5.0, 3.0, 1.0});
    const double abs_part = phi_prime_hat(zero, [](double x) { return std::sin(x); }, 400);
    CHECK(abs_part == doctest::Approx(3.0 + std::cos(4.0)).epsilon(1e-8));

    // Positive homogeneity (exact for the functional, up to quadrature error).
    const DiffCurve mixed(emax, {5.0, 3.0, 1.0}, emax, {5.0, 5.7, 3.7});
    const auto f = [](double x) { return std::cos(1.3 * x) - 0.2; };
    const double one = phi_prime_hat(mixed, f, 400);
    const double scaled =
        phi_prime_hat(mixed, [&f](double x) { return 3.7 * f(x); }, 400);
    CHECK(std::abs(scaled - 3.7 * one) <= 1e-9 * std::max(1.0, std::abs(3.7 * one)));

    // A custom threshold rule moves mass between the two parts.
    const SnRule abs_everything = [](std::size_t) { return 1e-6; };  // threshold 1e6
    const double forced_abs = phi_prime_hat(shifted, [](double x) { return std::sin(x); },
                                            400, abs_everything);
    CHECK(forced_abs == doctest::Approx(3.0 + std::cos(4.0)).epsilon(1e-8));
}

TEST_CASE("derivative bootstrap centers on the generating curve") {
    const ModelSpec emax = ModelSpec::emax();
    BootstrapConfig cfg;
    cfg.B = 50;
    cfg.eps = 1.0;
    cfg.seed = 8;
    cfg.start1 = {0.3, 5.0, 1.0};
    cfg.start2 = {0.0, 5.0, 1.0};

    const TwoGroupData wide = exact_parallel_data(0.3, 4);
    const TestReport far = derivative_bootstrap_test(emax, emax, wide, cfg);
    CHECK(far.branch == "unconstrained");
    // Zero-noise replicates coincide with the generating curve: phi* = 0.
    CHECK(far.critical == doctest::Approx(cfg.eps).epsilon(1e-12));
    CHECK_FALSE(far.reject);  // 1.2 < 1 is false
    CHECK(far.sn_threshold ==
          doctest::Approx(1.0 / default_sn(wide.n())).epsilon(1e-12));

    cfg.start1 = {0.1, 5.0, 1.0};
    const TwoGroupData close = exact_parallel_data(0.1, 4);
    const TestReport near = derivative_bootstrap_test(emax, emax, close, cfg);
    CHECK(near.branch == "constrained");
    CHECK(near.reject);  // 0.4 < 0 + 1

    cfg.resample_unconstrained = true;
    const TestReport forced = derivative_bootstrap_test(emax, emax, close, cfg);
    CHECK(forced.branch == "unconstrained");
    CHECK(forced.gen_d1 == forced.d1_hat);
}

TEST_CASE("constrained and derivative tests usually agree near the boundary") {
    const ModelSpec emax = ModelSpec::emax();
    int agree = 0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        const TwoGroupData data =
            noisy_parallel_data(0.25, 100, 0.25, derive_seed(404, static_cast<std::uint64_t>(r)));
        BootstrapConfig cfg;
        cfg.B = 100;
        cfg.eps = 1.0;
        cfg.seed = derive_seed(505, static_cast<std::uint64_t>(r));
        cfg.start1 = {0.25, 5.0, 1.0};
        cfg.start2 = {0.0, 5.0, 1.0};
        const TestReport a = constrained_bootstrap_test(emax, emax, data, cfg);
        const TestReport b = derivative_bootstrap_test(emax, emax, data, cfg);
        if (a.reject == b.reject) ++agree;
    }
    CHECK(agree >= 18);  // fixed-seed check: the two tests track each other
}
