#include <cmath>
#include <limits>

#include "curve_equiv/errors.hpp"
#include "curve_equiv/quadrature.hpp"
#include "doctest.h"

using namespace curve_equiv;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("adaptive Simpson hits analytic integrals") {
    const double s = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12);
    CHECK(s == doctest::Approx(2.0).epsilon(1e-11));
    const double e = adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12);
    CHECK(e == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-11));
    // Oscillatory integrand with many refinement levels
    const double o =
        adaptive_simpson([](double x) { return std::sin(25.0 * x); }, 0.0, 2.0, 1e-11);
    CHECK(o == doctest::Approx((1.0 - std::cos(50.0)) / 25.0).epsilon(1e-9));
    // Zero-length interval
    CHECK(adaptive_simpson([](double x) { return x; }, 1.0, 1.0, 1e-12) == 0.0);
}

TEST_CASE("integrate_abs splits at sign changes") {
    const double v = integrate_abs([](double x) { return std::sin(x); }, 0.0, 2.0 * kPi, 1e-10);
    CHECK(v == doctest::Approx(4.0).epsilon(1e-9));
    // |x(2-x)| over [0,4]: integral x(2-x) on [0,2] is 4/3; x(x-2) on [2,4] is 20/3
    const double p = integrate_abs([](double x) { return x * (2.0 - x); }, 0.0, 4.0, 1e-10);
    CHECK(p == doctest::Approx(4.0 / 3.0 + 20.0 / 3.0).epsilon(1e-9));
    // No sign change: plain absolute integral
    const double q = integrate_abs([](double x) { return -std::exp(x); }, 0.0, 1.0, 1e-10);
    CHECK(q == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-9));
}

TEST_CASE("quadrature failures are procedure errors") {
    CHECK_THROWS_AS(adaptive_simpson(
                        [](double x) {
                            return x > 0.4 ? std::numeric_limits<double>::quiet_NaN() : x;
                        },
                        0.0, 1.0, 1e-10),
                    quadrature_error);
    // Tight tolerance with almost no refinement depth cannot converge
    CHECK_THROWS_AS(
        adaptive_simpson([](double x) { return std::sin(25.0 * x); }, 0.0, 2.0, 1e-13, 3),
        quadrature_error);
    const quadrature_error err("q");
    CHECK(dynamic_cast<const procedure_error*>(&err) != nullptr);
}

TEST_CASE("bisect_root refines a bracketed root") {
    const double r = bisect_root([](double x) { return std::cos(x); }, 0.0, 2.0, 1e-12);
    CHECK(r == doctest::Approx(kPi / 2.0).epsilon(1e-11));
    // Endpoint zeros are returned as-is
    CHECK(bisect_root([](double x) { return x; }, 0.0, 1.0, 1e-12) == 0.0);
    CHECK(bisect_root([](double x) { return x - 1.0; }, 0.0, 1.0, 1e-12) == 1.0);
    CHECK_THROWS_AS(bisect_root([](double x) { return 1.0 + x * x; }, 0.0, 1.0, 1e-12),
                    input_error);
}

TEST_CASE("bisect_root is symmetric under negating the function") {
    const auto g = [](double x) { return std::cos(x) - 0.3; };
    const auto ng = [&g](double x) { return -g(x); };
    const double a = bisect_root(g, 0.0, 2.0, 1e-13);
    const double b = bisect_root(ng, 0.0, 2.0, 1e-13);
    CHECK(a == b);  // bitwise: the same bracketing decisions must be taken
}
