// Monte Carlo harness: the two benchmark curve families (shifted and
// intersecting Emax pairs), dataset generation, and rejection/coverage rates
// per inference method over a grid of true distances.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "curve_equiv/bootstrap.hpp"
#include "curve_equiv/data.hpp"
#include "curve_equiv/model.hpp"

namespace curve_equiv {

enum class RunMethod { asymptotic, bootstrap_ci, constrained_bootstrap, derivative_bootstrap };

// Accepts the method tags plus the synonym "bootstrap" for "bootstrap-ci".
RunMethod method_from_string(const std::string& s);
std::string to_string(RunMethod m);

// Benchmark shapes on the Emax model over [0, 4]:
//   parallel:     m1 = value + 5x/(1+x),  m2 = 5x/(1+x)        (d1 = 4*value)
//   intersecting: m1 = 5 + 3x/(1+x),      m2 = 5 + (3+value)x/((1+value)+x)
enum class ScenarioShape { intersecting, parallel };

ScenarioShape shape_from_string(const std::string& s);
std::string to_string(ScenarioShape s);

ModelSpec scenario_model();  // Emax on [0, 4]

std::pair<ParameterVector, ParameterVector> make_scenario_params(ScenarioShape shape,
                                                                 double value);

// Closed-form L1 distance of the benchmark pair.
double scenario_d1(ScenarioShape shape, double value);

// Inverts scenario_d1 for the intersecting family (value >= 0).
double gamma_for_d1(double target_d1);
inline double delta_for_d1(double target_d1) { return target_d1 / 4.0; }

struct Scenario {
    ScenarioShape shape = ScenarioShape::intersecting;
    double value = 0.0;  // gamma (intersecting) or delta (parallel)
    std::size_t n1 = 20, n2 = 20;
    double sigma2_1 = 0.25, sigma2_2 = 0.25;
    std::vector<double> levels{0.0, 1.0, 2.0, 3.0, 4.0};
    double eps = 1.0;
    double alpha = 0.05;
    std::size_t reps = 200;  // Monte Carlo repetitions
    std::size_t B = 300;     // bootstrap replicates per repetition
    std::size_t M = 10000;   // limit-law draws per repetition
    double const_c = 1.0;
    FitOptions fit{};

    // Equal allocation across levels; throws input_error when n_group is not
    // a multiple of the number of levels.
    std::size_t obs_per_level(std::size_t n_group) const;
};

// One dataset from the scenario: balanced design, normal errors, group 1
// drawn before group 2.
TwoGroupData make_scenario_data(const Scenario& sc, std::uint64_t seed);

struct MethodOC {
    std::string method;
    double rate = 0.0;  // rejection rate (power mode) or coverage (coverage mode)
    double se = 0.0;    // binomial standard error at `rate`
    std::size_t successes = 0;
    std::size_t completed = 0;  // repetitions that produced a decision
    std::size_t errors = 0;     // repetitions lost to procedure errors
    double seconds = 0.0;
};

struct OperatingCharacteristics {
    double true_d1 = 0.0;
    Scenario scenario;
    std::vector<MethodOC> methods;
};

// Repetition r draws its dataset from derive_seed(seed, 2r) and gives method
// i the procedure seed derive_seed(derive_seed(seed, 2r + 1), i), so all
// methods see identical data.  Fits are started at the true parameters.
OperatingCharacteristics run_power(const Scenario& sc, const std::vector<RunMethod>& methods,
                                   std::uint64_t seed);

// Coverage of the one-sided CI upper bound: counted when true_d1 < upper.
// Only asymptotic and bootstrap-ci produce intervals.
OperatingCharacteristics run_coverage(const Scenario& sc,
                                      const std::vector<RunMethod>& methods,
                                      std::uint64_t seed);

// For each target distance, solves for the scenario value and runs the power
// study with per-point seed derive_seed(seed, index).
std::vector<OperatingCharacteristics> run_power_curve(const Scenario& base,
                                                      const std::vector<double>& d1_grid,
                                                      const std::vector<RunMethod>& methods,
                                                      std::uint64_t seed);

// CSV with header d1,rate,se,method,n1,n2,sigma1,sigma2 (variance columns).
void write_power_csv(const std::vector<OperatingCharacteristics>& rows, std::ostream& out);

}  // namespace curve_equiv
