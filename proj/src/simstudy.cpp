#include "curve_equiv/simstudy.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "curve_equiv/errors.hpp"
#include "curve_equiv/inference.hpp"
#include "curve_equiv/rng.hpp"

namespace curve_equiv {

RunMethod method_from_string(const std::string& s) {
    if (s == "asymptotic") return RunMethod::asymptotic;
    if (s == "bootstrap-ci" || s == "bootstrap") return RunMethod::bootstrap_ci;
    if (s == "constrained-bootstrap") return RunMethod::constrained_bootstrap;
    if (s == "derivative-bootstrap") return RunMethod::derivative_bootstrap;
    throw input_error("unknown method '" + s +
                      "'; expected asymptotic, bootstrap-ci, constrained-bootstrap, or "
                      "derivative-bootstrap");
}

std::string to_string(RunMethod m) {
    switch (m) {
        case RunMethod::asymptotic: return method_tag::asymptotic;
        case RunMethod::bootstrap_ci: return method_tag::bootstrap_ci;
        case RunMethod::constrained_bootstrap: return method_tag::constrained_bootstrap;
        case RunMethod::derivative_bootstrap: return method_tag::derivative_bootstrap;
    }
    throw input_error("invalid method value");
}

ScenarioShape shape_from_string(const std::string& s) {
    if (s == "intersecting") return ScenarioShape::intersecting;
    if (s == "parallel") return ScenarioShape::parallel;
    throw input_error("unknown scenario shape '" + s + "'; expected intersecting or parallel");
}

std::string to_string(ScenarioShape s) {
    return s == ScenarioShape::intersecting ? "intersecting" : "parallel";
}

ModelSpec scenario_model() { return ModelSpec::emax({0.0, 4.0}); }

std::pair<ParameterVector, ParameterVector> make_scenario_params(ScenarioShape shape,
                                                                 double value) {
    if (!std::isfinite(value)) throw input_error("scenario value must be finite");
    if (shape == ScenarioShape::parallel) return {{value, 5.0, 1.0}, {0.0, 5.0, 1.0}};
    if (value <= -0.95)
        throw input_error("intersecting scenario needs value > -0.95 to keep b3 positive");
    return {{5.0, 3.0, 1.0}, {5.0, 3.0 + value, 1.0 + value}};
}

double scenario_d1(ScenarioShape shape, double value) {
    if (shape == ScenarioShape::parallel) return 4.0 * std::abs(value);
    make_scenario_params(shape, value);  // range check
    // Difference 3x/(1+x) - (3+g)x/((1+g)+x) changes sign only at x = 2;
    // F below is its antiderivative.
    const double g = value;
    const auto F = [g](double x) {
        return 3.0 * (x - std::log(1.0 + x)) -
               (3.0 + g) * (x - (1.0 + g) * std::log(1.0 + g + x));
    };
    return std::abs(2.0 * F(2.0) - F(0.0) - F(4.0));
}

double gamma_for_d1(double target_d1) {
    if (!std::isfinite(target_d1) || target_d1 < 0.0)
        throw input_error("target distance must be finite and nonnegative");
    if (target_d1 == 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (scenario_d1(ScenarioShape::intersecting, hi) < target_d1) {
        hi *= 2.0;
        if (hi > 1e6)
            throw input_error("target distance is unreachable in the intersecting family");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (scenario_d1(ScenarioShape::intersecting, mid) < target_d1)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-14 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

std::size_t Scenario::obs_per_level(std::size_t n_group) const {
    if (levels.empty()) throw input_error("scenario needs at least one dose level");
    if (n_group == 0 || n_group % levels.size() != 0)
        throw input_error("group size " + std::to_string(n_group) +
                          " is not a positive multiple of the " +
                          std::to_string(levels.size()) + " dose levels");
    return n_group / levels.size();
}

TwoGroupData make_scenario_data(const Scenario& sc, std::uint64_t seed) {
    for (std::size_t i = 1; i < sc.levels.size(); ++i)
        if (!(sc.levels[i] > sc.levels[i - 1]))
            throw input_error("scenario levels must be strictly increasing");
    const auto [b1, b2] = make_scenario_params(sc.shape, sc.value);
    const ModelSpec m = scenario_model();
    const std::size_t k1 = sc.obs_per_level(sc.n1);
    const std::size_t k2 = sc.obs_per_level(sc.n2);
    TwoGroupData design;
    for (double x : sc.levels) {
        design.group1.levels.push_back(x);
        design.group1.obs.emplace_back(k1, 0.0);
        design.group2.levels.push_back(x);
        design.group2.obs.emplace_back(k2, 0.0);
    }
    return resample(m, m, design, b1, b2, sc.sigma2_1, sc.sigma2_2, seed);
}

namespace {

enum class Mode { power, coverage };

bool run_one(Mode mode, RunMethod method, const Scenario& sc, const ModelSpec& model,
             const ParameterVector& b1, const ParameterVector& b2, const TwoGroupData& data,
             double true_d1, std::uint64_t proc_seed) {
    if (method == RunMethod::asymptotic) {
        const FittedPair pair = fit_both(model, model, data, b1, b2, sc.fit);
        if (mode == Mode::power)
            return asymptotic_test(model, model, pair, data, sc.eps, sc.alpha, sc.M, proc_seed,
                                   sc.const_c)
                .reject;
        return true_d1 <
               asymptotic_ci(model, model, pair, data, sc.alpha, sc.M, proc_seed, sc.const_c)
                   .upper;
    }
    BootstrapConfig cfg;
    cfg.B = sc.B;
    cfg.alpha = sc.alpha;
    cfg.eps = sc.eps;
    cfg.seed = proc_seed;
    cfg.fit = sc.fit;
    cfg.start1 = b1;
    cfg.start2 = b2;
    if (mode == Mode::coverage) return true_d1 < bootstrap_ci(model, model, data, cfg).upper;
    switch (method) {
        case RunMethod::bootstrap_ci: return bootstrap_ci_test(model, model, data, cfg).reject;
        case RunMethod::constrained_bootstrap:
            return constrained_bootstrap_test(model, model, data, cfg).reject;
        default: return derivative_bootstrap_test(model, model, data, cfg).reject;
    }
}

OperatingCharacteristics run_study(const Scenario& sc, const std::vector<RunMethod>& methods,
                                   std::uint64_t seed, Mode mode) {
    if (methods.empty()) throw input_error("no methods selected");
    if (sc.reps == 0) throw input_error("the repetition count must be positive");
    if (mode == Mode::coverage)
        for (RunMethod m : methods)
            if (m != RunMethod::asymptotic && m != RunMethod::bootstrap_ci)
                throw input_error(
                    "coverage mode needs interval-producing methods (asymptotic, bootstrap-ci)");

    const ModelSpec model = scenario_model();
    const auto [b1, b2] = make_scenario_params(sc.shape, sc.value);

    OperatingCharacteristics oc;
    oc.scenario = sc;
    oc.true_d1 = scenario_d1(sc.shape, sc.value);
    oc.methods.resize(methods.size());
    for (std::size_t i = 0; i < methods.size(); ++i) oc.methods[i].method = to_string(methods[i]);

    for (std::size_t r = 0; r < sc.reps; ++r) {
        const std::uint64_t data_seed = derive_seed(seed, 2 * r);
        const std::uint64_t proc_base = derive_seed(seed, 2 * r + 1);
        const TwoGroupData data = make_scenario_data(sc, data_seed);
        for (std::size_t i = 0; i < methods.size(); ++i) {
            MethodOC& m = oc.methods[i];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const bool ok = run_one(mode, methods[i], sc, model, b1, b2, data, oc.true_d1,
                                        derive_seed(proc_base, i));
                ++m.completed;
                if (ok) ++m.successes;
            } catch (const procedure_error&) {
                ++m.errors;
            }
            m.seconds +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    }

    for (MethodOC& m : oc.methods) {
        if (m.completed == 0)
            throw procedure_error("every repetition failed for method " + m.method);
        m.rate = static_cast<double>(m.successes) / static_cast<double>(m.completed);
        m.se = std::sqrt(m.rate * (1.0 - m.rate) / static_cast<double>(m.completed));
    }
    return oc;
}

}  // namespace

OperatingCharacteristics run_power(const Scenario& sc, const std::vector<RunMethod>& methods,
                                   std::uint64_t seed) {
    return run_study(sc, methods, seed, Mode::power);
}

OperatingCharacteristics run_coverage(const Scenario& sc,
                                      const std::vector<RunMethod>& methods,
                                      std::uint64_t seed) {
    return run_study(sc, methods, seed, Mode::coverage);
}

std::vector<OperatingCharacteristics> run_power_curve(const Scenario& base,
                                                      const std::vector<double>& d1_grid,
                                                      const std::vector<RunMethod>& methods,
                                                      std::uint64_t seed) {
    if (d1_grid.empty()) throw input_error("the distance grid must not be empty");
    std::vector<OperatingCharacteristics> out;
    out.reserve(d1_grid.size());
    for (std::size_t i = 0; i < d1_grid.size(); ++i) {
        Scenario sc = base;
        sc.value = base.shape == ScenarioShape::parallel ? delta_for_d1(d1_grid[i])
                                                         : gamma_for_d1(d1_grid[i]);
        out.push_back(run_power(sc, methods, derive_seed(seed, i)));
    }
    return out;
}

void write_power_csv(const std::vector<OperatingCharacteristics>& rows, std::ostream& out) {
    const auto old_precision = out.precision(10);
    out << "d1,rate,se,method,n1,n2,sigma1,sigma2\n";
    for (const OperatingCharacteristics& oc : rows)
        for (const MethodOC& m : oc.methods)
            out << oc.true_d1 << ',' << m.rate << ',' << m.se << ',' << m.method << ','
                << oc.scenario.n1 << ',' << oc.scenario.n2 << ',' << oc.scenario.sigma2_1 << ','
                << oc.scenario.sigma2_2 << '\n';
    out.precision(old_precision);
}

}  // namespace curve_equiv
