// curve-equiv: fit two dose-response curves, compute the area between them,
// and run equivalence inference (asymptotic or bootstrap) or Monte Carlo
// studies of the procedures.  Exit codes: 0 success, 1 input/usage error,
// 2 statistical-procedure failure.
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curve_equiv/bootstrap.hpp"
#include "curve_equiv/data.hpp"
#include "curve_equiv/distance.hpp"
#include "curve_equiv/errors.hpp"
#include "curve_equiv/fit.hpp"
#include "curve_equiv/inference.hpp"
#include "curve_equiv/report_json.hpp"
#include "curve_equiv/simstudy.hpp"
#include "json.hpp"

namespace {

using curve_equiv::input_error;
using nlohmann::json;

// Accepts the stock key=value format plus JSON files ("{" as first
// non-whitespace byte).  Nested JSON objects map to subcommand sections.
class JsonOrIniConfig : public CLI::ConfigBase {
  public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        const std::streampos start = input.tellg();
        char c = 0;
        while (input.get(c) && std::isspace(static_cast<unsigned char>(c))) {
        }
        input.clear();
        input.seekg(start);
        if (c == '{') return from_json(input);
        return CLI::ConfigBase::from_config(input);
    }

  private:
    static std::string scalar(const json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    }

    static void flatten(const std::vector<std::string>& parents, const json& j,
                        std::vector<CLI::ConfigItem>& out) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it->is_object()) {
                std::vector<std::string> deeper = parents;
                deeper.push_back(it.key());
                flatten(deeper, *it, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = it.key();
            if (it->is_array())
                for (const json& v : *it) item.inputs.push_back(scalar(v));
            else
                item.inputs.push_back(scalar(*it));
            out.push_back(std::move(item));
        }
    }

    std::vector<CLI::ConfigItem> from_json(std::istream& input) const {
        json j;
        try {
            j = json::parse(input);
        } catch (const json::exception& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::FileError("JSON config must be an object");
        std::vector<CLI::ConfigItem> out;
        flatten({}, j, out);
        return out;
    }
};

std::uint64_t seed_from_env() {
    const char* s = std::getenv("CURVE_EQUIV_SEED");
    if (s == nullptr || *s == '\0') return 0;
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != std::strlen(s)) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw input_error(std::string("CURVE_EQUIV_SEED must be an unsigned integer, got '") +
                          s + "'");
    }
}

struct ModelArgs {
    std::string data_path;
    std::string model1 = "emax", model2 = "emax";
    double xlo = 0.0, xhi = 4.0;
    std::vector<double> start1, start2;
    std::vector<double> box1_lo, box1_hi, box2_lo, box2_hi;
};

void add_model_args(CLI::App* sub, ModelArgs& a) {
    sub->add_option("data", a.data_path, "CSV file with header group,dose,response")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--model1", a.model1, "Model family for group 1")
        ->capture_default_str();
    sub->add_option("--model2", a.model2, "Model family for group 2")
        ->capture_default_str();
    sub->add_option("--xlo", a.xlo, "Left end of the covariate interval")
        ->capture_default_str();
    sub->add_option("--xhi", a.xhi, "Right end of the covariate interval")
        ->capture_default_str();
    sub->add_option("--start1", a.start1, "Start parameters for group 1 (default: box midpoint)")
        ->delimiter(',');
    sub->add_option("--start2", a.start2, "Start parameters for group 2 (default: box midpoint)")
        ->delimiter(',');
    sub->add_option("--box1-lo", a.box1_lo, "Lower parameter bounds for group 1")->delimiter(',');
    sub->add_option("--box1-hi", a.box1_hi, "Upper parameter bounds for group 1")->delimiter(',');
    sub->add_option("--box2-lo", a.box2_lo, "Lower parameter bounds for group 2")->delimiter(',');
    sub->add_option("--box2-hi", a.box2_hi, "Upper parameter bounds for group 2")->delimiter(',');
}

curve_equiv::ModelSpec build_model(const std::string& name, double xlo, double xhi,
                                   const std::vector<double>& box_lo,
                                   const std::vector<double>& box_hi) {
    if (!(xhi > xlo)) throw input_error("the covariate interval needs --xhi > --xlo");
    curve_equiv::ModelSpec m = curve_equiv::ModelSpec::by_name(name, {xlo, xhi});
    if (!box_lo.empty() || !box_hi.empty()) {
        curve_equiv::ParameterBox b = m.box();
        if (!box_lo.empty()) b.lo = box_lo;
        if (!box_hi.empty()) b.hi = box_hi;
        m = m.with_box(std::move(b));
    }
    return m;
}

curve_equiv::ParameterVector start_or_midpoint(const curve_equiv::ModelSpec& m,
                                               const std::vector<double>& start) {
    return start.empty() ? m.box().midpoint() : start;
}

json echo_model(const ModelArgs& a) {
    json j{{"data", a.data_path}, {"model1", a.model1}, {"model2", a.model2},
           {"xlo", a.xlo},        {"xhi", a.xhi},       {"start1", a.start1},
           {"start2", a.start2}};
    if (!a.box1_lo.empty()) j["box1_lo"] = a.box1_lo;
    if (!a.box1_hi.empty()) j["box1_hi"] = a.box1_hi;
    if (!a.box2_lo.empty()) j["box2_lo"] = a.box2_lo;
    if (!a.box2_hi.empty()) j["box2_hi"] = a.box2_hi;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot open output file: " + path);
    f << text;
    if (!f) throw input_error("failed while writing output file: " + path);
}

void emit_report(const std::string& command, json options, json report,
                 const std::string& out_path) {
    const json doc{{"command", command}, {"options", std::move(options)},
                   {"report", std::move(report)}};
    write_text(out_path, doc.dump(2) + "\n");
}

void warn_if_degenerate(bool degenerate) {
    if (degenerate)
        std::cerr << "warning: zero residual variance in both groups; "
                     "the interval is degenerate\n";
}

}  // namespace

int main(int argc, char** argv) {
    using namespace curve_equiv;

    CLI::App app{
        "Equivalence of two parametric regression curves by the area between them"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file, key=value or JSON (flags take precedence)");
    app.config_formatter(std::make_shared<JsonOrIniConfig>());

    std::uint64_t seed = 0;
    try {
        seed = seed_from_env();
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    int threads = 0;  // accepted and echoed; execution is serial

    // ---- fit ----------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Least-squares fit of both groups");
    fit_cmd->fallthrough();  // lets --config after the subcommand reach the app
    ModelArgs fit_args;
    add_model_args(fit_cmd, fit_args);
    std::string fit_out;
    fit_cmd->add_option("--out", fit_out, "Write the JSON report here (default: stdout)");
    fit_cmd->add_option("--threads", threads, "Thread-count hint (run is serial)");

    // ---- ci -----------------------------------------------------------------
    auto* ci_cmd = app.add_subcommand("ci", "Confidence interval for the curve distance");
    ci_cmd->fallthrough();
    ModelArgs ci_args;
    add_model_args(ci_cmd, ci_args);
    std::string ci_method = "asymptotic", ci_out;
    bool two_sided = false;
    double ci_alpha = 0.05, ci_c = 1.0;
    std::size_t ci_M = 10000, ci_B = 300;
    ci_cmd->add_option("--method", ci_method, "asymptotic | bootstrap-ci")
        ->capture_default_str();
    ci_cmd->add_flag("--two-sided", two_sided, "Two-sided interval (asymptotic only)");
    ci_cmd->add_option("--alpha", ci_alpha, "Level parameter")->capture_default_str();
    ci_cmd->add_option("--M", ci_M, "Limit-law draws (asymptotic)")->capture_default_str();
    ci_cmd->add_option("--B", ci_B, "Bootstrap replicates")->capture_default_str();
    ci_cmd->add_option("--c", ci_c, "Near-coincidence threshold constant")->capture_default_str();
    ci_cmd->add_option("--seed", seed, "RNG seed (env CURVE_EQUIV_SEED is the fallback)");
    ci_cmd->add_option("--out", ci_out, "Write the JSON report here (default: stdout)");
    ci_cmd->add_option("--threads", threads, "Thread-count hint (run is serial)");

    // ---- test ---------------------------------------------------------------
    auto* test_cmd = app.add_subcommand("test", "Equivalence test for the curve distance");
    test_cmd->fallthrough();
    ModelArgs test_args;
    add_model_args(test_cmd, test_args);
    std::string test_method = "asymptotic", test_out;
    double test_eps = 0.0, test_alpha = 0.05, test_c = 1.0, sn_scale = 1.0;
    std::size_t test_M = 10000, test_B = 300;
    bool resample_unconstrained = false;
    test_cmd
        ->add_option("--method", test_method,
                     "asymptotic | bootstrap-ci | constrained-bootstrap | derivative-bootstrap")
        ->capture_default_str();
    test_cmd->add_option("--eps", test_eps, "Equivalence margin for the distance")->required();
    test_cmd->add_option("--alpha", test_alpha, "Level parameter")->capture_default_str();
    test_cmd->add_option("--M", test_M, "Limit-law draws (asymptotic)")->capture_default_str();
    test_cmd->add_option("--B", test_B, "Bootstrap replicates")->capture_default_str();
    test_cmd->add_option("--c", test_c, "Near-coincidence threshold constant")
        ->capture_default_str();
    test_cmd
        ->add_option("--sn-scale", sn_scale,
                     "Scale factor on the default threshold rule sqrt(n/log n)")
        ->capture_default_str();
    test_cmd->add_flag("--resample-unconstrained", resample_unconstrained,
                       "Derivative bootstrap: resample at the unconstrained fit");
    test_cmd->add_option("--seed", seed, "RNG seed (env CURVE_EQUIV_SEED is the fallback)");
    test_cmd->add_option("--out", test_out, "Write the JSON report here (default: stdout)");
    test_cmd->add_option("--threads", threads, "Thread-count hint (run is serial)");

    // ---- simulate -----------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study on benchmark scenarios");
    sim_cmd->fallthrough();
    std::string sim_shape = "intersecting", sim_mode = "coverage", sim_csv, sim_out;
    double sim_delta = 0.0, sim_gamma = 0.0;
    std::vector<double> sim_grid, sim_levels{0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<std::string> sim_methods{"asymptotic", "bootstrap-ci"};
    Scenario sc;
    sim_cmd->add_option("--scenario", sim_shape, "intersecting | parallel")
        ->capture_default_str();
    auto* delta_opt =
        sim_cmd->add_option("--delta", sim_delta, "Parallel-scenario shift (d1 = 4*delta)");
    auto* gamma_opt =
        sim_cmd->add_option("--gamma", sim_gamma, "Intersecting-scenario parameter");
    sim_cmd->add_option("--mode", sim_mode, "coverage | power")->capture_default_str();
    sim_cmd->add_option("--methods", sim_methods, "Methods to evaluate")
        ->delimiter(',')
        ->capture_default_str();
    auto* grid_opt = sim_cmd->add_option(
        "--grid", sim_grid, "True-distance grid for a power curve (power mode)");
    grid_opt->delimiter(',');
    sim_cmd->add_option("--n1", sc.n1, "Group 1 sample size")->capture_default_str();
    sim_cmd->add_option("--n2", sc.n2, "Group 2 sample size")->capture_default_str();
    sim_cmd->add_option("--sigma1", sc.sigma2_1, "Group 1 error variance")
        ->capture_default_str();
    sim_cmd->add_option("--sigma2", sc.sigma2_2, "Group 2 error variance")
        ->capture_default_str();
    sim_cmd->add_option("--levels", sim_levels, "Dose levels")->delimiter(',');
    sim_cmd->add_option("--reps", sc.reps, "Monte Carlo repetitions")->capture_default_str();
    sim_cmd->add_option("--B", sc.B, "Bootstrap replicates per repetition")
        ->capture_default_str();
    sim_cmd->add_option("--M", sc.M, "Limit-law draws per repetition")->capture_default_str();
    sim_cmd->add_option("--eps", sc.eps, "Equivalence margin")->capture_default_str();
    sim_cmd->add_option("--alpha", sc.alpha, "Level parameter")->capture_default_str();
    sim_cmd->add_option("--c", sc.const_c, "Near-coincidence threshold constant")
        ->capture_default_str();
    sim_cmd->add_option("--seed", seed, "RNG seed (env CURVE_EQUIV_SEED is the fallback)");
    sim_cmd->add_option("--csv", sim_csv, "Write the CSV table here (default: stdout)");
    sim_cmd->add_option("--out", sim_out, "Write a JSON summary here (optional)");
    sim_cmd->add_option("--threads", threads, "Thread-count hint (run is serial)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        std::cout << e.what() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*fit_cmd) {
            const ModelSpec m1 =
                build_model(fit_args.model1, fit_args.xlo, fit_args.xhi, fit_args.box1_lo,
                            fit_args.box1_hi);
            const ModelSpec m2 =
                build_model(fit_args.model2, fit_args.xlo, fit_args.xhi, fit_args.box2_lo,
                            fit_args.box2_hi);
            const TwoGroupData data = load_csv(fit_args.data_path);
            const FittedPair pair =
                fit_both(m1, m2, data, start_or_midpoint(m1, fit_args.start1),
                         start_or_midpoint(m2, fit_args.start2));
            json report;
            to_json(report, pair);
            report["d1_hat"] = l1_distance(m1, pair.g1.beta_hat, m2, pair.g2.beta_hat);
            json options = echo_model(fit_args);
            options["threads"] = threads;
            emit_report("fit", std::move(options), std::move(report), fit_out);
            return 0;
        }

        if (*ci_cmd) {
            const RunMethod method = method_from_string(ci_method);
            if (method != RunMethod::asymptotic && method != RunMethod::bootstrap_ci)
                throw input_error("ci supports the asymptotic and bootstrap-ci methods");
            if (two_sided && method != RunMethod::asymptotic)
                throw input_error("two-sided intervals require the asymptotic method");
            const ModelSpec m1 = build_model(ci_args.model1, ci_args.xlo, ci_args.xhi,
                                             ci_args.box1_lo, ci_args.box1_hi);
            const ModelSpec m2 = build_model(ci_args.model2, ci_args.xlo, ci_args.xhi,
                                             ci_args.box2_lo, ci_args.box2_hi);
            const TwoGroupData data = load_csv(ci_args.data_path);
            CiReport rep;
            if (method == RunMethod::asymptotic) {
                const FittedPair pair =
                    fit_both(m1, m2, data, start_or_midpoint(m1, ci_args.start1),
                             start_or_midpoint(m2, ci_args.start2));
                rep = two_sided
                          ? two_sided_ci(m1, m2, pair, data, ci_alpha, ci_M, seed, ci_c)
                          : asymptotic_ci(m1, m2, pair, data, ci_alpha, ci_M, seed, ci_c);
            } else {
                BootstrapConfig cfg;
                cfg.B = ci_B;
                cfg.alpha = ci_alpha;
                cfg.seed = seed;
                cfg.start1 = ci_args.start1;
                cfg.start2 = ci_args.start2;
                rep = bootstrap_ci(m1, m2, data, cfg);
            }
            warn_if_degenerate(rep.degenerate);
            json options = echo_model(ci_args);
            options["method"] = ci_method;
            options["two_sided"] = two_sided;
            options["alpha"] = ci_alpha;
            options["M"] = ci_M;
            options["B"] = ci_B;
            options["c"] = ci_c;
            options["seed"] = seed;
            options["threads"] = threads;
            emit_report("ci", std::move(options), json(rep), ci_out);
            return 0;
        }

        if (*test_cmd) {
            const RunMethod method = method_from_string(test_method);
            const ModelSpec m1 = build_model(test_args.model1, test_args.xlo, test_args.xhi,
                                             test_args.box1_lo, test_args.box1_hi);
            const ModelSpec m2 = build_model(test_args.model2, test_args.xlo, test_args.xhi,
                                             test_args.box2_lo, test_args.box2_hi);
            if (!(sn_scale > 0.0)) throw input_error("--sn-scale must be positive");
            const TwoGroupData data = load_csv(test_args.data_path);
            TestReport rep;
            if (method == RunMethod::asymptotic) {
                const FittedPair pair =
                    fit_both(m1, m2, data, start_or_midpoint(m1, test_args.start1),
                             start_or_midpoint(m2, test_args.start2));
                rep = asymptotic_test(m1, m2, pair, data, test_eps, test_alpha, test_M, seed,
                                      test_c);
            } else {
                BootstrapConfig cfg;
                cfg.B = test_B;
                cfg.alpha = test_alpha;
                cfg.eps = test_eps;
                cfg.seed = seed;
                cfg.start1 = test_args.start1;
                cfg.start2 = test_args.start2;
                cfg.resample_unconstrained = resample_unconstrained;
                if (sn_scale != 1.0)
                    cfg.sn_rule = [sn_scale](std::size_t n) {
                        return sn_scale * default_sn(n);
                    };
                if (method == RunMethod::bootstrap_ci)
                    rep = bootstrap_ci_test(m1, m2, data, cfg);
                else if (method == RunMethod::constrained_bootstrap)
                    rep = constrained_bootstrap_test(m1, m2, data, cfg);
                else
                    rep = derivative_bootstrap_test(m1, m2, data, cfg);
            }
            json options = echo_model(test_args);
            options["method"] = test_method;
            options["eps"] = test_eps;
            options["alpha"] = test_alpha;
            options["M"] = test_M;
            options["B"] = test_B;
            options["c"] = test_c;
            options["sn_scale"] = sn_scale;
            options["resample_unconstrained"] = resample_unconstrained;
            options["seed"] = seed;
            options["threads"] = threads;
            emit_report("test", std::move(options), json(rep), test_out);
            return 0;
        }

        // simulate
        sc.shape = shape_from_string(sim_shape);
        sc.levels = sim_levels;
        if (*delta_opt && *gamma_opt)
            throw input_error("--delta and --gamma are mutually exclusive");
        if (*delta_opt && sc.shape != ScenarioShape::parallel)
            throw input_error("--delta applies to the parallel scenario");
        if (*gamma_opt && sc.shape != ScenarioShape::intersecting)
            throw input_error("--gamma applies to the intersecting scenario");
        sc.value = *delta_opt ? sim_delta : (*gamma_opt ? sim_gamma : 0.0);

        std::vector<RunMethod> methods;
        methods.reserve(sim_methods.size());
        for (const std::string& s : sim_methods) methods.push_back(method_from_string(s));

        std::vector<OperatingCharacteristics> rows;
        if (sim_mode == "coverage") {
            if (*grid_opt) throw input_error("--grid requires --mode power");
            rows.push_back(run_coverage(sc, methods, seed));
        } else if (sim_mode == "power") {
            if (*grid_opt) {
                if (*delta_opt || *gamma_opt)
                    throw input_error(
                        "--grid fixes the true distances; drop --delta/--gamma");
                rows = run_power_curve(sc, sim_grid, methods, seed);
            } else {
                rows.push_back(run_power(sc, methods, seed));
            }
        } else {
            throw input_error("unknown mode '" + sim_mode + "'; expected coverage or power");
        }

        std::ostringstream csv;
        write_power_csv(rows, csv);
        write_text(sim_csv, csv.str());
        if (!sim_out.empty()) {
            json options{{"scenario", sim_shape},
                         {"mode", sim_mode},
                         {"value", sc.value},
                         {"methods", sim_methods},
                         {"grid", sim_grid},
                         {"n1", sc.n1},
                         {"n2", sc.n2},
                         {"sigma1", sc.sigma2_1},
                         {"sigma2", sc.sigma2_2},
                         {"levels", sc.levels},
                         {"reps", sc.reps},
                         {"B", sc.B},
                         {"M", sc.M},
                         {"eps", sc.eps},
                         {"alpha", sc.alpha},
                         {"c", sc.const_c},
                         {"seed", seed},
                         {"threads", threads}};
            emit_report("simulate", std::move(options), json(rows), sim_out);
        }
        return 0;
    } catch (const procedure_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
