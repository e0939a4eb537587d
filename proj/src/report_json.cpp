#include "curve_equiv/report_json.hpp"

namespace curve_equiv {

using nlohmann::json;

void to_json(json& j, const Interval& v) { j = json{{"lo", v.lo}, {"hi", v.hi}}; }

void to_json(json& j, const FittedGroup& v) {
    j = json{{"beta_hat", v.beta_hat},   {"sigma2_hat", v.sigma2_hat},
             {"sse", v.sse},             {"converged", v.converged},
             {"iterations", v.iterations}, {"underdetermined", v.underdetermined}};
}

void to_json(json& j, const FittedPair& v) {
    j = json{{"group1", v.g1}, {"group2", v.g2}, {"kappa_hat", v.kappa_hat}};
}

void to_json(json& j, const CiReport& v) {
    j = json{{"method", v.method},
             {"two_sided", v.two_sided},
             {"lower", v.lower},
             {"upper", v.upper},
             {"alpha", v.alpha},
             {"d1_hat", v.d1_hat},
             {"quantiles_used", v.quantiles_used},
             {"n", v.n},
             {"n1", v.n1},
             {"n2", v.n2},
             {"reps", v.reps},
             {"seed", v.seed},
             {"kappa", v.kappa},
             {"dropped", v.dropped},
             {"degenerate", v.degenerate},
             {"null_set", v.null_set}};
}

void to_json(json& j, const TestReport& v) {
    j = json{{"method", v.method},
             {"reject", v.reject},
             {"d1_hat", v.d1_hat},
             {"eps", v.eps},
             {"alpha", v.alpha},
             {"critical", v.critical},
             {"quantiles_used", v.quantiles_used},
             {"n", v.n},
             {"n1", v.n1},
             {"n2", v.n2},
             {"reps", v.reps},
             {"seed", v.seed},
             {"kappa", v.kappa},
             {"dropped", v.dropped},
             {"degenerate", v.degenerate},
             {"branch", v.branch},
             {"gen_d1", v.gen_d1},
             {"constraint_gap", v.constraint_gap},
             {"sn_threshold", v.sn_threshold},
             {"null_set", v.null_set}};
}

void to_json(json& j, const MethodOC& v) {
    // Wall-clock timing is deliberately left out so that a rerun with the
    // echoed options reproduces the report byte for byte.
    j = json{{"method", v.method},       {"rate", v.rate},
             {"se", v.se},               {"successes", v.successes},
             {"completed", v.completed}, {"errors", v.errors}};
}

void to_json(json& j, const Scenario& v) {
    j = json{{"shape", to_string(v.shape)},
             {"value", v.value},
             {"n1", v.n1},
             {"n2", v.n2},
             {"sigma2_1", v.sigma2_1},
             {"sigma2_2", v.sigma2_2},
             {"levels", v.levels},
             {"eps", v.eps},
             {"alpha", v.alpha},
             {"reps", v.reps},
             {"B", v.B},
             {"M", v.M},
             {"const_c", v.const_c}};
}

void to_json(json& j, const OperatingCharacteristics& v) {
    j = json{{"true_d1", v.true_d1}, {"scenario", v.scenario}, {"methods", v.methods}};
}

}  // namespace curve_equiv
