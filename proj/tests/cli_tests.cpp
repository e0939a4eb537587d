// End-to-end checks of the curve-equiv command line tool.  argv[1] is the
// path to the built binary; each case shells out and inspects exit status,
// stdout, and stderr.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_failures = 0;
std::string g_bin;
fs::path g_dir;

#define CHECK_MSG(cond, msg)                                                      \
    do {                                                                          \
        if (cond) {                                                               \
            std::cout << "ok: " << msg << "\n";                                   \
        } else {                                                                  \
            ++g_failures;                                                         \
            std::cout << "FAIL (" << __FILE__ << ":" << __LINE__ << "): " << msg \
                      << "\n";                                                    \
        }                                                                         \
    } while (0)

struct RunResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// `prefix` lets a case prepend environment assignments (sh syntax).
RunResult run(const std::string& args, const std::string& prefix = "") {
    const fs::path out = g_dir / "stdout.txt";
    const fs::path err = g_dir / "stderr.txt";
    const std::string cmd = prefix + g_bin + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int raw = std::system(cmd.c_str());  // std::system runs via /bin/sh -c
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

double emax(double x, double b1, double b2, double b3) { return b1 + b2 * x / (b3 + x); }

// Parallel Emax pair, 5 levels, k observations per level per group.
// `noise` = 0 writes each curve exactly; otherwise adds a fixed offset cycle.
void write_parallel_csv(const fs::path& p, double delta, int k, bool noise) {
    const double cyc1[] = {0.30, -0.25, 0.12, -0.17};
    const double cyc2[] = {-0.21, 0.28, -0.09, 0.14};
    std::ostringstream ss;
    ss.precision(17);
    ss << "group,dose,response\n";
    int i = 0;
    for (double x : {0.0, 1.0, 2.0, 3.0, 4.0})
        for (int j = 0; j < k; ++j, ++i) {
            const double e1 = noise ? cyc1[i % 4] : 0.0;
            const double e2 = noise ? cyc2[i % 4] : 0.0;
            ss << "1," << x << "," << emax(x, delta, 5.0, 1.0) + e1 << "\n";
            ss << "2," << x << "," << emax(x, 0.0, 5.0, 1.0) + e2 << "\n";
        }
    write_file(p, ss.str());
}

json parse_doc(const RunResult& r) { return json::parse(r.out); }

// A case that throws (bad JSON, missing key, failed command) fails alone
// instead of aborting the whole suite.
void run_case(const std::string& label, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        ++g_failures;
        std::cout << "FAIL (" << label << "): exception: " << e.what() << "\n";
    }
}

const std::string kStarts = " --start1 0.3,5,1 --start2 0,5,1";

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <path-to-curve-equiv>\n";
        return 2;
    }
    g_bin = argv[1];
    g_dir = fs::temp_directory_path() / "curve_equiv_cli_tests";
    fs::create_directories(g_dir);

    const fs::path zero_csv = g_dir / "zero.csv";
    const fs::path noisy_csv = g_dir / "noisy.csv";
    write_parallel_csv(zero_csv, 0.3, 2, false);
    write_parallel_csv(noisy_csv, 0.3, 4, true);

    run_case("help", [&] {
        const RunResult r = run("--help");
        CHECK_MSG(r.code == 0, "--help exits 0");
        CHECK_MSG(r.out.find("fit") != std::string::npos &&
                      r.out.find("simulate") != std::string::npos,
                  "--help lists the subcommands");
    });

    run_case("fit", [&] {
        const RunResult a = run("fit " + zero_csv.string() + kStarts);
        CHECK_MSG(a.code == 0, "fit exits 0 on clean data");
        const json doc = parse_doc(a);
        CHECK_MSG(doc.at("command") == "fit", "fit report carries its command name");
        const json& g1 = doc.at("report").at("group1");
        CHECK_MSG(g1.at("converged").get<bool>(), "fit converges on exact data");
        CHECK_MSG(std::abs(g1.at("beta_hat")[0].get<double>() - 0.3) < 1e-5,
                  "fit recovers the generating offset");
        const RunResult b = run("fit " + zero_csv.string() + kStarts);
        CHECK_MSG(a.out == b.out, "fit output is byte-identical across reruns");
    });

    run_case("degenerate ci", [&] {
        const RunResult r = run("ci " + zero_csv.string() +
                                " --method bootstrap-ci --B 50 --seed 3" + kStarts);
        CHECK_MSG(r.code == 0, "bootstrap ci exits 0 on zero-noise data");
        CHECK_MSG(r.err.find("degenerate") != std::string::npos,
                  "zero residual variance triggers the degenerate warning");
        const json rep = parse_doc(r).at("report");
        CHECK_MSG(rep.at("upper") == rep.at("d1_hat"),
                  "degenerate interval collapses to the point estimate");
    });

    run_case("asymptotic test decision", [&] {
        const RunResult r = run("test " + noisy_csv.string() +
                                " --method asymptotic --eps 1.2 --seed 5" + kStarts);
        CHECK_MSG(r.code == 0, "asymptotic test exits 0");
        const json rep = parse_doc(r).at("report");
        const bool expect = rep.at("d1_hat").get<double>() <= rep.at("critical").get<double>();
        CHECK_MSG(rep.at("reject").get<bool>() == expect,
                  "asymptotic decision matches d1_hat <= critical");
    });

    run_case("missing eps", [&] {
        const RunResult r = run("test " + noisy_csv.string() + " --method asymptotic");
        CHECK_MSG(r.code == 1, "missing required --eps exits 1");
    });

    run_case("malformed csv", [&] {
        const fs::path bad = g_dir / "bad.csv";
        write_file(bad, "group,dose,response\n1,0,1.5\n1,oops,2.0\n2,0,1.1\n");
        const RunResult r = run("fit " + bad.string());
        CHECK_MSG(r.code == 1, "malformed CSV exits 1");
        CHECK_MSG(r.err.find("row") != std::string::npos,
                  "CSV errors point at the offending row");
    });

    run_case("unknown model", [&] {
        const RunResult r = run("fit " + zero_csv.string() + " --model1 spline");
        CHECK_MSG(r.code == 1, "unknown model family exits 1");
    });

    run_case("singular design", [&] {
        // Two distinct doses cannot identify three quadratic parameters.
        const fs::path two = g_dir / "two_levels.csv";
        write_file(two,
                   "group,dose,response\n"
                   "1,0,0.1\n1,0,-0.1\n1,1,1.2\n1,1,0.9\n"
                   "2,0,0.05\n2,0,-0.02\n2,1,1.1\n2,1,1.05\n");
        const RunResult r =
            run("ci " + two.string() + " --model1 quadratic --model2 quadratic");
        CHECK_MSG(r.code == 2, "singular information matrix exits 2");
        CHECK_MSG(r.err.find("singular") != std::string::npos,
                  "singular design is named in the error");
    });

    run_case("unreachable constraint", [&] {
        // Boxed linear curves cannot reach the distance boundary eps = 1.
        const fs::path flat = g_dir / "flat.csv";
        std::ostringstream ss;
        ss << "group,dose,response\n";
        for (double x : {0.0, 1.0, 2.0, 3.0})
            ss << "1," << x << ",0\n2," << x << ",0\n";
        write_file(flat, ss.str());
        const RunResult r = run(
            "test " + flat.string() +
            " --model1 linear --model2 linear"
            " --box1-lo -0.01,-0.01 --box1-hi 0.01,0.01"
            " --box2-lo -0.01,-0.01 --box2-hi 0.01,0.01"
            " --start1 0,0 --start2 0,0"
            " --method constrained-bootstrap --eps 1 --B 50");
        CHECK_MSG(r.code == 2, "unreachable distance constraint exits 2");
        CHECK_MSG(r.err.find("constrained") != std::string::npos,
                  "constraint failure is named in the error");
    });

    const fs::path cfg_json = g_dir / "cfg.json";
    write_file(cfg_json, "{\"test\": {\"eps\": 2.0, \"seed\": 9}}\n");

    run_case("json config", [&] {
        const RunResult r = run("test " + noisy_csv.string() + " --config " +
                                cfg_json.string() + " --method asymptotic --eps 1.0" +
                                kStarts);
        CHECK_MSG(r.code == 0, "JSON config parses");
        const json opts = parse_doc(r).at("options");
        CHECK_MSG(opts.at("eps").get<double>() == 1.0, "command-line --eps beats the config");
        CHECK_MSG(opts.at("seed").get<std::uint64_t>() == 9, "config seed applies");
    });

    run_case("ini config", [&] {
        const fs::path cfg_ini = g_dir / "cfg.ini";
        write_file(cfg_ini, "[test]\neps=2.0\nseed=9\n");
        const RunResult r = run("test " + noisy_csv.string() + " --config " +
                                cfg_ini.string() + " --method asymptotic" + kStarts);
        CHECK_MSG(r.code == 0, "INI config satisfies the required --eps");
        const json opts = parse_doc(r).at("options");
        CHECK_MSG(opts.at("eps").get<double>() == 2.0, "INI config sets eps");
        CHECK_MSG(opts.at("seed").get<std::uint64_t>() == 9, "INI config sets seed");
    });

    run_case("seed precedence", [&] {
        const std::string base =
            "test " + noisy_csv.string() + " --method asymptotic --eps 1.2" + kStarts;
        const RunResult env_only = run(base, "CURVE_EQUIV_SEED=42 ");
        CHECK_MSG(parse_doc(env_only).at("options").at("seed").get<std::uint64_t>() == 42,
                  "CURVE_EQUIV_SEED supplies the default seed");
        const RunResult env_flag = run(base + " --seed 7", "CURVE_EQUIV_SEED=42 ");
        CHECK_MSG(parse_doc(env_flag).at("options").at("seed").get<std::uint64_t>() == 7,
                  "--seed beats the environment");
        const RunResult env_cfg = run("test " + noisy_csv.string() + " --config " +
                                          cfg_json.string() +
                                          " --method asymptotic --eps 1.0" + kStarts,
                                      "CURVE_EQUIV_SEED=42 ");
        CHECK_MSG(parse_doc(env_cfg).at("options").at("seed").get<std::uint64_t>() == 9,
                  "config seed beats the environment");
        const RunResult env_bad = run(base, "CURVE_EQUIV_SEED=banana ");
        CHECK_MSG(env_bad.code == 1, "non-numeric CURVE_EQUIV_SEED exits 1");
    });

    run_case("simulate", [&] {
        const RunResult r = run(
            "simulate --scenario parallel --mode power --delta 0.25 --reps 5 --B 50"
            " --M 1000 --n1 20 --n2 20 --methods asymptotic,bootstrap-ci --seed 1");
        CHECK_MSG(r.code == 0, "simulate exits 0");
        std::istringstream in(r.out);
        std::string header;
        std::getline(in, header);
        CHECK_MSG(header == "d1,rate,se,method,n1,n2,sigma1,sigma2",
                  "simulate CSV header matches the documented layout");
        CHECK_MSG(r.out.find("\n1,") != std::string::npos,
                  "simulate reports the true distance 4*delta = 1");
        CHECK_MSG(r.out.find("bootstrap-ci") != std::string::npos,
                  "simulate includes every requested method");
    });

    std::cout << (g_failures == 0 ? "cli_tests: all checks passed\n"
                                  : "cli_tests: FAILURES\n");
    return g_failures == 0 ? 0 : 1;
}
