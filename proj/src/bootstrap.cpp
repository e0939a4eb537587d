#include "curve_equiv/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "curve_equiv/errors.hpp"
#include "curve_equiv/quadrature.hpp"
#include "curve_equiv/rng.hpp"

namespace curve_equiv {

double default_sn(std::size_t n) {
    if (n < 2) throw input_error("threshold rule needs a total sample size of at least 2");
    const double nn = static_cast<double>(n);
    return std::sqrt(nn / std::log(nn));
}

namespace {

void check_cfg(const BootstrapConfig& cfg, bool needs_eps) {
    if (cfg.B < 50)
        throw input_error("bootstrap needs at least 50 replicates, got B = " +
                          std::to_string(cfg.B));
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw input_error("alpha must lie in (0, 1)");
    if (needs_eps && !(cfg.eps > 0.0))
        throw input_error("equivalence margin eps must be positive");
    if (!(cfg.max_dropped_frac >= 0.0 && cfg.max_dropped_frac <= 1.0))
        throw input_error("max_dropped_frac must lie in [0, 1]");
}

ParameterVector start_or_midpoint(const ModelSpec& spec, const ParameterVector& start) {
    return start.empty() ? spec.box().midpoint() : start;
}

struct Prepared {
    FittedPair fit;
    double d1_hat = 0.0;
    bool degenerate = false;
    std::size_t n = 0, n1 = 0, n2 = 0;
};

Prepared prepare(const ModelSpec& m1, const ModelSpec& m2, const TwoGroupData& data,
                 const BootstrapConfig& cfg) {
    data.validate();
    Prepared p;
    p.fit = fit_both(m1, m2, data, start_or_midpoint(m1, cfg.start1),
                     start_or_midpoint(m2, cfg.start2), cfg.fit);
    if (!p.fit.g1.converged || !p.fit.g2.converged)
        throw procedure_error("initial least-squares fit did not converge");
    p.d1_hat = l1_distance(m1, p.fit.g1.beta_hat, m2, p.fit.g2.beta_hat);
    p.degenerate = p.fit.g1.sigma2_hat == 0.0 && p.fit.g2.sigma2_hat == 0.0;
    p.n1 = data.group1.n_total();
    p.n2 = data.group2.n_total();
    p.n = p.n1 + p.n2;
    return p;
}

struct RepRun {
    std::vector<BootReplicate> reps;
    std::size_t dropped = 0;
};

// Resample at the generating parameters, refit both groups warm-started
// there, and hand the refitted parameters to `finish` for the replicate
// statistic.  A replicate is dropped when a refit fails to converge or the
// statistic cannot be evaluated.
RepRun run_replicates(const ModelSpec& m1, const ModelSpec& m2, const TwoGroupData& design,
                      const BootstrapConfig& cfg, const ParameterVector& gen1,
                      const ParameterVector& gen2, double s21, double s22,
                      const std::function<void(BootReplicate&)>& finish) {
    RepRun out;
    out.reps.reserve(cfg.B);
    for (std::size_t b = 0; b < cfg.B; ++b) {
        BootReplicate rep;
        rep.seed = derive_seed(cfg.seed, b);
        bool ok = true;
        try {
            TwoGroupData star = resample(m1, m2, design, gen1, gen2, s21, s22, rep.seed);
            FittedGroup f1 = ls_fit(m1, star.group1, gen1, cfg.fit);
            FittedGroup f2 = ls_fit(m2, star.group2, gen2, cfg.fit);
            ok = f1.converged && f2.converged;
            if (ok) {
                rep.beta1_star = std::move(f1.beta_hat);
                rep.beta2_star = std::move(f2.beta_hat);
                finish(rep);
            }
        } catch (const procedure_error&) {
            ok = false;
        }
        if (ok)
            out.reps.push_back(std::move(rep));
        else
            ++out.dropped;
    }
    const double limit = cfg.max_dropped_frac * static_cast<double>(cfg.B);
    if (static_cast<double>(out.dropped) > limit) {
        std::ostringstream msg;
        msg << "bootstrap failed: " << out.dropped << " of " << cfg.B
            << " replicate fits were dropped (limit " << limit << ")";
        throw procedure_error(msg.str());
    }
    return out;
}

std::vector<double> collect_d1(const RepRun& run) {
    std::vector<double> v;
    v.reserve(run.reps.size());
    for (const BootReplicate& r : run.reps) v.push_back(r.d1_star);
    return v;
}

void fill_test_common(TestReport& t, const Prepared& p, const BootstrapConfig& cfg,
                      std::size_t dropped) {
    t.d1_hat = p.d1_hat;
    t.eps = cfg.eps;
    t.alpha = cfg.alpha;
    t.n = p.n;
    t.n1 = p.n1;
    t.n2 = p.n2;
    t.reps = cfg.B;
    t.seed = cfg.seed;
    t.kappa = p.fit.kappa_hat;
    t.dropped = dropped;
    t.degenerate = p.degenerate;
}

// Generating-curve regions for the directional-derivative statistic:
// |theta| < threshold contributes |f|, the rest contributes sgn(theta) * f.
struct PhiRegions {
    std::vector<Interval> abs_parts;
    std::vector<std::pair<Interval, double>> sgn_parts;
    Domain dom;
    double threshold = 0.0;
};

PhiRegions make_phi_regions(const DiffCurve& theta, double threshold) {
    PhiRegions R;
    R.dom = theta.domain();
    R.threshold = threshold;
    const double tiny = 1e-12 * (1.0 + (R.dom.hi - R.dom.lo));
    const IntervalSet nhat = sublevel_set(theta, threshold);
    for (const Interval& p : nhat.parts())
        if (p.length() > tiny) R.abs_parts.push_back(p);
    const IntervalSet comp = nhat.complement(R.dom);  // named: parts() must outlive the loop
    for (const Interval& p : comp.parts()) {
        if (p.length() <= tiny) continue;
        const double mid = 0.5 * (p.lo + p.hi);
        R.sgn_parts.push_back({p, theta(mid) >= 0.0 ? 1.0 : -1.0});
    }
    return R;
}

double phi_value(const PhiRegions& R, const std::function<double(double)>& f) {
    const double len = R.dom.hi - R.dom.lo;
    double fs = 0.0;
    for (int i = 0; i <= 64; ++i) {
        const double v = std::abs(f(R.dom.lo + len * (static_cast<double>(i) / 64.0)));
        if (std::isfinite(v)) fs = std::max(fs, v);
    }
    const double scale = std::max(1.0, fs);
    double acc = 0.0;
    for (const auto& [iv, sign] : R.sgn_parts)
        acc += sign * adaptive_simpson(f, iv.lo, iv.hi, 1e-9 * iv.length() * scale);
    for (const Interval& iv : R.abs_parts)
        acc += integrate_abs(f, iv.lo, iv.hi, 1e-9 * iv.length() * scale);
    return acc;
}

double resolve_sn(const BootstrapConfig& cfg, std::size_t n) {
    const double sn = cfg.sn_rule ? cfg.sn_rule(n) : default_sn(n);
    if (!(sn > 0.0) || !std::isfinite(sn))
        throw input_error("threshold rule must return a positive finite value");
    return sn;
}

}  // namespace

TwoGroupData resample(const ModelSpec& spec1, const ModelSpec& spec2,
                      const TwoGroupData& design, const ParameterVector& beta1,
                      const ParameterVector& beta2, double sigma2_1, double sigma2_2,
                      std::uint64_t seed) {
    if (sigma2_1 < 0.0 || sigma2_2 < 0.0)
        throw input_error("residual variances must be nonnegative");
    std::mt19937_64 gen = substream(seed, 0);
    std::normal_distribution<double> z;
    TwoGroupData out;
    const auto fill = [&](const ModelSpec& spec, const GroupSample& src,
                          const ParameterVector& beta, double s2, GroupSample& dst) {
        const double sd = std::sqrt(s2);
        dst.levels = src.levels;
        dst.obs.resize(src.obs.size());
        for (std::size_t i = 0; i < src.levels.size(); ++i) {
            const double mean = spec.eval(src.levels[i], beta);
            dst.obs[i].resize(src.obs[i].size());
            for (double& y : dst.obs[i]) y = mean + sd * z(gen);
        }
    };
    fill(spec1, design.group1, beta1, sigma2_1, out.group1);
    fill(spec2, design.group2, beta2, sigma2_2, out.group2);
    return out;
}

CiReport bootstrap_ci(const ModelSpec& spec1, const ModelSpec& spec2, const TwoGroupData& data,
                      const BootstrapConfig& cfg) {
    check_cfg(cfg, false);
    const Prepared p = prepare(spec1, spec2, data, cfg);
    const RepRun run = run_replicates(
        spec1, spec2, data, cfg, p.fit.g1.beta_hat, p.fit.g2.beta_hat, p.fit.g1.sigma2_hat,
        p.fit.g2.sigma2_hat, [&](BootReplicate& rep) {
            rep.d1_star = l1_distance(spec1, rep.beta1_star, spec2, rep.beta2_star);
        });
    const double q = quantile(collect_d1(run), 1.0 - cfg.alpha);
    CiReport r;
    r.method = method_tag::bootstrap;
    r.two_sided = false;
    r.lower = 0.0;
    r.upper = q;
    r.alpha = cfg.alpha;
    r.d1_hat = p.d1_hat;
    r.quantiles_used = {q};
    r.n = p.n;
    r.n1 = p.n1;
    r.n2 = p.n2;
    r.reps = cfg.B;
    r.seed = cfg.seed;
    r.kappa = p.fit.kappa_hat;
    r.dropped = run.dropped;
    r.degenerate = p.degenerate;
    return r;
}

TestReport bootstrap_ci_test(const ModelSpec& spec1, const ModelSpec& spec2,
                             const TwoGroupData& data, const BootstrapConfig& cfg) {
    check_cfg(cfg, true);
    const CiReport ci = bootstrap_ci(spec1, spec2, data, cfg);
    TestReport t;
    t.method = method_tag::bootstrap_ci;
    // Reject exactly when the one-sided CI [0, upper) lies inside [0, eps).
    t.reject = ci.upper < cfg.eps;
    t.critical = ci.upper;
    t.d1_hat = ci.d1_hat;
    t.eps = cfg.eps;
    t.alpha = cfg.alpha;
    t.quantiles_used = ci.quantiles_used;
    t.n = ci.n;
    t.n1 = ci.n1;
    t.n2 = ci.n2;
    t.reps = ci.reps;
    t.seed = ci.seed;
    t.kappa = ci.kappa;
    t.dropped = ci.dropped;
    t.degenerate = ci.degenerate;
    return t;
}

TestReport constrained_bootstrap_test(const ModelSpec& spec1, const ModelSpec& spec2,
                                      const TwoGroupData& data, const BootstrapConfig& cfg) {
    check_cfg(cfg, true);
    const Prepared p = prepare(spec1, spec2, data, cfg);

    ParameterVector gen1, gen2;
    TestReport t;
    t.method = method_tag::constrained_bootstrap;
    if (p.d1_hat >= cfg.eps) {
        t.branch = "unconstrained";
        gen1 = p.fit.g1.beta_hat;
        gen2 = p.fit.g2.beta_hat;
        t.gen_d1 = p.d1_hat;
    } else {
        const ConstrainedFit cf = constrained_fit(spec1, spec2, data, cfg.eps, p.fit, cfg.fit);
        t.branch = "constrained";
        gen1 = cf.pair.g1.beta_hat;
        gen2 = cf.pair.g2.beta_hat;
        t.gen_d1 = cf.d1;
        t.constraint_gap = cf.gap;
    }
    if (t.gen_d1 < cfg.eps - constrained_fit_tolerance(cfg.eps))
        throw procedure_error("resampling parameters violate the distance constraint");

    const RepRun run = run_replicates(
        spec1, spec2, data, cfg, gen1, gen2, p.fit.g1.sigma2_hat, p.fit.g2.sigma2_hat,
        [&](BootReplicate& rep) {
            rep.d1_star = l1_distance(spec1, rep.beta1_star, spec2, rep.beta2_star);
        });
    const double q = quantile(collect_d1(run), cfg.alpha);
    fill_test_common(t, p, cfg, run.dropped);
    t.reject = p.d1_hat < q;
    t.critical = q;
    t.quantiles_used = {q};
    return t;
}

double phi_prime_hat(const DiffCurve& theta_hat, const std::function<double(double)>& f,
                     std::size_t n, const SnRule& sn_rule) {
    const double sn = sn_rule ? sn_rule(n) : default_sn(n);
    if (!(sn > 0.0) || !std::isfinite(sn))
        throw input_error("threshold rule must return a positive finite value");
    return phi_value(make_phi_regions(theta_hat, 1.0 / sn), f);
}

TestReport derivative_bootstrap_test(const ModelSpec& spec1, const ModelSpec& spec2,
                                     const TwoGroupData& data, const BootstrapConfig& cfg) {
    check_cfg(cfg, true);
    const Prepared p = prepare(spec1, spec2, data, cfg);

    ParameterVector gen1, gen2;
    TestReport t;
    t.method = method_tag::derivative_bootstrap;
    if (p.d1_hat >= cfg.eps || cfg.resample_unconstrained) {
        t.branch = "unconstrained";
        gen1 = p.fit.g1.beta_hat;
        gen2 = p.fit.g2.beta_hat;
        t.gen_d1 = p.d1_hat;
    } else {
        const ConstrainedFit cf = constrained_fit(spec1, spec2, data, cfg.eps, p.fit, cfg.fit);
        t.branch = "constrained";
        gen1 = cf.pair.g1.beta_hat;
        gen2 = cf.pair.g2.beta_hat;
        t.gen_d1 = cf.d1;
        t.constraint_gap = cf.gap;
    }

    // The statistic centers and thresholds on the resampling curve itself.
    const DiffCurve gen_curve(spec1, gen1, spec2, gen2);
    const double sn = resolve_sn(cfg, p.n);
    const PhiRegions regions = make_phi_regions(gen_curve, 1.0 / sn);

    const RepRun run = run_replicates(
        spec1, spec2, data, cfg, gen1, gen2, p.fit.g1.sigma2_hat, p.fit.g2.sigma2_hat,
        [&](BootReplicate& rep) {
            const auto f = [&](double x) {
                return spec1.eval(x, rep.beta1_star) - spec2.eval(x, rep.beta2_star) -
                       gen_curve(x);
            };
            rep.phi_star = phi_value(regions, f);
        });

    std::vector<double> phis;
    phis.reserve(run.reps.size());
    for (const BootReplicate& r : run.reps) phis.push_back(r.phi_star);
    const double q = quantile(std::move(phis), cfg.alpha);

    fill_test_common(t, p, cfg, run.dropped);
    t.reject = p.d1_hat < q + cfg.eps;
    t.critical = q + cfg.eps;
    t.quantiles_used = {q};
    t.sn_threshold = 1.0 / sn;
    return t;
}

}  // namespace curve_equiv
