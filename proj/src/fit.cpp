#include "curve_equiv/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "curve_equiv/distance.hpp"
#include "curve_equiv/rng.hpp"

namespace curve_equiv {

namespace {

// Per-level sufficient statistics: the least-squares objective depends on the
// data only through (x_i, n_i, ybar_i) plus the constant within-level scatter.
struct LevelData {
    std::vector<double> x, cnt, ybar;
    double ss_within = 0.0;
    double n = 0.0;

    static LevelData from(const GroupSample& g) {
        g.validate();
        LevelData ld;
        ld.x = g.levels;
        ld.ybar = g.level_means();
        ld.cnt.reserve(g.obs.size());
        for (const auto& o : g.obs) ld.cnt.push_back(static_cast<double>(o.size()));
        ld.ss_within = g.within_level_ss();
        ld.n = static_cast<double>(g.n_total());
        return ld;
    }

    double sse(const ModelSpec& m, const ParameterVector& beta) const {
        double between = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = ybar[i] - m.eval(x[i], beta);
            between += cnt[i] * r * r;
        }
        return between + ss_within;
    }
};

struct LmResult {
    ParameterVector beta;
    double sse = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

LmResult lm_single(const ModelSpec& m, const LevelData& ld, ParameterVector beta,
                   const FitOptions& opt) {
    const std::size_t p = m.dim();
    const std::size_t k = ld.x.size();
    beta = m.box().clamp(std::move(beta));

    LmResult res;
    res.beta = beta;
    res.sse = ld.sse(m, beta);

    Eigen::MatrixXd A(p, p);
    Eigen::VectorXd rhs(p), g(p);
    double lambda = -1.0;

    for (int it = 1; it <= opt.max_iter; ++it) {
        res.iterations = it;
        A.setZero();
        rhs.setZero();
        for (std::size_t i = 0; i < k; ++i) {
            m.grad(ld.x[i], beta, g.data());
            const double r = ld.ybar[i] - m.eval(ld.x[i], beta);
            A.noalias() += ld.cnt[i] * g * g.transpose();
            rhs.noalias() += (ld.cnt[i] * r) * g;
        }
        if (lambda < 0.0) lambda = 1e-3 * std::max(A.diagonal().maxCoeff(), 1e-12);

        bool accepted = false;
        ParameterVector beta_try;
        double sse_try = 0.0;
        while (!accepted && lambda <= 1e14) {
            Eigen::MatrixXd damped = A;
            for (std::size_t j = 0; j < p; ++j)
                damped(j, j) += lambda * std::max(A(j, j), 1e-12);
            const Eigen::VectorXd delta = damped.ldlt().solve(rhs);
            beta_try = beta;
            for (std::size_t j = 0; j < p; ++j) beta_try[j] += delta[j];
            beta_try = m.box().clamp(std::move(beta_try));
            sse_try = ld.sse(m, beta_try);
            if (std::isfinite(sse_try) && sse_try <= res.sse)
                accepted = true;
            else
                lambda *= 10.0;
        }
        if (!accepted) {
            // Damping exhausted: accept the incumbent as converged only when
            // the (half-)gradient of the objective is essentially zero.
            res.converged = rhs.lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + res.sse);
            return res;
        }
        lambda = std::max(lambda / 3.0, 1e-12);

        double step2 = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double dj = beta_try[j] - beta[j];
            step2 += dj * dj;
        }
        const double rel = (res.sse - sse_try) / std::max(res.sse, 1e-300);
        beta = beta_try;
        res.beta = beta;
        res.sse = sse_try;
        if (rel < opt.sse_rel_tol && std::sqrt(step2) < opt.step_tol) {
            res.converged = true;
            return res;
        }
    }
    return res;  // iteration budget exhausted, converged stays false
}

std::vector<ParameterVector> lhs_starts(const ParameterBox& box, int count,
                                        std::uint64_t seed) {
    std::vector<ParameterVector> starts;
    if (count <= 0) return starts;
    auto eng = substream(seed, 0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const std::size_t p = box.dim();
    const std::size_t s = static_cast<std::size_t>(count);
    // One stratified permutation per coordinate.
    std::vector<std::vector<std::size_t>> perm(p, std::vector<std::size_t>(s));
    for (std::size_t j = 0; j < p; ++j) {
        std::iota(perm[j].begin(), perm[j].end(), std::size_t{0});
        std::shuffle(perm[j].begin(), perm[j].end(), eng);
    }
    for (std::size_t i = 0; i < s; ++i) {
        ParameterVector b(p);
        for (std::size_t j = 0; j < p; ++j) {
            const double frac =
                (static_cast<double>(perm[j][i]) + u01(eng)) / static_cast<double>(s);
            b[j] = box.lo[j] + frac * (box.hi[j] - box.lo[j]);
        }
        starts.push_back(std::move(b));
    }
    return starts;
}

// ------------------------------------------------------------ Nelder-Mead

struct NmPoint {
    double f;
    std::vector<double> z;
};

std::vector<double> clamp_vec(std::vector<double> z, const std::vector<double>& lo,
                              const std::vector<double>& hi) {
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = std::clamp(z[j], lo[j], hi[j]);
    return z;
}

// Projected Nelder-Mead; returns best value, z becomes the best point.
double nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                   std::vector<double>& z, const std::vector<double>& lo,
                   const std::vector<double>& hi, int max_evals) {
    const std::size_t dim = z.size();
    int evals = 0;
    const auto eval = [&](std::vector<double> p) {
        p = clamp_vec(std::move(p), lo, hi);
        ++evals;
        return NmPoint{f(p), std::move(p)};
    };

    std::vector<NmPoint> simplex;
    simplex.push_back(eval(z));
    for (std::size_t j = 0; j < dim; ++j) {
        std::vector<double> p = simplex[0].z;
        double h = std::max(0.02 * (1.0 + std::abs(p[j])), 1e-4);
        if (p[j] + h > hi[j]) h = -h;
        p[j] += h;
        simplex.push_back(eval(std::move(p)));
    }
    const auto by_f = [](const NmPoint& a, const NmPoint& b) { return a.f < b.f; };

    while (evals < max_evals) {
        std::sort(simplex.begin(), simplex.end(), by_f);
        const double fspread = simplex.back().f - simplex.front().f;
        double diam = 0.0;
        for (std::size_t j = 0; j < dim; ++j)
            diam = std::max(diam, std::abs(simplex.back().z[j] - simplex.front().z[j]));
        if (fspread <= 1e-12 * (1.0 + std::abs(simplex.front().f)) && diam <= 1e-9) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i + 1 < simplex.size(); ++i)
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i].z[j];
        for (double& c : centroid) c /= static_cast<double>(dim);

        const auto along = [&](double t) {
            std::vector<double> p(dim);
            for (std::size_t j = 0; j < dim; ++j)
                p[j] = centroid[j] + t * (simplex.back().z[j] - centroid[j]);
            return p;
        };
        NmPoint refl = eval(along(-1.0));
        if (refl.f < simplex.front().f) {
            NmPoint expa = eval(along(-2.0));
            simplex.back() = expa.f < refl.f ? std::move(expa) : std::move(refl);
            continue;
        }
        if (refl.f < simplex[simplex.size() - 2].f) {
            simplex.back() = std::move(refl);
            continue;
        }
        NmPoint contr = eval(along(refl.f < simplex.back().f ? -0.5 : 0.5));
        if (contr.f < std::min(refl.f, simplex.back().f)) {
            simplex.back() = std::move(contr);
            continue;
        }
        // Shrink toward the best vertex.
        for (std::size_t i = 1; i < simplex.size(); ++i) {
            std::vector<double> p(dim);
            for (std::size_t j = 0; j < dim; ++j)
                p[j] = 0.5 * (simplex[0].z[j] + simplex[i].z[j]);
            simplex[i] = eval(std::move(p));
        }
    }
    std::sort(simplex.begin(), simplex.end(), by_f);
    z = simplex.front().z;
    return simplex.front().f;
}

}  // namespace

double constrained_fit_tolerance(double eps) { return 1e-4 * eps; }

FittedGroup ls_fit(const ModelSpec& spec, const GroupSample& g, const ParameterVector& start,
                   const FitOptions& opt) {
    if (start.size() != spec.dim())
        throw input_error("ls_fit: start has length " + std::to_string(start.size()) +
                          ", model expects " + std::to_string(spec.dim()));
    const LevelData ld = LevelData::from(g);
    for (double x : g.levels) spec.check_x(x);

    LmResult best = lm_single(spec, ld, start, opt);
    if (opt.n_starts > 1) {
        for (auto& s : lhs_starts(spec.box(), opt.n_starts - 1, opt.multistart_seed)) {
            LmResult r = lm_single(spec, ld, std::move(s), opt);
            if (r.sse < best.sse) best = std::move(r);  // strict: first start wins ties
        }
    }

    FittedGroup out;
    out.beta_hat = std::move(best.beta);
    out.sse = best.sse;
    out.sigma2_hat = best.sse / ld.n;
    out.converged = best.converged;
    out.iterations = best.iterations;
    out.underdetermined = ld.n <= static_cast<double>(spec.dim());
    return out;
}

FittedPair fit_both(const ModelSpec& spec1, const ModelSpec& spec2, const TwoGroupData& d,
                    const ParameterVector& start1, const ParameterVector& start2,
                    const FitOptions& opt) {
    FittedPair pair;
    pair.kappa_hat = kappa_hat(d);
    pair.g1 = ls_fit(spec1, d.group1, start1, opt);
    pair.g2 = ls_fit(spec2, d.group2, start2, opt);
    return pair;
}

ConstrainedFit constrained_fit(const ModelSpec& spec1, const ModelSpec& spec2,
                               const TwoGroupData& d, double eps, const FittedPair& start,
                               const FitOptions& opt) {
    if (!(eps > 0.0)) throw input_error("constrained_fit: eps must be positive");
    const double kappa = kappa_hat(d);
    const LevelData ld1 = LevelData::from(d.group1);
    const LevelData ld2 = LevelData::from(d.group2);
    const std::size_t p1 = spec1.dim(), p2 = spec2.dim();
    const double ctol = constrained_fit_tolerance(eps);

    std::vector<double> lo(p1 + p2), hi(p1 + p2);
    for (std::size_t j = 0; j < p1; ++j) {
        lo[j] = spec1.box().lo[j];
        hi[j] = spec1.box().hi[j];
    }
    for (std::size_t j = 0; j < p2; ++j) {
        lo[p1 + j] = spec2.box().lo[j];
        hi[p1 + j] = spec2.box().hi[j];
    }

    const auto split = [&](const std::vector<double>& z) {
        ParameterVector b1(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(p1));
        ParameterVector b2(z.begin() + static_cast<std::ptrdiff_t>(p1), z.end());
        return std::make_pair(std::move(b1), std::move(b2));
    };
    const auto distance_at = [&](const std::vector<double>& z) {
        auto [b1, b2] = split(z);
        return l1_distance(spec1, b1, spec2, b2);
    };
    const auto objective = [&](const std::vector<double>& z) {
        auto [b1, b2] = split(z);
        return ld1.sse(spec1, b1) / ld1.n + ld2.sse(spec2, b2) / ld2.n;
    };

    std::vector<double> z0(p1 + p2);
    {
        const ParameterVector b1 = spec1.box().clamp(start.g1.beta_hat);
        const ParameterVector b2 = spec2.box().clamp(start.g2.beta_hat);
        if (b1.size() != p1 || b2.size() != p2)
            throw input_error("constrained_fit: start parameter lengths do not match models");
        std::copy(b1.begin(), b1.end(), z0.begin());
        std::copy(b2.begin(), b2.end(), z0.begin() + static_cast<std::ptrdiff_t>(p1));
    }

    const auto finish = [&](const std::vector<double>& z, double d1, int rounds,
                            bool reused) {
        auto [b1, b2] = split(z);
        ConstrainedFit cf;
        cf.pair.kappa_hat = kappa;
        cf.pair.g1.beta_hat = b1;
        cf.pair.g1.sse = ld1.sse(spec1, b1);
        cf.pair.g1.sigma2_hat = cf.pair.g1.sse / ld1.n;
        cf.pair.g2.beta_hat = b2;
        cf.pair.g2.sse = ld2.sse(spec2, b2);
        cf.pair.g2.sigma2_hat = cf.pair.g2.sse / ld2.n;
        cf.d1 = d1;
        cf.gap = std::abs(d1 - eps);
        cf.outer_rounds = rounds;
        cf.reused_start = reused;
        cf.pair.g1.converged = cf.pair.g2.converged = cf.gap <= ctol;
        return cf;
    };

    const double d_start = distance_at(z0);
    if (std::abs(d_start - eps) <= ctol) return finish(z0, d_start, 0, true);

    const bool can_shift = spec1.additive_first_param() && spec2.additive_first_param();
    // Shift the additive first parameters apart by t (difference curve moves by t).
    const auto shifted = [&](std::vector<double> z, double t) {
        z[0] += 0.5 * t;
        z[p1] -= 0.5 * t;
        return clamp_vec(std::move(z), lo, hi);
    };

    const auto run_al = [&](std::vector<double> z, int rounds,
                            int budget_per_round) -> std::pair<std::vector<double>, double> {
        double lambda = 0.0, mu = 1.0;
        double c_prev = std::numeric_limits<double>::infinity();
        std::vector<double> best_z = z;
        double best_score = std::numeric_limits<double>::infinity();
        for (int r = 1; r <= rounds; ++r) {
            const auto lagrangian = [&](const std::vector<double>& p) {
                const double c = distance_at(p) - eps;
                return objective(p) + lambda * c + 0.5 * mu * c * c;
            };
            if (r == 1 && can_shift) {
                // Start the first round from the incumbent and from symmetric
                // intercept-splits that already satisfy (or bracket) the constraint.
                const double t0 = eps - d_start;
                std::vector<std::vector<double>> starts{z, shifted(z, t0), shifted(z, -t0)};
                double best_f = std::numeric_limits<double>::infinity();
                std::vector<double> best_p;
                for (auto& s : starts) {
                    const double f = nelder_mead(lagrangian, s, lo, hi, budget_per_round / 3);
                    if (f < best_f) {
                        best_f = f;
                        best_p = s;
                    }
                }
                z = best_p;
            } else {
                nelder_mead(lagrangian, z, lo, hi, budget_per_round);
            }
            const double c = distance_at(z) - eps;
            // Prefer feasibility, then objective.
            const double score =
                std::abs(c) > ctol ? 1e6 + std::abs(c) : objective(z) + std::abs(c);
            if (score < best_score) {
                best_score = score;
                best_z = z;
            }
            if (std::abs(c) <= 0.25 * ctol && r >= 3) break;
            lambda += mu * c;
            if (std::abs(c) > 0.25 * std::abs(c_prev)) mu = std::min(mu * 10.0, 1e10);
            c_prev = c;
        }
        return {best_z, distance_at(best_z)};
    };

    // Secant on t along the intercept-split direction; polishes |d1 - eps|
    // far below ctol at negligible SSE cost.
    const auto restore = [&](std::vector<double> z) -> std::vector<double> {
        if (!can_shift) return z;
        const double len = spec1.domain().length();
        double t0 = 0.0, g0 = distance_at(z) - eps;
        if (g0 == 0.0) return z;
        double t1 = std::max(std::abs(g0) / len, 1e-9);
        if (g0 > 0.0) t1 = -t1;
        double g1 = distance_at(shifted(z, t1)) - eps;
        std::vector<double> best = z;
        double best_gap = std::abs(g0);
        for (int it = 0; it < 60 && std::abs(g1 - g0) > 1e-15; ++it) {
            const double t2 = t1 - g1 * (t1 - t0) / (g1 - g0);
            if (!std::isfinite(t2)) break;
            auto cand = shifted(z, t2);
            const double g2 = distance_at(cand) - eps;
            if (std::abs(g2) < best_gap) {
                best_gap = std::abs(g2);
                best = cand;
            }
            t0 = t1;
            g0 = g1;
            t1 = t2;
            g1 = g2;
            if (best_gap <= 1e-11 * std::max(1.0, eps)) break;
        }
        return best;
    };

    const int dim = static_cast<int>(p1 + p2);
    auto [z_best, d_best] = run_al(z0, 8, 420 * dim);
    z_best = restore(z_best);
    d_best = distance_at(z_best);

    int attempts = 0;
    auto jitter_eng = substream(opt.multistart_seed, 7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    while (std::abs(d_best - eps) > ctol && attempts < 3) {
        ++attempts;
        std::vector<double> zj = z_best;
        for (std::size_t j = 0; j < zj.size(); ++j)
            zj[j] += 0.05 * (1.0 + std::abs(zj[j])) * uni(jitter_eng);
        auto [z2, d2] = run_al(clamp_vec(std::move(zj), lo, hi), 8, 420 * dim);
        z2 = restore(z2);
        d2 = distance_at(z2);
        const bool z2_feasible = std::abs(d2 - eps) <= ctol;
        const bool best_feasible = std::abs(d_best - eps) <= ctol;
        if ((z2_feasible && !best_feasible) ||
            (z2_feasible == best_feasible && std::abs(d2 - eps) < std::abs(d_best - eps))) {
            z_best = std::move(z2);
            d_best = d2;
        }
    }
    if (std::abs(d_best - eps) > ctol)
        throw procedure_error("constrained fit failed: |d1 - eps| = " +
                              std::to_string(std::abs(d_best - eps)) + " exceeds tolerance " +
                              std::to_string(ctol) + " after restarts");
    return finish(z_best, d_best, 8, false);
}

}  // namespace curve_equiv
