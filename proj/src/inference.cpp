#include "curve_equiv/inference.hpp"

#include <algorithm>
#include <cmath>

#include "curve_equiv/rng.hpp"

namespace curve_equiv {

namespace {

void require_converged(const FittedPair& pair) {
    if (!pair.g1.converged || !pair.g2.converged)
        throw procedure_error("fit did not converge; asymptotic inference unavailable");
}

CiReport base_ci_report(const FittedPair& pair, const TwoGroupData& data, double alpha,
                        std::size_t M, std::uint64_t seed) {
    CiReport r;
    r.method = method_tag::asymptotic;
    r.alpha = alpha;
    r.n1 = data.group1.n_total();
    r.n2 = data.group2.n_total();
    r.n = r.n1 + r.n2;
    r.reps = M;
    r.seed = seed;
    r.kappa = pair.kappa_hat;
    return r;
}

}  // namespace

InfoMatrix info_matrix(const ModelSpec& spec, const GroupSample& g,
                       const ParameterVector& beta, double sigma2) {
    if (!(sigma2 > 0.0))
        throw procedure_error("information matrix undefined: residual variance is zero");
    g.validate();
    const std::size_t p = spec.dim();
    const auto w = g.weights();
    Eigen::VectorXd gv(p);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t i = 0; i < g.levels.size(); ++i) {
        spec.grad(g.levels[i], beta, gv.data());
        sigma.noalias() += (w[i] / sigma2) * gv * gv.transpose();
    }
    // Symmetrize away accumulation round-off.
    sigma = 0.5 * (sigma + sigma.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    if (es.info() != Eigen::Success)
        throw procedure_error("information matrix eigendecomposition failed");
    InfoMatrix out;
    out.sigma = sigma;
    out.min_eig = es.eigenvalues().minCoeff();
    out.max_eig = es.eigenvalues().maxCoeff();
    if (!(out.max_eig > 0.0) || out.min_eig < 1e-10 * out.max_eig)
        throw procedure_error(
            "singular information matrix (design does not identify the parameters; "
            "fewer distinct levels than parameters?)");
    out.inv_sqrt = es.eigenvectors() *
                   es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                   es.eigenvectors().transpose();
    return out;
}

InfoMatrix info_matrix(const ModelSpec& spec, const GroupSample& g, const FittedGroup& fit) {
    return info_matrix(spec, g, fit.beta_hat, fit.sigma2_hat);
}

LimitSimSpec make_limit_sim_spec(const ModelSpec& spec1, const ModelSpec& spec2,
                                 const FittedPair& pair, const TwoGroupData& data,
                                 const IntervalSet& nhat, std::size_t M, std::uint64_t seed,
                                 int grid_points) {
    if (M < 1000) throw input_error("limit simulation needs M >= 1000 draws");
    const double kappa = pair.kappa_hat;
    if (!(kappa > 1.0))
        throw input_error("degenerate design: kappa = n/n1 must exceed 1 (second group empty?)");
    const Domain dom = spec1.domain();
    const DiffCurve theta(spec1, pair.g1.beta_hat, spec2, pair.g2.beta_hat);

    const InfoMatrix i1 = info_matrix(spec1, data.group1, pair.g1);
    const InfoMatrix i2 = info_matrix(spec2, data.group2, pair.g2);
    const double s1 = std::sqrt(kappa);
    const double s2 = std::sqrt(kappa / (kappa - 1.0));

    // Ordered pieces: null parts and complement parts, each with a region code.
    struct Piece {
        Interval iv;
        int region;  // 0 null, +1/-1 sign of theta on the piece
    };
    std::vector<Piece> pieces;
    for (const Interval& iv : nhat.parts()) pieces.push_back({iv, 0});
    const IntervalSet comp = nhat.complement(dom);  // named: parts() must outlive the loop
    for (const Interval& iv : comp.parts()) {
        const double mid = 0.5 * (iv.lo + iv.hi);
        pieces.push_back({iv, theta(mid) >= 0.0 ? +1 : -1});
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& a, const Piece& b) { return a.iv.lo < b.iv.lo; });

    LimitSimSpec s;
    s.null_set = nhat;
    s.kappa = kappa;
    s.M = M;
    s.seed = seed;
    const std::size_t p1 = spec1.dim(), p2 = spec2.dim();

    std::vector<double> xs, ws;
    std::vector<int> regions;
    for (const Piece& pc : pieces) {
        const double len = pc.iv.length();
        if (len <= 1e-12 * (1.0 + dom.length())) continue;
        if (pc.region != 0) s.sign_pattern.push_back(pc.region);
        // Odd node count proportional to length, at least 3.
        long m = std::lround(static_cast<double>(grid_points) * len / dom.length());
        if (m < 3) m = 3;
        if (m % 2 == 0) ++m;
        const double h = len / static_cast<double>(m - 1);
        for (long j = 0; j < m; ++j) {
            const double x = pc.iv.lo + h * static_cast<double>(j);
            double w = (j == 0 || j == m - 1) ? h / 3.0
                       : (j % 2 == 1)         ? 4.0 * h / 3.0
                                              : 2.0 * h / 3.0;
            xs.push_back(x);
            ws.push_back(w);
            regions.push_back(pc.region);
        }
    }

    const std::size_t nn = xs.size();
    s.node_x = std::move(xs);
    s.node_w = std::move(ws);
    s.node_region = std::move(regions);
    s.a1.resize(static_cast<Eigen::Index>(p1), static_cast<Eigen::Index>(nn));
    s.a2.resize(static_cast<Eigen::Index>(p2), static_cast<Eigen::Index>(nn));
    Eigen::VectorXd g1(p1), g2(p2);
    for (std::size_t j = 0; j < nn; ++j) {
        spec1.grad(s.node_x[j], pair.g1.beta_hat, g1.data());
        spec2.grad(s.node_x[j], pair.g2.beta_hat, g2.data());
        s.a1.col(static_cast<Eigen::Index>(j)).noalias() = s1 * (i1.inv_sqrt * g1);
        s.a2.col(static_cast<Eigen::Index>(j)).noalias() = s2 * (i2.inv_sqrt * g2);
    }
    return s;
}

std::vector<double> simulate_T_hat(const LimitSimSpec& s) {
    const std::size_t nn = s.node_x.size();
    const Eigen::Index p1 = s.a1.rows(), p2 = s.a2.rows();
    std::vector<double> draws(s.M);
    Eigen::VectorXd z1(p1), z2(p2), vals(static_cast<Eigen::Index>(nn));
    for (std::size_t i = 0; i < s.M; ++i) {
        auto eng = substream(s.seed, i);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index j = 0; j < p1; ++j) z1[j] = normal(eng);
        for (Eigen::Index j = 0; j < p2; ++j) z2[j] = normal(eng);
        vals.noalias() = s.a1.transpose() * z1;
        vals.noalias() -= s.a2.transpose() * z2;
        double acc = 0.0;
        for (std::size_t j = 0; j < nn; ++j) {
            const double v = vals[static_cast<Eigen::Index>(j)];
            acc += s.node_w[j] * (s.node_region[j] == 0
                                      ? std::abs(v)
                                      : static_cast<double>(s.node_region[j]) * v);
        }
        draws[i] = acc;
    }
    return draws;
}

double quantile(std::vector<double> draws, double alpha) {
    if (draws.empty()) throw input_error("quantile of an empty sample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("quantile level must be in (0,1)");
    const double m = static_cast<double>(draws.size());
    // ceil with a guard against FP products like 0.95*300 = 285.0000000000003.
    auto k = static_cast<std::size_t>(std::ceil(alpha * m - 1e-9));
    k = std::clamp<std::size_t>(k, 1, draws.size());
    std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     draws.end());
    return draws[k - 1];
}

CiReport asymptotic_ci(const ModelSpec& spec1, const ModelSpec& spec2, const FittedPair& pair,
                       const TwoGroupData& data, double alpha, std::size_t M,
                       std::uint64_t seed, double const_c) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must be in (0,1)");
    require_converged(pair);
    CiReport r = base_ci_report(pair, data, alpha, M, seed);

    const DiffCurve theta(spec1, pair.g1.beta_hat, spec2, pair.g2.beta_hat);
    r.d1_hat = l1_distance(theta);
    const IntervalSet nhat = estimate_null_set(theta, r.n, const_c);
    r.null_set = nhat.parts();
    const LimitSimSpec sim = make_limit_sim_spec(spec1, spec2, pair, data, nhat, M, seed);
    const double q = quantile(simulate_T_hat(sim), alpha);
    r.quantiles_used = {q};
    r.lower = 0.0;
    r.upper = std::max(0.0, r.d1_hat - q / std::sqrt(static_cast<double>(r.n)));
    return r;
}

CiReport two_sided_ci(const ModelSpec& spec1, const ModelSpec& spec2, const FittedPair& pair,
                      const TwoGroupData& data, double alpha, std::size_t M,
                      std::uint64_t seed, double const_c) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must be in (0,1)");
    require_converged(pair);
    CiReport r = base_ci_report(pair, data, alpha, M, seed);
    r.two_sided = true;

    const DiffCurve theta(spec1, pair.g1.beta_hat, spec2, pair.g2.beta_hat);
    r.d1_hat = l1_distance(theta);
    const IntervalSet nhat = estimate_null_set(theta, r.n, const_c);
    r.null_set = nhat.parts();
    const LimitSimSpec sim = make_limit_sim_spec(spec1, spec2, pair, data, nhat, M, seed);
    const std::vector<double> draws = simulate_T_hat(sim);
    const double q_lo = quantile(draws, alpha / 2.0);
    const double q_hi = quantile(draws, 1.0 - alpha / 2.0);
    r.quantiles_used = {q_lo, q_hi};
    const double root_n = std::sqrt(static_cast<double>(r.n));
    r.lower = std::max(0.0, r.d1_hat - q_hi / root_n);
    r.upper = std::max(r.lower, r.d1_hat - q_lo / root_n);
    return r;
}

TestReport asymptotic_test(const ModelSpec& spec1, const ModelSpec& spec2,
                           const FittedPair& pair, const TwoGroupData& data, double eps,
                           double alpha, std::size_t M, std::uint64_t seed, double const_c) {
    if (!(eps > 0.0)) throw input_error("asymptotic_test: eps must be positive");
    const CiReport ci = asymptotic_ci(spec1, spec2, pair, data, alpha, M, seed, const_c);
    TestReport t;
    t.method = method_tag::asymptotic;
    t.d1_hat = ci.d1_hat;
    t.eps = eps;
    t.alpha = alpha;
    t.quantiles_used = ci.quantiles_used;
    t.n = ci.n;
    t.n1 = ci.n1;
    t.n2 = ci.n2;
    t.reps = M;
    t.seed = seed;
    t.kappa = ci.kappa;
    t.null_set = ci.null_set;
    t.critical = eps + ci.quantiles_used[0] / std::sqrt(static_cast<double>(ci.n));
    // Duality with the one-sided CI is exact, including the tie upper == eps.
    t.reject = ci.upper <= eps;
    return t;
}

}  // namespace curve_equiv
