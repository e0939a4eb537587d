#include "curve_equiv/distance.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "curve_equiv/quadrature.hpp"

namespace curve_equiv {

namespace {

// Below this absolute level (response units) a difference curve is treated as
// identically zero; eval rounding for O(100) responses sits near 1e-14.
constexpr double kZeroFloor = 1e-12;

struct View {
    const ModelSpec* m1;
    const ParameterVector* b1;
    const ModelSpec* m2;
    const ParameterVector* b2;
    double operator()(double x) const { return m1->eval(x, *b1) - m2->eval(x, *b2); }
    Domain domain() const { return m1->domain(); }
};

struct Scan {
    std::vector<double> xs, vs;
    double scale = 1.0;             // max |theta| floored at 1
    bool identically_zero = false;
};

Scan scan_curve(const View& th, int intervals) {
    const Domain dom = th.domain();
    Scan s;
    const std::size_t m = static_cast<std::size_t>(std::max(intervals, 8));
    s.xs.resize(m + 1);
    s.vs.resize(m + 1);
    double maxabs = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
        s.xs[i] = dom.lo + dom.length() * static_cast<double>(i) / static_cast<double>(m);
        s.vs[i] = th(s.xs[i]);
        maxabs = std::max(maxabs, std::abs(s.vs[i]));
    }
    s.identically_zero = maxabs <= kZeroFloor;
    s.scale = std::max(maxabs, 1.0);
    return s;
}

std::vector<double> refine_roots(const View& th, const Scan& s) {
    const double len = th.domain().length();
    std::vector<double> rs;
    for (std::size_t i = 0; i < s.vs.size(); ++i)
        if (s.vs[i] == 0.0) rs.push_back(s.xs[i]);
    for (std::size_t i = 0; i + 1 < s.vs.size(); ++i)
        if ((s.vs[i] > 0.0 && s.vs[i + 1] < 0.0) || (s.vs[i] < 0.0 && s.vs[i + 1] > 0.0))
            rs.push_back(bisect_root([&th](double x) { return th(x); }, s.xs[i], s.xs[i + 1],
                                     1e-10));
    std::sort(rs.begin(), rs.end());
    const double tol = 1e-9 * std::max(1.0, len);
    std::vector<double> out;
    for (double r : rs)
        if (out.empty() || r - out.back() > tol) out.push_back(r);
    return out;
}

double l1_impl(const View& th) {
    const Domain dom = th.domain();
    const Scan s = scan_curve(th, 512);
    if (s.identically_zero) return 0.0;
    std::vector<double> cuts{dom.lo};
    for (double r : refine_roots(th, s))
        if (r > dom.lo && r < dom.hi) cuts.push_back(r);
    cuts.push_back(dom.hi);

    const double len = dom.length();
    const double qtol = 1e-9 * len * s.scale;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b - a <= 1e-14 * (1.0 + len)) continue;
        total += std::abs(adaptive_simpson([&th](double x) { return th(x); }, a, b,
                                           qtol * (b - a) / len));
    }
    return total;
}

}  // namespace

IntervalSet::IntervalSet(std::vector<Interval> parts) {
    std::sort(parts.begin(), parts.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const Interval& iv : parts) {
        if (!(iv.hi > iv.lo)) continue;
        if (!parts_.empty() && iv.lo <= parts_.back().hi)
            parts_.back().hi = std::max(parts_.back().hi, iv.hi);
        else
            parts_.push_back(iv);
    }
}

double IntervalSet::total_length() const {
    double t = 0.0;
    for (const Interval& iv : parts_) t += iv.length();
    return t;
}

bool IntervalSet::contains(double x) const {
    for (const Interval& iv : parts_)
        if (x >= iv.lo && x <= iv.hi) return true;
    return false;
}

IntervalSet IntervalSet::complement(const Domain& d) const {
    std::vector<Interval> out;
    double cursor = d.lo;
    for (const Interval& iv : parts_) {
        if (iv.lo > cursor) out.push_back({cursor, std::min(iv.lo, d.hi)});
        cursor = std::max(cursor, iv.hi);
        if (cursor >= d.hi) break;
    }
    if (cursor < d.hi) out.push_back({cursor, d.hi});
    return IntervalSet(std::move(out));
}

DiffCurve::DiffCurve(ModelSpec m1, ParameterVector beta1, ModelSpec m2, ParameterVector beta2)
    : m1_(std::move(m1)), b1_(std::move(beta1)), m2_(std::move(m2)), b2_(std::move(beta2)) {
    if (m1_.domain().lo != m2_.domain().lo || m1_.domain().hi != m2_.domain().hi)
        throw input_error("difference curve requires identical covariate domains");
    if (b1_.size() != m1_.dim() || b2_.size() != m2_.dim())
        throw input_error("difference curve: parameter lengths do not match the models");
}

double DiffCurve::operator()(double x) const {
    return m1_.eval(x, b1_) - m2_.eval(x, b2_);
}

RootScan roots(const DiffCurve& c, int grid_intervals) {
    const View th{&c.model1(), &c.beta1(), &c.model2(), &c.beta2()};
    const Scan s = scan_curve(th, grid_intervals);
    RootScan out;
    out.identically_zero = s.identically_zero;
    out.scale = s.scale;
    if (!s.identically_zero) out.roots = refine_roots(th, s);
    return out;
}

double l1_distance(const ModelSpec& m1, const ParameterVector& beta1, const ModelSpec& m2,
                   const ParameterVector& beta2) {
    if (m1.domain().lo != m2.domain().lo || m1.domain().hi != m2.domain().hi)
        throw input_error("l1_distance requires identical covariate domains");
    if (beta1.size() != m1.dim() || beta2.size() != m2.dim())
        throw input_error("l1_distance: parameter lengths do not match the models");
    return l1_impl(View{&m1, &beta1, &m2, &beta2});
}

double l1_distance(const DiffCurve& c) {
    return l1_impl(View{&c.model1(), &c.beta1(), &c.model2(), &c.beta2()});
}

IntervalSet sublevel_set(const DiffCurve& c, double threshold) {
    const Domain dom = c.domain();
    if (!(threshold > 0.0)) return IntervalSet{};
    const View th{&c.model1(), &c.beta1(), &c.model2(), &c.beta2()};
    const Scan s = scan_curve(th, 512);
    if (s.identically_zero) return IntervalSet::whole(dom);

    const auto h = [&th, threshold](double x) { return std::abs(th(x)) - threshold; };
    std::vector<double> cuts{dom.lo};
    for (std::size_t i = 0; i + 1 < s.xs.size(); ++i) {
        const double ha = h(s.xs[i]), hb = h(s.xs[i + 1]);
        if ((ha > 0.0 && hb < 0.0) || (ha < 0.0 && hb > 0.0))
            cuts.push_back(bisect_root(h, s.xs[i], s.xs[i + 1], 1e-8));
        else if (hb == 0.0 && i + 2 < s.xs.size())
            cuts.push_back(s.xs[i + 1]);
    }
    cuts.push_back(dom.hi);
    std::sort(cuts.begin(), cuts.end());

    std::vector<Interval> below;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= 1e-12 * (1.0 + dom.length())) continue;
        if (h(0.5 * (cuts[i] + cuts[i + 1])) < 0.0) below.push_back({cuts[i], cuts[i + 1]});
    }
    return IntervalSet(std::move(below));
}

IntervalSet estimate_null_set(const DiffCurve& c, std::size_t n, double const_c) {
    if (n < 2) throw input_error("estimate_null_set: n must be at least 2");
    if (!(const_c > 0.0)) throw input_error("estimate_null_set: const_c must be positive");
    const double nn = static_cast<double>(n);
    return sublevel_set(c, const_c * std::sqrt(std::log(nn) / nn));
}

}  // namespace curve_equiv
