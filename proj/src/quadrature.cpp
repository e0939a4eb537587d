#include "curve_equiv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace curve_equiv {

namespace {

double fval(const std::function<double(double)>& f, double x) {
    const double v = f(x);
    if (!std::isfinite(v))
        throw quadrature_error("quadrature: integrand not finite at x=" + std::to_string(x));
    return v;
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double S, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = fval(f, lm), frm = fval(f, rm);
    const double Sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double Sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = Sl + Sr - S;
    if (std::abs(delta) <= 15.0 * tol) return Sl + Sr + delta / 15.0;
    if (depth <= 0)
        throw quadrature_error("quadrature did not converge on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "]");
    return simpson_step(f, a, m, fa, flm, fm, Sl, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, Sr, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (!(a <= b)) throw input_error("adaptive_simpson: requires a <= b");
    if (a == b) return 0.0;
    tol = std::max(tol, 1e-307);
    const double m = 0.5 * (a + b);
    const double fa = fval(f, a), fm = fval(f, m), fb = fval(f, b);
    const double S = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, S, tol, max_depth);
}

double integrate_abs(const std::function<double(double)>& f, double a, double b, double tol,
                     int scan_points) {
    if (!(a <= b)) throw input_error("integrate_abs: requires a <= b");
    if (a == b) return 0.0;
    scan_points = std::max(scan_points, 3);
    std::vector<double> xs(static_cast<std::size_t>(scan_points));
    std::vector<double> vs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
        vs[i] = fval(f, xs[i]);
    }
    // Breakpoints at refined sign changes.
    std::vector<double> cuts{a};
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if ((vs[i] > 0.0 && vs[i + 1] < 0.0) || (vs[i] < 0.0 && vs[i + 1] > 0.0))
            cuts.push_back(bisect_root(f, xs[i], xs[i + 1], 1e-12 * (1.0 + b - a)));
        else if (vs[i + 1] == 0.0 && i + 2 < xs.size())
            cuts.push_back(xs[i + 1]);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    const double len = b - a;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= 1e-14 * (1.0 + len)) continue;
        total += std::abs(adaptive_simpson(f, cuts[i], cuts[i + 1],
                                           tol * (cuts[i + 1] - cuts[i]) / len));
    }
    return total;
}

double bisect_root(const std::function<double(double)>& g, double lo, double hi, double xtol,
                   int max_iter) {
    double flo = fval(g, lo);
    if (flo == 0.0) return lo;
    double fhi = fval(g, hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw input_error("bisect_root: no sign change on the bracket");
    for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = fval(g, mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace curve_equiv
