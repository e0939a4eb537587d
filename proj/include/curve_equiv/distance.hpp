// The L1 distance between two fitted curves, the difference curve theta,
// sign-change roots, and the thresholded near-coincidence set.
#pragma once

#include <cstddef>
#include <vector>

#include "curve_equiv/model.hpp"

namespace curve_equiv {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
};

// Ordered disjoint closed subintervals of the domain.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> parts);  // sorts, merges, drops empty
    static IntervalSet whole(const Domain& d) { return IntervalSet({{d.lo, d.hi}}); }

    bool empty() const { return parts_.empty(); }
    std::size_t size() const { return parts_.size(); }
    const Interval& operator[](std::size_t i) const { return parts_[i]; }
    const std::vector<Interval>& parts() const { return parts_; }
    double total_length() const;
    bool contains(double x) const;
    IntervalSet complement(const Domain& d) const;

private:
    std::vector<Interval> parts_;
};

// theta(x) = m1(x, beta1) - m2(x, beta2); both models must share one domain.
class DiffCurve {
public:
    DiffCurve(ModelSpec m1, ParameterVector beta1, ModelSpec m2, ParameterVector beta2);

    double operator()(double x) const;
    const Domain& domain() const { return m1_.domain(); }
    const ModelSpec& model1() const { return m1_; }
    const ModelSpec& model2() const { return m2_; }
    const ParameterVector& beta1() const { return b1_; }
    const ParameterVector& beta2() const { return b2_; }

private:
    ModelSpec m1_, m2_;
    ParameterVector b1_, b2_;
};

struct RootScan {
    std::vector<double> roots;      // sign changes, ascending, refined to 1e-10
    bool identically_zero = false;  // |theta| below noise floor on the whole grid
    double scale = 1.0;             // max |theta| on the scan grid, floored at 1
};

// Sign changes of theta on a 512-interval grid, refined by bisection.
// Tangential zeros without a sign change may be missed.
RootScan roots(const DiffCurve& c, int grid_intervals = 512);

// Integral of |theta| over the domain, adaptive Simpson on each
// sign-constant piece; absolute error <= qtol = 1e-9 * |domain| * scale.
double l1_distance(const DiffCurve& c);
double l1_distance(const ModelSpec& m1, const ParameterVector& beta1, const ModelSpec& m2,
                   const ParameterVector& beta2);

// {x : |theta(x)| < threshold}; boundaries refined by bisection to 1e-8.
IntervalSet sublevel_set(const DiffCurve& c, double threshold);

// sublevel_set at the threshold const_c * sqrt(log(n) / n).
IntervalSet estimate_null_set(const DiffCurve& c, std::size_t n, double const_c = 1.0);

}  // namespace curve_equiv
