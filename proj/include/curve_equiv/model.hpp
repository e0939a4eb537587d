// Parametric regression families m(x, beta) with analytic parameter
// gradients, compact parameter boxes, and a closed covariate interval.
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "curve_equiv/errors.hpp"

namespace curve_equiv {

using ParameterVector = std::vector<double>;

// Closed covariate interval [lo, hi].
struct Domain {
    double lo = 0.0;
    double hi = 4.0;
    double length() const { return hi - lo; }
};

// Per-coordinate closed parameter bounds.
struct ParameterBox {
    std::vector<double> lo, hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(const ParameterVector& beta, double tol = 0.0) const;
    ParameterVector clamp(ParameterVector beta) const;
    ParameterVector midpoint() const;
};

enum class ModelFamily { emax, linear, exponential, quadratic, custom };

class ModelSpec {
public:
    using EvalFn = std::function<double(double, const ParameterVector&)>;
    using GradFn = std::function<void(double, const ParameterVector&, double*)>;

    // Built-in families; default covariate interval [0, 4].
    static ModelSpec emax(Domain dom = {});         // b1 + b2*x/(b3+x)
    static ModelSpec linear(Domain dom = {});       // b1 + b2*x
    static ModelSpec exponential(Domain dom = {});  // b1 + b2*exp(x/b3)
    static ModelSpec quadratic(Domain dom = {});    // b1 + b2*x + b3*x^2
    static ModelSpec by_name(const std::string& family, Domain dom = {});

    // User-defined family from eval/grad callbacks.  Set additive_first when
    // the first parameter enters as "b1 + (rest)"; the constrained fitter can
    // then use intercept shifts for its restoration step.
    static ModelSpec custom(std::string name, std::size_t dim, EvalFn eval, GradFn grad,
                            ParameterBox box, Domain dom, bool additive_first = false);

    // Same family and domain with a replacement parameter box.
    ModelSpec with_box(ParameterBox box) const;

    double eval(double x, const ParameterVector& beta) const;
    // Writes dim() components to out.
    void grad(double x, const ParameterVector& beta, double* out) const;
    ParameterVector grad(double x, const ParameterVector& beta) const;

    std::size_t dim() const { return dim_; }
    const Domain& domain() const { return domain_; }
    const ParameterBox& box() const { return box_; }
    ModelFamily family() const { return family_; }
    const std::string& name() const { return name_; }
    bool additive_first_param() const { return additive_first_; }

    void check_x(double x) const;  // input_error when x is outside the domain

private:
    ModelSpec() = default;
    void check_beta(const ParameterVector& beta) const;

    ModelFamily family_ = ModelFamily::custom;
    std::string name_;
    std::size_t dim_ = 0;
    Domain domain_{};
    ParameterBox box_;
    EvalFn eval_;  // custom family only
    GradFn grad_;  // custom family only
    bool additive_first_ = false;
};

}  // namespace curve_equiv
