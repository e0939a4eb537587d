#include "curve_equiv/model.hpp"

#include <cmath>
#include <utility>

namespace curve_equiv {

namespace {

constexpr double kWide = 100.0;
// Lower bound on emax/exponential b3 keeps the pole x = -b3 (resp. the
// exp argument blow-up) away from any covariate interval near the origin.
constexpr double kRateLo = 0.05;

ParameterBox wide_box(std::size_t p) {
    return {std::vector<double>(p, -kWide), std::vector<double>(p, kWide)};
}

void check_domain(const Domain& dom) {
    if (!(std::isfinite(dom.lo) && std::isfinite(dom.hi) && dom.lo < dom.hi))
        throw input_error("model domain needs finite bounds with lo < hi");
}

}  // namespace

bool ParameterBox::contains(const ParameterVector& beta, double tol) const {
    if (beta.size() != dim()) return false;
    for (std::size_t j = 0; j < beta.size(); ++j)
        if (beta[j] < lo[j] - tol || beta[j] > hi[j] + tol) return false;
    return true;
}

ParameterVector ParameterBox::clamp(ParameterVector beta) const {
    for (std::size_t j = 0; j < beta.size() && j < dim(); ++j) {
        if (beta[j] < lo[j]) beta[j] = lo[j];
        if (beta[j] > hi[j]) beta[j] = hi[j];
    }
    return beta;
}

ParameterVector ParameterBox::midpoint() const {
    ParameterVector m(dim());
    for (std::size_t j = 0; j < dim(); ++j) m[j] = 0.5 * (lo[j] + hi[j]);
    return m;
}

ModelSpec ModelSpec::emax(Domain dom) {
    check_domain(dom);
    ModelSpec s;
    s.family_ = ModelFamily::emax;
    s.name_ = "emax";
    s.additive_first_ = true;
    s.dim_ = 3;
    s.domain_ = dom;
    s.box_ = wide_box(3);
    s.box_.lo[2] = kRateLo;
    return s;
}

ModelSpec ModelSpec::linear(Domain dom) {
    check_domain(dom);
    ModelSpec s;
    s.family_ = ModelFamily::linear;
    s.name_ = "linear";
    s.additive_first_ = true;
    s.dim_ = 2;
    s.domain_ = dom;
    s.box_ = wide_box(2);
    return s;
}

ModelSpec ModelSpec::exponential(Domain dom) {
    check_domain(dom);
    ModelSpec s;
    s.family_ = ModelFamily::exponential;
    s.name_ = "exponential";
    s.additive_first_ = true;
    s.dim_ = 3;
    s.domain_ = dom;
    s.box_ = wide_box(3);
    s.box_.lo[2] = kRateLo;
    return s;
}

ModelSpec ModelSpec::quadratic(Domain dom) {
    check_domain(dom);
    ModelSpec s;
    s.family_ = ModelFamily::quadratic;
    s.name_ = "quadratic";
    s.additive_first_ = true;
    s.dim_ = 3;
    s.domain_ = dom;
    s.box_ = wide_box(3);
    return s;
}

ModelSpec ModelSpec::by_name(const std::string& family, Domain dom) {
    if (family == "emax") return emax(dom);
    if (family == "linear") return linear(dom);
    if (family == "exponential") return exponential(dom);
    if (family == "quadratic") return quadratic(dom);
    throw input_error("unknown model family '" + family +
                      "' (expected emax, linear, exponential, or quadratic)");
}

ModelSpec ModelSpec::custom(std::string name, std::size_t dim, EvalFn eval, GradFn grad,
                            ParameterBox box, Domain dom, bool additive_first) {
    if (dim == 0) throw input_error("custom model: parameter dimension must be positive");
    if (box.lo.size() != dim || box.hi.size() != dim)
        throw input_error("custom model: box dimensions do not match parameter dimension");
    for (std::size_t j = 0; j < dim; ++j)
        if (!(box.lo[j] < box.hi[j]) || !std::isfinite(box.lo[j]) || !std::isfinite(box.hi[j]))
            throw input_error("custom model: box bounds must be finite with lo < hi");
    check_domain(dom);
    if (!eval || !grad) throw input_error("custom model: eval and grad callbacks required");
    ModelSpec s;
    s.family_ = ModelFamily::custom;
    s.name_ = std::move(name);
    s.dim_ = dim;
    s.domain_ = dom;
    s.box_ = std::move(box);
    s.eval_ = std::move(eval);
    s.grad_ = std::move(grad);
    s.additive_first_ = additive_first;
    return s;
}

ModelSpec ModelSpec::with_box(ParameterBox box) const {
    if (box.lo.size() != dim_ || box.hi.size() != dim_)
        throw input_error("replacement box dimensions do not match model '" + name_ +
                          "' (expected " + std::to_string(dim_) + ")");
    for (std::size_t j = 0; j < dim_; ++j)
        if (!(box.lo[j] < box.hi[j]) || !std::isfinite(box.lo[j]) || !std::isfinite(box.hi[j]))
            throw input_error("replacement box bounds must be finite with lo < hi");
    ModelSpec out = *this;
    out.box_ = std::move(box);
    return out;
}

void ModelSpec::check_x(double x) const {
    const double tol = 1e-9 * (1.0 + std::abs(domain_.lo) + std::abs(domain_.hi));
    if (!(x >= domain_.lo - tol && x <= domain_.hi + tol))
        throw input_error("covariate x=" + std::to_string(x) + " outside the model domain [" +
                          std::to_string(domain_.lo) + ", " + std::to_string(domain_.hi) + "]");
}

void ModelSpec::check_beta(const ParameterVector& beta) const {
    if (beta.size() != dim_)
        throw input_error("parameter vector has length " + std::to_string(beta.size()) +
                          ", model '" + name_ + "' expects " + std::to_string(dim_));
}

double ModelSpec::eval(double x, const ParameterVector& b) const {
    check_x(x);
    check_beta(b);
    switch (family_) {
        case ModelFamily::emax: {
            const double den = b[2] + x;
            if (std::abs(den) <= 1e-12 * (1.0 + std::abs(x)))
                throw input_error("emax model singular at x=" + std::to_string(x) +
                                  " (beta3 + x = 0)");
            return b[0] + b[1] * x / den;
        }
        case ModelFamily::linear:
            return b[0] + b[1] * x;
        case ModelFamily::exponential: {
            if (std::abs(b[2]) <= 1e-12)
                throw input_error("exponential model singular (beta3 = 0)");
            return b[0] + b[1] * std::exp(x / b[2]);
        }
        case ModelFamily::quadratic:
            return b[0] + (b[1] + b[2] * x) * x;
        case ModelFamily::custom:
            return eval_(x, b);
    }
    throw input_error("unreachable model family");
}

void ModelSpec::grad(double x, const ParameterVector& b, double* out) const {
    check_x(x);
    check_beta(b);
    switch (family_) {
        case ModelFamily::emax: {
            const double den = b[2] + x;
            if (std::abs(den) <= 1e-12 * (1.0 + std::abs(x)))
                throw input_error("emax model singular at x=" + std::to_string(x) +
                                  " (beta3 + x = 0)");
            const double r = x / den;
            out[0] = 1.0;
            out[1] = r;
            out[2] = -b[1] * r / den;
            return;
        }
        case ModelFamily::linear:
            out[0] = 1.0;
            out[1] = x;
            return;
        case ModelFamily::exponential: {
            if (std::abs(b[2]) <= 1e-12)
                throw input_error("exponential model singular (beta3 = 0)");
            const double e = std::exp(x / b[2]);
            out[0] = 1.0;
            out[1] = e;
            out[2] = -b[1] * x * e / (b[2] * b[2]);
            return;
        }
        case ModelFamily::quadratic:
            out[0] = 1.0;
            out[1] = x;
            out[2] = x * x;
            return;
        case ModelFamily::custom:
            grad_(x, b, out);
            return;
    }
}

ParameterVector ModelSpec::grad(double x, const ParameterVector& beta) const {
    ParameterVector g(dim_);
    grad(x, beta, g.data());
    return g;
}

}  // namespace curve_equiv
