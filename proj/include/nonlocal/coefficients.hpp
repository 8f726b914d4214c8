#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "nonlocal/errors.hpp"

namespace nonlocal {

/**
 * Diffusion/reaction pair (a(x,r), λ(x,r)) of the parameterized problem.
 *
 * The bounds alpha <= a <= beta and 0 <= λ <= beta are declared for
 * parameters r in [r_min, r_max]; assembly checks them there and skips the
 * check outside (divergent iterations leave the range on purpose).
 */
struct CoefficientModel {
    std::function<double(double x, double r)> a;
    std::function<double(double x, double r)> lambda;
    double alpha = 1.0;
    double beta = 1.0;
    double r_min = -std::numeric_limits<double>::infinity();
    double r_max = std::numeric_limits<double>::infinity();
    bool x_independent = false;
    bool lambda_zero = false;

    bool in_validity(double r) const noexcept { return r >= r_min && r <= r_max; }

    /// a(r) for x-independent coefficients.
    double a_of(double r) const { return a(0.5, r); }
};

/// a ≡ c, λ ≡ 0 for every parameter value.
inline CoefficientModel constant_coefficient(double c)
{
    detail::require(c > 0.0, "constant coefficient must be positive");
    CoefficientModel m;
    m.a = [c](double, double) { return c; };
    m.lambda = [](double, double) { return 0.0; };
    m.alpha = c;
    m.beta = c;
    m.x_independent = true;
    m.lambda_zero = true;
    return m;
}

/// Quadratic (c2 x² + c1 x + c0) / den with integer coefficients.
struct RationalQuadratic {
    long long c2 = 0;
    long long c1 = 0;
    long long c0 = 0;
    long long den = 1;

    double operator()(double x) const noexcept
    {
        const double num = (static_cast<double>(c2) * x + static_cast<double>(c1)) * x
                           + static_cast<double>(c0);
        return num / static_cast<double>(den);
    }

    double derivative(double x) const noexcept
    {
        return (2.0 * static_cast<double>(c2) * x + static_cast<double>(c1))
               / static_cast<double>(den);
    }

    /// Abscissa of the extremum, if the polynomial is not linear.
    std::optional<double> vertex() const noexcept
    {
        if (c2 == 0)
            return std::nullopt;
        return -static_cast<double>(c1) / (2.0 * static_cast<double>(c2));
    }
};

/**
 * Scalar map built from two quadratics meeting at mu0.
 *
 * mu1, mu0 and mu2 are fixed points. Each piece is extended beyond
 * [mu1, mu2] by its own formula. nu1/nu2 are the interpolation abscissae
 * used to construct the pieces and serve as default start points.
 */
struct PiecewiseQuadraticG {
    double mu1 = 0.25;
    double mu0 = 1.0;
    double mu2 = 2.0;
    double nu1 = 0.45;
    double nu2 = 1.8;
    RationalQuadratic left;
    RationalQuadratic right;

    double operator()(double x) const noexcept { return x <= mu0 ? left(x) : right(x); }

    double derivative(double x) const noexcept
    {
        return x <= mu0 ? left.derivative(x) : right.derivative(x);
    }

    /// max |G'| on [lo, hi]; exact since G' is piecewise linear.
    double lipschitz_bound(double lo, double hi) const noexcept
    {
        double l = std::max(std::abs(derivative(lo)), std::abs(derivative(hi)));
        if (lo <= mu0 && mu0 <= hi) {
            l = std::max(l, std::abs(left.derivative(mu0)));
            l = std::max(l, std::abs(right.derivative(mu0)));
        }
        return l;
    }

    /// (min, max) of G on [lo, hi].
    std::array<double, 2> range_on(double lo, double hi) const
    {
        double gmin = std::numeric_limits<double>::infinity();
        double gmax = -gmin;
        auto visit = [&](double x) {
            const double g = (*this)(x);
            gmin = std::min(gmin, g);
            gmax = std::max(gmax, g);
        };
        visit(lo);
        visit(hi);
        if (lo <= mu0 && mu0 <= hi)
            visit(mu0);
        if (auto v = left.vertex(); v && *v >= lo && *v <= std::min(hi, mu0))
            visit(*v);
        if (auto v = right.vertex(); v && *v > std::max(lo, mu0) && *v <= hi)
            visit(*v);
        return {gmin, gmax};
    }
};

enum class Scenario { Convergent, BoundedDivergent, UnboundedDivergent };

inline std::string_view to_string(Scenario s) noexcept
{
    switch (s) {
    case Scenario::Convergent: return "convergent";
    case Scenario::BoundedDivergent: return "bounded_divergent";
    case Scenario::UnboundedDivergent: return "unbounded_divergent";
    }
    return "?";
}

inline Scenario parse_scenario(std::string_view name)
{
    if (name == "convergent")
        return Scenario::Convergent;
    if (name == "bounded_divergent")
        return Scenario::BoundedDivergent;
    if (name == "unbounded_divergent")
        return Scenario::UnboundedDivergent;
    throw UsageError("unknown scenario '" + std::string(name) + "'");
}

/// The three experiment maps, knots (1/4, 1, 2).
inline PiecewiseQuadraticG scenario_G(Scenario s)
{
    PiecewiseQuadraticG g;
    switch (s) {
    case Scenario::Convergent:
        g.nu1 = 0.45;
        g.nu2 = 1.8;
        g.left = {-20, 47, -5, 22};
        g.right = {5, -7, 10, 8};
        break;
    case Scenario::BoundedDivergent:
        g.nu1 = 0.75;
        g.nu2 = 1.15;
        g.left = {-16, 25, -4, 5};
        g.right = {160, -429, 320, 51};
        break;
    case Scenario::UnboundedDivergent:
        g.nu1 = 0.75;
        g.nu2 = 1.4;
        g.left = {-12, 16, -3, 1};
        // 65/6 - 61/4 x + 65/12 x² over the common denominator 12
        g.right = {65, -183, 130, 12};
        break;
    }
    return g;
}

/**
 * x-independent coefficient a(r) = (ell_psi / G(r))^{1/p}, λ ≡ 0.
 *
 * With this choice the simplified fixed-point map c/a(r)^p reproduces
 * G scaled by c/ell_psi. Bounds are taken from the extrema of G on the
 * validity range, which defaults to [mu1, mu2]. Where G <= 0 the
 * coefficient evaluates to NaN.
 */
inline CoefficientModel coefficient_from_G(const PiecewiseQuadraticG& G, double ell_psi, double p,
                                           std::optional<std::array<double, 2>> validity = {})
{
    detail::require(ell_psi > 0.0, "ell(psi) must be positive");
    detail::require(p > 0.0, "homogeneity degree must be positive");
    const auto [lo, hi] = validity.value_or(std::array<double, 2>{G.mu1, G.mu2});
    detail::require(lo < hi, "empty validity range");
    const auto [gmin, gmax] = G.range_on(lo, hi);
    if (!(gmin > 0.0))
        throw BoundViolation("G is not positive on the validity range; coefficient undefined");

    CoefficientModel m;
    m.a = [G, ell_psi, p](double, double r) {
        const double g = G(r);
        if (!(g > 0.0))
            return std::numeric_limits<double>::quiet_NaN();
        return std::pow(ell_psi / g, 1.0 / p);
    };
    m.lambda = [](double, double) { return 0.0; };
    m.alpha = std::pow(ell_psi / gmax, 1.0 / p);
    m.beta = std::pow(ell_psi / gmin, 1.0 / p);
    m.r_min = lo;
    m.r_max = hi;
    m.x_independent = true;
    m.lambda_zero = true;
    return m;
}

/// a(r)(1 + eps cos(m x)) with λ unchanged.
inline CoefficientModel perturbed_coefficient(const CoefficientModel& base, double eps, int m)
{
    detail::require(eps >= 0.0 && eps < 1.0, "perturbation amplitude must lie in [0,1)");
    detail::require(m >= 1, "perturbation frequency must be a positive integer");
    CoefficientModel out = base;
    const double freq = static_cast<double>(m);
    out.a = [a = base.a, eps, freq](double x, double r) {
        return a(x, r) * (1.0 + eps * std::cos(freq * x));
    };
    out.alpha = base.alpha * (1.0 - eps);
    out.beta = base.beta * (1.0 + eps);
    out.x_independent = base.x_independent && eps == 0.0;
    return out;
}

}  // namespace nonlocal
