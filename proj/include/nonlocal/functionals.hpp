#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nonlocal/errors.hpp"
#include "nonlocal/mesh.hpp"

namespace nonlocal {

enum class FunctionalKind {
    Integral,                  ///< ∫ u
    PPowerIntegral,            ///< ∫ |u|^p
    GradientSquared,           ///< scale · ∫ |u'|²
    SubdomainIntegral,         ///< ∫_a^b u
    SubdomainGradientSquared,  ///< ∫_a^b |u'|²
};

/**
 * Nonlocal functional ℓ on S_h.
 *
 * `param` holds p for PPowerIntegral and the scale for GradientSquared;
 * `lo`/`hi` bound the subdomain kinds. Every shipped kind is positively
 * homogeneous; the degree is reported by homogeneity().
 */
struct Functional {
    FunctionalKind kind = FunctionalKind::GradientSquared;
    double param = 1.0;
    double lo = 0.0;
    double hi = 1.0;

    static Functional integral() { return {FunctionalKind::Integral}; }
    static Functional p_power(double p)
    {
        detail::require(p >= 1.0, "p_power needs p >= 1");
        return {FunctionalKind::PPowerIntegral, p};
    }
    static Functional gradient_sq(double scale = 1.0)
    {
        return {FunctionalKind::GradientSquared, scale};
    }
    static Functional subdomain_integral(double a, double b)
    {
        check_subdomain(a, b);
        return {FunctionalKind::SubdomainIntegral, 1.0, a, b};
    }
    static Functional subdomain_gradient_sq(double a, double b)
    {
        check_subdomain(a, b);
        return {FunctionalKind::SubdomainGradientSquared, 1.0, a, b};
    }

    std::optional<double> homogeneity() const noexcept
    {
        switch (kind) {
        case FunctionalKind::Integral:
        case FunctionalKind::SubdomainIntegral: return 1.0;
        case FunctionalKind::PPowerIntegral: return param;
        case FunctionalKind::GradientSquared:
        case FunctionalKind::SubdomainGradientSquared: return 2.0;
        }
        return std::nullopt;
    }

    static void check_subdomain(double a, double b)
    {
        detail::require(a < b, "subdomain needs a < b");
        detail::require(a >= 0.0 && b <= 1.0, "subdomain must lie in [0,1]");
    }
};

namespace detail {

// Overlap of element e with [lo, hi] as an interval; empty if lo >= hi.
inline std::pair<double, double> overlap(const UniformMesh1D& mesh, std::size_t e, double lo,
                                         double hi)
{
    return {std::max(lo, mesh.node(e)), std::min(hi, mesh.node(e + 1))};
}

}  // namespace detail

inline double eval_functional(const Functional& l, const FeFunction& u,
                              const QuadratureRule& quad = QuadratureRule{})
{
    if (l.kind == FunctionalKind::SubdomainIntegral
        || l.kind == FunctionalKind::SubdomainGradientSquared)
        Functional::check_subdomain(l.lo, l.hi);
    if (l.kind == FunctionalKind::PPowerIntegral)
        detail::require(l.param >= 1.0, "p_power needs p >= 1");
    const auto& mesh = u.mesh();
    const double h = mesh.h();
    switch (l.kind) {
    case FunctionalKind::Integral: {
        double s = 0.0;
        for (double v : u.values())
            s += v;
        return h * s;
    }
    case FunctionalKind::PPowerIntegral: {
        double s = 0.0;
        for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
            const double ul = u.nodal(e);
            const double ur = u.nodal(e + 1);
            const double xl = mesh.node(e);
            s += integrate(quad, xl, mesh.node(e + 1), [&](double x) {
                const double t = (x - xl) / h;
                return std::pow(std::abs((1.0 - t) * ul + t * ur), l.param);
            });
        }
        return s;
    }
    case FunctionalKind::GradientSquared: {
        double s = 0.0;
        for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
            const double d = u.slope(e);
            s += d * d;
        }
        return l.param * h * s;
    }
    case FunctionalKind::SubdomainIntegral: {
        double s = 0.0;
        for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
            const auto [a, b] = detail::overlap(mesh, e, l.lo, l.hi);
            if (a >= b)
                continue;
            s += 0.5 * (b - a) * (eval_fe(u, a) + eval_fe(u, b));
        }
        return s;
    }
    case FunctionalKind::SubdomainGradientSquared: {
        double s = 0.0;
        for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
            const auto [a, b] = detail::overlap(mesh, e, l.lo, l.hi);
            if (a >= b)
                continue;
            const double d = u.slope(e);
            s += (b - a) * d * d;
        }
        return s;
    }
    }
    return 0.0;
}

/// max over c of |ℓ(cu) - c^p ℓ(u)| / max(|ℓ(u)|, 1).
inline double check_homogeneity(const Functional& l, const FeFunction& u,
                                std::span<const double> scales,
                                const QuadratureRule& quad = QuadratureRule{})
{
    const auto p = l.homogeneity();
    detail::require(p.has_value(), "functional has no homogeneity degree");
    const double base = eval_functional(l, u, quad);
    const double denom = std::max(std::abs(base), 1.0);
    double dev = 0.0;
    for (double c : scales) {
        const double scaled = eval_functional(l, u.scaled(c), quad);
        dev = std::max(dev, std::abs(scaled - std::pow(c, *p) * base) / denom);
    }
    return dev;
}

namespace detail {

inline double parse_number(std::string_view text, std::string_view what)
{
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
        throw UsageError("malformed number '" + std::string(text) + "' in " + std::string(what));
    return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

/**
 * Parse "integral", "p_power:<p>", "grad_sq:<scale>", "sub_integral:<a>:<b>"
 * or "sub_grad_sq:<a>:<b>".
 */
inline Functional parse_functional(std::string_view spec)
{
    const auto parts = detail::split(spec, ':');
    const auto name = parts.front();
    auto arity = [&](std::size_t n) {
        if (parts.size() != n + 1)
            throw UsageError("functional '" + std::string(spec) + "' expects "
                             + std::to_string(n) + " argument(s)");
    };
    try {
        if (name == "integral") {
            arity(0);
            return Functional::integral();
        }
        if (name == "p_power") {
            arity(1);
            return Functional::p_power(detail::parse_number(parts[1], spec));
        }
        if (name == "grad_sq") {
            arity(1);
            return Functional::gradient_sq(detail::parse_number(parts[1], spec));
        }
        if (name == "sub_integral") {
            arity(2);
            return Functional::subdomain_integral(detail::parse_number(parts[1], spec),
                                                  detail::parse_number(parts[2], spec));
        }
        if (name == "sub_grad_sq") {
            arity(2);
            return Functional::subdomain_gradient_sq(detail::parse_number(parts[1], spec),
                                                     detail::parse_number(parts[2], spec));
        }
    } catch (const PreconditionError& e) {
        throw UsageError(e.what());
    }
    throw UsageError("unknown functional '" + std::string(spec) + "'");
}

}  // namespace nonlocal
