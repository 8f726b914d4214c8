#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nonlocal/errors.hpp"

namespace nonlocal {

enum class TraceStatus { Converged, MaxIterations, TwoCycle, Blowup };

inline std::string_view to_string(TraceStatus s) noexcept
{
    switch (s) {
    case TraceStatus::Converged: return "converged";
    case TraceStatus::MaxIterations: return "max_iterations";
    case TraceStatus::TwoCycle: return "two_cycle";
    case TraceStatus::Blowup: return "blowup";
    }
    return "?";
}

/**
 * Iterates x_0, x_1, ... of a scalar fixed-point scheme.
 *
 * residuals[k] = |x_{k+1} - x_k|, so residuals.size() == iterates.size() - 1.
 */
struct FixedPointTrace {
    std::vector<double> iterates;
    std::vector<double> residuals;
    TraceStatus status = TraceStatus::MaxIterations;
    std::string message;

    double final_mu() const { return iterates.back(); }
    std::size_t steps() const noexcept { return residuals.size(); }
    bool converged() const noexcept { return status == TraceStatus::Converged; }

    friend bool operator==(const FixedPointTrace&, const FixedPointTrace&) = default;
};

struct IterationOptions {
    double tol = 1e-14;
    std::size_t max_iter = 1000;
    double blowup = 1e6;
    /// Consecutive steps that must look like a period-2 orbit.
    std::size_t cycle_window = 8;
};

/// x_{n+1} = (κ x_n + G(x_n)) / (κ + 1); κ = 0 is the plain iteration.
struct IterationScheme {
    double kappa = 0.0;

    static IterationScheme plain() { return {0.0}; }
    static IterationScheme damped(double kappa)
    {
        detail::require(kappa >= 0.0, "damping parameter must be nonnegative");
        return {kappa};
    }
    bool is_plain() const noexcept { return kappa == 0.0; }
};

namespace detail {

template <class Map>
FixedPointTrace run_iteration(Map&& G, double x0, double kappa, const IterationOptions& opts)
{
    require(opts.tol > 0.0, "tolerance must be positive");
    require(opts.max_iter >= 1, "max_iter must be at least 1");
    require(kappa >= 0.0, "damping parameter must be nonnegative");

    FixedPointTrace trace;
    trace.iterates.push_back(x0);
    std::size_t cycle_run = 0;
    double x = x0;
    for (std::size_t step = 1; step <= opts.max_iter; ++step) {
        const double g = G(x);
        if (!std::isfinite(g)) {
            trace.status = TraceStatus::Blowup;
            trace.message = "non-finite map value at x = " + std::to_string(x);
            return trace;
        }
        const double next = kappa == 0.0 ? g : (kappa * x + g) / (kappa + 1.0);
        const double r = std::abs(next - x);
        trace.iterates.push_back(next);
        trace.residuals.push_back(r);
        x = next;

        if (r <= opts.tol) {
            trace.status = TraceStatus::Converged;
            return trace;
        }
        if (!(std::abs(next) <= opts.blowup)) {
            trace.status = TraceStatus::Blowup;
            trace.message = "iterate magnitude exceeded " + std::to_string(opts.blowup);
            return trace;
        }
        const auto& it = trace.iterates;
        const std::size_t n = it.size();
        if (n >= 3 && std::abs(it[n - 1] - it[n - 3]) <= opts.tol && r > 10.0 * opts.tol
            && trace.residuals[n - 3] > 10.0 * opts.tol) {
            if (++cycle_run >= opts.cycle_window) {
                trace.status = TraceStatus::TwoCycle;
                trace.message = "period-2 orbit between " + std::to_string(it[n - 2]) + " and "
                                + std::to_string(it[n - 1]);
                return trace;
            }
        } else {
            cycle_run = 0;
        }
    }
    trace.status = TraceStatus::MaxIterations;
    trace.message = "no convergence after " + std::to_string(opts.max_iter) + " steps";
    return trace;
}

}  // namespace detail

/// Plain iteration x_{n+1} = G(x_n).
template <class Map>
FixedPointTrace fixed_point_iterate(Map&& G, double x0, const IterationOptions& opts = {})
{
    return detail::run_iteration(G, x0, 0.0, opts);
}

/// Damped iteration x_{n+1} = (κ x_n + G(x_n)) / (κ + 1).
template <class Map>
FixedPointTrace damped_iterate(Map&& G, double x0, double kappa, const IterationOptions& opts = {})
{
    return detail::run_iteration(G, x0, kappa, opts);
}

template <class Map>
FixedPointTrace iterate(Map&& G, double x0, IterationScheme scheme, const IterationOptions& opts = {})
{
    return detail::run_iteration(G, x0, scheme.kappa, opts);
}

enum class MonotoneCase { Case1, Case2, Neither };

inline std::string_view to_string(MonotoneCase c) noexcept
{
    switch (c) {
    case MonotoneCase::Case1: return "case1";
    case MonotoneCase::Case2: return "case2";
    case MonotoneCase::Neither: return "neither";
    }
    return "?";
}

/**
 * Which ordering hypothesis of the damped scheme holds at x0.
 *
 * Case1: x0 <= x1 and x0 <= mu_star (sequence increases to mu_star).
 * Case2: x0 >= x1 and x0 >= mu_star. Ties resolve to Case1.
 */
template <class Map>
MonotoneCase check_mfi_preconditions(Map&& G, double kappa, double x0, double mu_star)
{
    detail::require(kappa >= 0.0, "damping parameter must be nonnegative");
    const double x1 = (kappa * x0 + G(x0)) / (kappa + 1.0);
    if (x0 <= x1 && x0 <= mu_star)
        return MonotoneCase::Case1;
    if (x0 >= x1 && x0 >= mu_star)
        return MonotoneCase::Case2;
    return MonotoneCase::Neither;
}

/// max |G(x_{i+1}) - G(x_i)| / |x_{i+1} - x_i| over a uniform grid on [lo, hi].
template <class Map>
double estimate_lipschitz(Map&& G, double lo, double hi, std::size_t points = 10001)
{
    detail::require(lo < hi && points >= 2, "Lipschitz estimate needs a nonempty grid");
    double best = 0.0;
    double x_prev = lo;
    double g_prev = G(lo);
    for (std::size_t i = 1; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const double g = G(x);
        best = std::max(best, std::abs(g - g_prev) / (x - x_prev));
        x_prev = x;
        g_prev = g;
    }
    return best;
}

}  // namespace nonlocal
