#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "nonlocal/coefficients.hpp"
#include "nonlocal/errors.hpp"
#include "nonlocal/fem.hpp"
#include "nonlocal/fixed_point.hpp"
#include "nonlocal/functionals.hpp"
#include "nonlocal/mesh.hpp"
#include "nonlocal/solver.hpp"

namespace nonlocal {

/// Setup shared by the scenario runners: f = 1, ℓ = 12∫|u'|² unless overridden.
struct ScenarioOptions {
    Functional ell = Functional::gradient_sq(12.0);
    /// ℓ(ψ) used to build a(μ) from G. Unset: measured as ℓ(ψ_h) on the mesh,
    /// which makes the discrete map equal G up to rounding.
    std::optional<double> ell_psi;
    double eps = 0.0;
    int m = 1;
    int quad_order = 2;
};

/// 12∫|ψ'|² for ψ = x(1-x)/2, the solution of -ψ'' = 1.
inline constexpr double kExactEllPsi = 1.0;

inline NonlocalProblem scenario_problem(Scenario s, std::size_t n_interior,
                                        const ScenarioOptions& opts = {})
{
    NonlocalProblem p;
    p.mesh = build_mesh(n_interior);
    p.quad = QuadratureRule(opts.quad_order);
    p.ell = opts.ell;
    p.load = [](double) { return 1.0; };
    const auto degree = opts.ell.homogeneity();
    detail::require(degree.has_value(), "scenario coefficients need a homogeneous functional");
    const double ell_psi =
        opts.ell_psi.value_or(eval_functional(p.ell, solve_poisson(p.mesh, p.load, p.quad), p.quad));
    auto base = coefficient_from_G(scenario_G(s), ell_psi, *degree);
    p.coeff = opts.eps == 0.0 ? base : perturbed_coefficient(base, opts.eps, opts.m);
    return p;
}

struct ScenarioRun {
    FixedPointTrace trace;
    /// |μ_h - x_n| against the converged value; filled for converged runs.
    std::vector<double> errors;
    std::optional<FeFunction> u;
};

/**
 * One fixed-point run of a scenario on a mesh with n_interior nodes.
 *
 * x-independent coefficients use the single-solve scalar path, perturbed
 * ones the full parameterized solve per step. x0 defaults to ν1.
 */
inline ScenarioRun run_iteration_scenario(Scenario s, std::size_t n_interior,
                                          std::optional<double> x0 = {},
                                          IterationScheme scheme = IterationScheme::plain(),
                                          const IterationOptions& iter = {},
                                          const ScenarioOptions& opts = {})
{
    const auto p = scenario_problem(s, n_interior, opts);
    const double start = x0.value_or(scenario_G(s).nu1);
    auto sol = p.coeff.x_independent ? solve_simplified(p, start, scheme, iter)
                                     : solve_nonlinear(p, start, scheme, iter);
    ScenarioRun run{std::move(sol.trace), {}, std::move(sol.u)};
    if (run.trace.converged()) {
        const double ref = run.trace.final_mu();
        run.errors.reserve(run.trace.iterates.size());
        for (double x : run.trace.iterates)
            run.errors.push_back(std::abs(ref - x));
    }
    return run;
}

struct SweepRow {
    double mu = 0.0;
    double G = 0.0;
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t count)
{
    detail::require(count >= 2 && lo < hi, "grid needs two or more points on a nonempty interval");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    g.back() = hi;
    return g;
}

/// 101 points on [ν1, ν2].
inline std::vector<double> default_sweep_grid(Scenario s)
{
    const auto G = scenario_G(s);
    return uniform_grid(G.nu1, G.nu2, 101);
}

/// G_h(μ) = ℓ(u_{h,μ}) on each grid point, one linear solve each, sorted by μ.
inline std::vector<SweepRow> sweep_G(const NonlocalProblem& p, std::span<const double> mu_grid)
{
    std::vector<SweepRow> rows;
    rows.reserve(mu_grid.size());
    for (double mu : mu_grid)
        rows.push_back({mu, G_eval(p, mu)});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.mu < b.mu; });
    return rows;
}

/// Every row left of mu0 has μ < G < mu0, every row right of it mu0 < G < μ.
inline bool verify_sign_condition(std::span<const SweepRow> rows, double mu0)
{
    for (const auto& r : rows) {
        detail::require(r.mu != mu0, "sign-condition grid must exclude mu0");
        const bool ok = r.mu < mu0 ? (r.mu < r.G && r.G < mu0) : (mu0 < r.G && r.G < r.mu);
        if (!ok)
            return false;
    }
    return true;
}

struct RateFit {
    double slope = 0.0;
    double constant = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/**
 * Least-squares fit of log(error) = log(constant) + slope·log(h).
 *
 * Records with error below noise_floor are discarded; at least three must
 * remain.
 */
inline RateFit fit_rate(std::span<const double> h, std::span<const double> error,
                        double noise_floor = 1e-13)
{
    detail::require(h.size() == error.size(), "rate fit needs paired data");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (error[i] < noise_floor)
            continue;
        lx.push_back(std::log(h[i]));
        ly.push_back(std::log(error[i]));
    }
    detail::require(lx.size() >= 3, "rate fit needs at least three records above the noise floor");
    const double n = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    detail::require(sxx > 0.0, "rate fit needs distinct mesh widths");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.constant = std::exp(my - fit.slope * mx);
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.points = lx.size();
    return fit;
}

struct ConvergenceRecord {
    double h = 0.0;
    double max_deriv_error = 0.0;
    double mu_error = 0.0;
    std::size_t iterations = 0;

    friend bool operator==(const ConvergenceRecord&, const ConvergenceRecord&) = default;
};

struct HStudyOptions {
    double x0 = 0.45;
    IterationOptions iteration{};
    /// Endpoint sampling sees the O(h) slope error; midpoints are superconvergent.
    DerivativeSampling sampling = DerivativeSampling::Endpoints;
    int quad_order = 2;
};

struct HStudyResult {
    std::vector<ConvergenceRecord> records;
    RateFit derivative_fit;
    RateFit mu_fit;
};

/// Interior node counts for h = 2^-4 ... 2^-10.
inline std::vector<std::size_t> default_h_study_sizes()
{
    std::vector<std::size_t> n;
    for (int k = 4; k <= 10; ++k)
        n.push_back((std::size_t{1} << k) - 1);
    return n;
}

/**
 * Mesh-refinement study of the convergent scenario.
 *
 * The coefficient uses the exact ℓ(ψ) = 1, so the exact fixed point is
 * μ0 = 1 with solution u = x(1-x)/2. Each level runs the full nonlinear
 * solve and records the derivative error in the discrete max norm and
 * |μ0 - μ_h|.
 */
inline HStudyResult run_h_study(Scenario s, std::span<const std::size_t> n_list,
                                const HStudyOptions& opts = {})
{
    if (s != Scenario::Convergent)
        throw PreconditionError("h-study needs the convergent scenario (closed-form solution)");
    ScenarioOptions so;
    so.ell_psi = kExactEllPsi;
    so.quad_order = opts.quad_order;
    const double mu0 = scenario_G(s).mu0;
    auto exact_derivative = [](double x) { return 0.5 - x; };

    HStudyResult out;
    for (std::size_t n : n_list) {
        const auto p = scenario_problem(s, n, so);
        auto sol = solve_nonlinear(p, opts.x0, IterationScheme::plain(), opts.iteration);
        if (!sol.trace.converged()) {
            std::ostringstream msg;
            msg << "h-study aborted at n = " << n << ": " << to_string(sol.trace.status) << " ("
                << sol.trace.message << ")";
            throw StudyError(msg.str());
        }
        ConvergenceRecord rec;
        rec.h = p.mesh.h();
        rec.max_deriv_error = max_derivative_error(exact_derivative, *sol.u, opts.sampling);
        rec.mu_error = std::abs(mu0 - sol.trace.final_mu());
        rec.iterations = sol.trace.steps();
        out.records.push_back(rec);
    }
    std::vector<double> h;
    std::vector<double> eu;
    std::vector<double> em;
    for (const auto& r : out.records) {
        h.push_back(r.h);
        eu.push_back(r.max_deriv_error);
        em.push_back(r.mu_error);
    }
    out.derivative_fit = fit_rate(h, eu);
    out.mu_fit = fit_rate(h, em);
    return out;
}

namespace detail {

// ∫ over [lo, hi] split into `pieces` equal sub-intervals.
template <class Fn>
double integrate_split(const QuadratureRule& quad, double lo, double hi, std::size_t pieces, Fn&& g)
{
    const double len = (hi - lo) / static_cast<double>(pieces);
    double s = 0.0;
    for (std::size_t k = 0; k < pieces; ++k)
        s += integrate(quad, lo + len * static_cast<double>(k), lo + len * static_cast<double>(k + 1), g);
    return s;
}

inline double best_approximation_ratio(const NonlocalProblem& p,
                                       const std::function<double(double)>& ref_derivative,
                                       std::size_t pieces, std::optional<double> dual_norm)
{
    const auto& mesh = p.mesh;
    const std::size_t n = mesh.n_interior();
    const double h = mesh.h();
    std::vector<double> elem(mesh.n_elements());
    for (std::size_t e = 0; e < elem.size(); ++e)
        elem[e] = integrate_split(p.quad, mesh.node(e), mesh.node(e + 1), pieces, ref_derivative);

    TridiagonalSystem sys;
    sys.diag.assign(n, 2.0 / h);
    sys.sub.assign(n - 1, -1.0 / h);
    sys.super.assign(n - 1, -1.0 / h);
    sys.rhs.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        sys.rhs[i] = (elem[i] - elem[i + 1]) / h;
    const FeFunction w(mesh, solve_tridiagonal(sys));

    double err2 = 0.0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double slope = w.slope(e);
        err2 += integrate_split(p.quad, mesh.node(e), mesh.node(e + 1), pieces, [&](double x) {
            const double d = ref_derivative(x) - slope;
            return d * d;
        });
    }
    const double fnorm = dual_norm.value_or(load_dual_norm(mesh, p.load, p.quad));
    require(fnorm > 0.0, "approximation property needs a nonzero load");
    return std::sqrt(err2) / fnorm;
}

}  // namespace detail

/**
 * Energy-norm best-approximation error of a reference solution in S_h,
 * divided by the dual norm of the load.
 *
 * The reference enters through its derivative. In 1D the energy projection
 * onto S_h is computed by one stiffness solve. Without an explicit dual
 * norm the discrete surrogate load_dual_norm() is used.
 */
inline double measure_approximation_property(const NonlocalProblem& p,
                                             const std::function<double(double)>& ref_derivative,
                                             std::optional<double> dual_norm = {})
{
    return detail::best_approximation_ratio(p, ref_derivative, 1, dual_norm);
}

/**
 * Same measure against a fine-mesh reference: the parameterized solve at mu
 * on a mesh refined `levels` times by bisection.
 */
inline double measure_approximation_property(const NonlocalProblem& p, double mu, int levels)
{
    detail::require(levels >= 1 && levels <= 16, "fine-mesh reference needs 1..16 refinements");
    NonlocalProblem fine = p;
    const std::size_t factor = std::size_t{1} << levels;
    fine.mesh = build_mesh((p.mesh.n_interior() + 1) * factor - 1);
    const FeFunction ref = solve_parameterized(fine, mu);
    return detail::best_approximation_ratio(
        p, [&ref](double x) { return eval_fe_derivative(ref, x); }, factor, std::nullopt);
}

/// Constant dual datum D_μ = 2·scale/a(μ) of ℓ = scale·∫|u'|² around the
/// solution of -a(μ)u'' = 1; 24/a(μ) for the experiment functional.
inline double dual_data(double a_mu, double scale = 12.0)
{
    detail::require(a_mu > 0.0, "coefficient must be positive");
    return 2.0 * scale / a_mu;
}

inline double dual_data(Scenario s, double mu)
{
    const auto coeff = coefficient_from_G(scenario_G(s), kExactEllPsi, 2.0);
    return dual_data(coeff.a_of(mu));
}

}  // namespace nonlocal
