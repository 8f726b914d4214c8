#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "nonlocal/coefficients.hpp"
#include "nonlocal/errors.hpp"
#include "nonlocal/fem.hpp"
#include "nonlocal/fixed_point.hpp"
#include "nonlocal/functionals.hpp"
#include "nonlocal/mesh.hpp"

namespace nonlocal {

/**
 * Discrete nonlocal problem: find u in S_h with
 *   ∫ a(x, ℓ(u)) u'v' + λ(x, ℓ(u)) u v = ∫ f v   for all v in S_h.
 */
struct NonlocalProblem {
    UniformMesh1D mesh{1};
    CoefficientModel coeff;
    Functional ell;
    std::function<double(double)> load = [](double) { return 1.0; };
    QuadratureRule quad{2};
};

/// Galerkin solution of the linear problem with the nonlocal argument frozen at mu.
inline FeFunction solve_parameterized(const NonlocalProblem& p, double mu)
{
    const auto sys = assemble_system(p.mesh, p.coeff, mu, p.quad, p.load);
    return solve_system(p.mesh, sys);
}

/// G_S(mu) = ℓ(u_{S,mu}).
inline double G_eval(const NonlocalProblem& p, double mu)
{
    return eval_functional(p.ell, solve_parameterized(p, mu), p.quad);
}

/// ‖u‖ <= ‖F‖_*/α, the a priori bound of the parameterized solve.
inline bool apriori_bound_holds(const FeFunction& u, double load_dual_norm, double alpha,
                                double rel_slack = 1e-12)
{
    detail::require(alpha > 0.0, "alpha must be positive");
    return energy_norm(u) <= load_dual_norm / alpha * (1.0 + rel_slack);
}

/**
 * Energy norm of the discrete Poisson solution with load f.
 *
 * Stands in for the dual norm ‖F‖_* of F(v) = ∫ f v; it is exact on S_h and
 * converges to ‖F‖_* under refinement.
 */
inline double load_dual_norm(const UniformMesh1D& mesh, const std::function<double(double)>& f,
                             const QuadratureRule& quad = QuadratureRule{})
{
    return energy_norm(solve_poisson(mesh, f, quad));
}

struct NonlinearSolution {
    FixedPointTrace trace;
    /// u_{S,mu_S}; set only when the iteration converged.
    std::optional<FeFunction> u;
    std::size_t linear_solves = 0;
};

/**
 * Fixed-point iteration on mu with one linear solve per map evaluation.
 *
 * A coefficient that cannot be assembled at the current iterate (e.g. it
 * left the region where it is defined) is reported as a non-finite map value,
 * i.e. as Blowup.
 */
inline NonlinearSolution solve_nonlinear(const NonlocalProblem& p, double x0,
                                         IterationScheme scheme = IterationScheme::plain(),
                                         const IterationOptions& opts = {})
{
    NonlinearSolution out;
    auto G = [&](double mu) {
        ++out.linear_solves;
        try {
            return G_eval(p, mu);
        } catch (const BoundViolation&) {
            if (p.coeff.in_validity(mu))
                throw;
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    out.trace = iterate(G, x0, scheme, opts);
    if (out.trace.converged()) {
        out.u = solve_parameterized(p, out.trace.final_mu());
        ++out.linear_solves;
    }
    return out;
}

/**
 * Fixed-point iteration for x-independent a, λ = 0 and p-homogeneous ℓ.
 *
 * Then u_{S,mu} = ψ_S / a(mu) with ψ_S the discrete Poisson solution, so the
 * scalar map is x -> ℓ(ψ_S) / a(x)^p and a single linear solve suffices.
 */
inline NonlinearSolution solve_simplified(const NonlocalProblem& p, double x0,
                                          IterationScheme scheme = IterationScheme::plain(),
                                          const IterationOptions& opts = {})
{
    if (!p.coeff.x_independent)
        throw PreconditionError("simplified path needs an x-independent coefficient");
    if (!p.coeff.lambda_zero)
        throw PreconditionError("simplified path needs lambda = 0");
    const auto degree = p.ell.homogeneity();
    if (!degree)
        throw PreconditionError("simplified path needs a homogeneous functional");

    NonlinearSolution out;
    const FeFunction psi = solve_poisson(p.mesh, p.load, p.quad);
    out.linear_solves = 1;
    const double c = eval_functional(p.ell, psi, p.quad);
    const double hom = *degree;
    auto G = [&](double x) {
        const double a = p.coeff.a_of(x);
        if (!(std::isfinite(a) && a > 0.0))
            return std::numeric_limits<double>::quiet_NaN();
        return c / std::pow(a, hom);
    };
    out.trace = iterate(G, x0, scheme, opts);
    if (out.trace.converged())
        out.u = psi.scaled(1.0 / p.coeff.a_of(out.trace.final_mu()));
    return out;
}

}  // namespace nonlocal
