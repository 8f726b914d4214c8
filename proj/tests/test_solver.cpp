#include <cmath>

#include <gtest/gtest.h>

#include "nonlocal/experiments.hpp"
#include "nonlocal/solver.hpp"

using namespace nonlocal;

namespace {

double psi(double x) { return 0.5 * x * (1.0 - x); }

NonlocalProblem constant_problem(std::size_t n, double c, Functional ell)
{
    NonlocalProblem p;
    p.mesh = build_mesh(n);
    p.coeff = constant_coefficient(c);
    p.ell = ell;
    return p;
}

}  // namespace

TEST(Parameterized, ConstantCoefficientScalesPoisson)
{
    const auto p = constant_problem(15, 2.0, Functional::gradient_sq());
    const auto u = solve_parameterized(p, 0.3);
    for (std::size_t i = 1; i <= 15; ++i)
        EXPECT_NEAR(u.nodal(i), psi(u.mesh().node(i)) / 2.0, 1e-15);
}

TEST(Parameterized, ZeroLoadGivesZero)
{
    auto p = constant_problem(7, 1.0, Functional::gradient_sq());
    p.load = [](double) { return 0.0; };
    const auto u = solve_parameterized(p, 1.0);
    for (double v : u.values())
        EXPECT_EQ(v, 0.0);
    EXPECT_EQ(G_eval(p, 1.0), 0.0);
}

TEST(Parameterized, ReactionTermUsesThomas)
{
    // -u'' + u = 1 with closed form 1 - cosh(x - 1/2)/cosh(1/2); P1 nodal error O(h²).
    auto p = constant_problem(255, 1.0, Functional::integral());
    p.coeff.lambda_zero = false;
    p.coeff.lambda = [](double, double) { return 1.0; };
    p.quad = QuadratureRule(3);
    const auto u = solve_parameterized(p, 0.0);
    const double h = u.mesh().h();
    for (std::size_t i = 1; i <= 255; i += 17) {
        const double x = u.mesh().node(i);
        EXPECT_NEAR(u.nodal(i), 1.0 - std::cosh(x - 0.5) / std::cosh(0.5), h * h);
    }
}

TEST(Parameterized, FluxFormMatchesThomas)
{
    CoefficientModel c;
    c.a = [](double x, double mu) { return 1.0 + 0.3 * std::sin(4.0 * x) + 0.1 * mu; };
    c.lambda = [](double, double) { return 0.0; };
    c.alpha = 0.5;
    c.beta = 2.0;
    c.lambda_zero = true;
    const auto mesh = build_mesh(63);
    const auto sys = assemble_system(mesh, c, 0.7, QuadratureRule(3),
                                     [](double x) { return 1.0 + x * x; });
    ASSERT_FALSE(sys.element_k.empty());
    const auto flux = solve_flux_form(mesh, sys);
    const auto thomas = solve_tridiagonal(sys);
    for (std::size_t i = 0; i < thomas.size(); ++i)
        EXPECT_NEAR(flux.values()[i], thomas[i], 1e-14);
    EXPECT_LE(residual_max_norm(sys, std::vector<double>(flux.values().begin(), flux.values().end())),
              1e-12);
}

TEST(GEval, ScenarioMapIsScaledG)
{
    // With ℓ(ψ) = 1 fixed, G_h = (1 - h²) G for the x-independent scenarios.
    ScenarioOptions o;
    o.ell_psi = kExactEllPsi;
    for (auto s : {Scenario::Convergent, Scenario::BoundedDivergent,
                   Scenario::UnboundedDivergent}) {
        const auto p = scenario_problem(s, 255, o);
        const double h = p.mesh.h();
        const auto G = scenario_G(s);
        for (double mu : {0.45, 0.75, 1.0, 1.15, 1.8})
            EXPECT_NEAR(G_eval(p, mu), (1.0 - h * h) * G(mu), 1e-12) << to_string(s);
    }
}

TEST(AprioriBound, HoldsForParameterizedSolves)
{
    const auto mesh = build_mesh(63);
    auto f = [](double x) { return std::sin(3.0 * x) + 0.5; };
    const double fn = load_dual_norm(mesh, f);
    const auto coeff = coefficient_from_G(scenario_G(Scenario::Convergent), 1.0, 2.0);
    NonlocalProblem p;
    p.mesh = mesh;
    p.coeff = coeff;
    p.ell = Functional::gradient_sq(12.0);
    p.load = f;
    for (double mu : {0.25, 0.6, 1.0, 1.5, 2.0})
        EXPECT_TRUE(apriori_bound_holds(solve_parameterized(p, mu), fn, coeff.alpha));
}

TEST(AprioriBound, LoadDualNormOfUnitLoad)
{
    // ‖ψ_h‖² = 1/12 - h²/12.
    const auto mesh = build_mesh(31);
    const double h = mesh.h();
    EXPECT_NEAR(load_dual_norm(mesh, [](double) { return 1.0; }), std::sqrt((1.0 - h * h) / 12.0),
                1e-15);
}

TEST(Nonlinear, ConstantCoefficientOneStep)
{
    // a ≡ 2, ℓ = ∫|u'|²: G is constant, so the first iterate is the fixed point.
    const auto p = constant_problem(15, 2.0, Functional::gradient_sq());
    const auto sol = solve_nonlinear(p, 0.0);
    ASSERT_TRUE(sol.trace.converged());
    EXPECT_EQ(sol.trace.steps(), 2u);
    const double h = p.mesh.h();
    EXPECT_NEAR(sol.trace.final_mu(), (1.0 - h * h) / 48.0, 1e-16);
    EXPECT_EQ(sol.linear_solves, 3u);
    ASSERT_TRUE(sol.u.has_value());
}

TEST(Nonlinear, ZeroLoadFixedPointZero)
{
    auto p = constant_problem(7, 1.0, Functional::integral());
    p.load = [](double) { return 0.0; };
    const auto sol = solve_nonlinear(p, 0.5);
    ASSERT_TRUE(sol.trace.converged());
    EXPECT_EQ(sol.trace.final_mu(), 0.0);
}

TEST(Nonlinear, SolutionIsConsistentWithFixedPoint)
{
    const auto p = scenario_problem(Scenario::Convergent, 127);
    const auto sol = solve_nonlinear(p, 0.45);
    ASSERT_TRUE(sol.trace.converged());
    EXPECT_NEAR(eval_functional(p.ell, *sol.u), sol.trace.final_mu(), 1e-13);
}

TEST(Nonlinear, LeavingDomainIsBlowup)
{
    const auto p = scenario_problem(Scenario::UnboundedDivergent, 63);
    const auto sol = solve_nonlinear(p, 0.75);
    EXPECT_EQ(sol.trace.status, TraceStatus::Blowup);
    EXPECT_FALSE(sol.u.has_value());
}

TEST(Simplified, AgreesWithFullSolve)
{
    for (auto s : {Scenario::Convergent, Scenario::BoundedDivergent}) {
        for (std::size_t n : {63u, 1023u}) {
            const auto p = scenario_problem(s, n);
            const auto scheme =
                s == Scenario::Convergent ? IterationScheme::plain() : IterationScheme::damped(5.0);
            const auto x0 = scenario_G(s).nu1;
            const auto full = solve_nonlinear(p, x0, scheme);
            const auto fast = solve_simplified(p, x0, scheme);
            ASSERT_TRUE(full.trace.converged());
            ASSERT_TRUE(fast.trace.converged());
            EXPECT_NEAR(full.trace.final_mu(), fast.trace.final_mu(), 1e-10);
            for (std::size_t i = 0; i < n; ++i)
                EXPECT_NEAR(full.u->values()[i], fast.u->values()[i], 1e-10);
            EXPECT_EQ(fast.linear_solves, 1u);
        }
    }
}

TEST(Simplified, SameClassificationAsFullSolve)
{
    for (auto s : {Scenario::Convergent, Scenario::BoundedDivergent,
                   Scenario::UnboundedDivergent}) {
        const auto p = scenario_problem(s, 255);
        const double x0 = scenario_G(s).nu1;
        EXPECT_EQ(solve_nonlinear(p, x0).trace.status, solve_simplified(p, x0).trace.status)
            << to_string(s);
    }
}

TEST(Simplified, RejectsUnsuitableProblems)
{
    ScenarioOptions o;
    o.eps = 0.1;
    EXPECT_THROW(solve_simplified(scenario_problem(Scenario::Convergent, 15, o), 0.45),
                 PreconditionError);
    auto p = constant_problem(7, 1.0, Functional::integral());
    p.coeff.lambda_zero = false;
    EXPECT_THROW(solve_simplified(p, 0.0), PreconditionError);
}
