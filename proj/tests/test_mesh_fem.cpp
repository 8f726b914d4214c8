#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nonlocal/fem.hpp"
#include "nonlocal/mesh.hpp"

using namespace nonlocal;

namespace {

double psi(double x) { return 0.5 * x * (1.0 - x); }
double dpsi(double x) { return 0.5 - x; }

// Exact polynomial arithmetic for the quadrature oracles; coefficients in
// increasing degree.
using Poly = std::vector<double>;

Poly mul(const Poly& a, const Poly& b)
{
    Poly c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i + j] += a[i] * b[j];
    return c;
}

double integral(const Poly& p, double lo, double hi)
{
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double e = static_cast<double>(k + 1);
        s += p[k] * (std::pow(hi, e) - std::pow(lo, e)) / e;
    }
    return s;
}

double eval(const Poly& p, double x)
{
    double s = 0.0;
    for (std::size_t k = p.size(); k-- > 0;)
        s = s * x + p[k];
    return s;
}

// Hat function of node i restricted to element [x_e, x_{e+1}] as a polynomial.
Poly hat_on_element(const UniformMesh1D& mesh, std::size_t node, std::size_t e)
{
    const double h = mesh.h();
    const double xl = mesh.node(e);
    if (node == e)
        return {1.0 + xl / h, -1.0 / h};
    if (node == e + 1)
        return {-xl / h, 1.0 / h};
    return {0.0};
}

}  // namespace

TEST(Mesh, SmallestMesh)
{
    const auto mesh = build_mesh(1);
    EXPECT_EQ(mesh.h(), 0.5);
    EXPECT_EQ(mesh.node(1), 0.5);
    EXPECT_EQ(mesh.n_elements(), 2u);
}

TEST(Mesh, ThreeInteriorNodes)
{
    const auto x = build_mesh(3).nodes();
    const std::vector<double> want{0.0, 0.25, 0.5, 0.75, 1.0};
    EXPECT_EQ(x, want);
}

TEST(Mesh, FineMeshWidth)
{
    EXPECT_EQ(build_mesh(8191).h(), std::ldexp(1.0, -13));
}

TEST(Mesh, RejectsEmpty)
{
    EXPECT_THROW(build_mesh(0), PreconditionError);
}

TEST(Mesh, SpacingInvariant)
{
    for (std::size_t n : {1u, 2u, 6u, 9u, 99u, 1000u}) {
        const auto mesh = build_mesh(n);
        EXPECT_NEAR(mesh.h() * static_cast<double>(n + 1), 1.0, 1e-15);
        const auto x = mesh.nodes();
        EXPECT_EQ(x.front(), 0.0);
        EXPECT_EQ(x.back(), 1.0);
        for (std::size_t i = 1; i < x.size(); ++i)
            EXPECT_NEAR(x[i] - x[i - 1], mesh.h(), 1e-15);
    }
}

TEST(Mesh, FromWidth)
{
    EXPECT_EQ(mesh_from_width(0.25).n_interior(), 3u);
    EXPECT_EQ(mesh_from_width(std::ldexp(1.0, -13)).n_interior(), 8191u);
    EXPECT_THROW(mesh_from_width(0.3), PreconditionError);
}

TEST(Quadrature, WeightsPositiveAndSumToOne)
{
    for (int order = 1; order <= 8; ++order) {
        const QuadratureRule q(order);
        double sum = 0.0;
        for (double w : q.weights()) {
            EXPECT_GT(w, 0.0);
            sum += w;
        }
        EXPECT_NEAR(sum, 1.0, 1e-15) << "order " << order;
        for (double x : q.points()) {
            EXPECT_GT(x, 0.0);
            EXPECT_LT(x, 1.0);
        }
    }
}

TEST(Quadrature, ExactUpToDegree2nMinus1)
{
    for (int order = 1; order <= 8; ++order) {
        const QuadratureRule q(order);
        for (int deg = 0; deg <= 2 * order - 1; ++deg) {
            const double got = integrate(q, 0.2, 0.7, [&](double x) { return std::pow(x, deg); });
            const double want = (std::pow(0.7, deg + 1) - std::pow(0.2, deg + 1)) / (deg + 1);
            EXPECT_NEAR(got, want, 1e-15) << "order " << order << " degree " << deg;
        }
    }
}

TEST(Quadrature, RejectsOrderZero)
{
    EXPECT_THROW(QuadratureRule(0), PreconditionError);
}

TEST(Assembly, ConstantCoefficientStiffness)
{
    const auto mesh = build_mesh(3);
    const auto sys = assemble_system(mesh, constant_coefficient(1.0), 0.0, QuadratureRule{},
                                     [](double) { return 1.0; });
    EXPECT_EQ(sys.diag, (std::vector<double>{8, 8, 8}));
    EXPECT_EQ(sys.sub, (std::vector<double>{-4, -4}));
    EXPECT_EQ(sys.super, (std::vector<double>{-4, -4}));
}

TEST(Assembly, ConstantCoefficientScales)
{
    for (std::size_t n : {2u, 3u, 7u, 63u}) {
        const auto mesh = build_mesh(n);
        const double c = 2.75;
        const auto one = assemble_system(mesh, constant_coefficient(1.0), 0.0, QuadratureRule{},
                                         [](double) { return 0.0; });
        const auto sc = assemble_system(mesh, constant_coefficient(c), 0.0, QuadratureRule{},
                                        [](double) { return 0.0; });
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(sc.diag[i], c * one.diag[i]);
            EXPECT_EQ(sc.diag[i], 2.0 * (c / mesh.h()));
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            EXPECT_EQ(sc.sub[i], c * one.sub[i]);
            EXPECT_EQ(sc.sub[i], -c / mesh.h());
        }
    }
}

TEST(Assembly, LinearCoefficientSingleHat)
{
    CoefficientModel coeff;
    coeff.a = [](double x, double) { return 1.0 + x; };
    coeff.lambda = [](double, double) { return 0.0; };
    coeff.alpha = 1.0;
    coeff.beta = 2.0;
    coeff.lambda_zero = true;
    const auto sys = assemble_system(build_mesh(1), coeff, 0.0, QuadratureRule(2),
                                     [](double) { return 0.0; });
    ASSERT_EQ(sys.size(), 1u);
    EXPECT_NEAR(sys.diag[0], 6.0, 1e-14);
}

TEST(Assembly, QuadratureExactForCubicDiffusionAndLinearReaction)
{
    // Oracle: exact polynomial integration of a φ_i'φ_j' and λ φ_i φ_j.
    const Poly a_poly{1.0, 0.3, -0.2, 0.5};
    const Poly lam_poly{0.4, 0.6};
    CoefficientModel coeff;
    coeff.a = [&](double x, double) { return eval(a_poly, x); };
    coeff.lambda = [&](double x, double) { return eval(lam_poly, x); };
    coeff.alpha = 0.5;
    coeff.beta = 2.0;
    const auto mesh = build_mesh(5);
    const double h = mesh.h();
    const auto sys = assemble_system(mesh, coeff, 0.0, QuadratureRule(2),
                                     [](double) { return 0.0; });
    auto entry = [&](std::size_t i, std::size_t j) {
        // interior dofs i, j are nodes i+1, j+1
        double s = 0.0;
        for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
            const Poly pi = hat_on_element(mesh, i + 1, e);
            const Poly pj = hat_on_element(mesh, j + 1, e);
            const double di = pi.size() > 1 ? pi[1] : 0.0;
            const double dj = pj.size() > 1 ? pj[1] : 0.0;
            s += di * dj * integral(a_poly, mesh.node(e), mesh.node(e + 1));
            s += integral(mul(lam_poly, mul(pi, pj)), mesh.node(e), mesh.node(e + 1));
        }
        return s;
    };
    for (std::size_t i = 0; i < mesh.n_interior(); ++i) {
        EXPECT_NEAR(sys.diag[i], entry(i, i), 1e-13 / h);
        if (i + 1 < mesh.n_interior()) {
            EXPECT_NEAR(sys.super[i], entry(i, i + 1), 1e-13 / h);
            EXPECT_NEAR(sys.sub[i], entry(i + 1, i), 1e-13 / h);
        }
    }
}

TEST(Assembly, BoundViolationInsideValidityRange)
{
    auto coeff = constant_coefficient(1.0);
    coeff.a = [](double, double r) { return r; };
    coeff.alpha = 0.5;
    coeff.beta = 2.0;
    coeff.r_min = 0.0;
    coeff.r_max = 10.0;
    const auto mesh = build_mesh(3);
    auto f = [](double) { return 1.0; };
    EXPECT_NO_THROW(assemble_system(mesh, coeff, 1.0, QuadratureRule{}, f));
    EXPECT_THROW(assemble_system(mesh, coeff, 3.0, QuadratureRule{}, f), BoundViolation);
    EXPECT_THROW(assemble_system(mesh, coeff, 0.25, QuadratureRule{}, f), BoundViolation);
    // Outside the validity range the bounds are not enforced.
    const auto sys = assemble_system(mesh, coeff, 11.0, QuadratureRule{}, f);
    EXPECT_FALSE(sys.bounds_checked);
    // Non-positive a is never assembled.
    EXPECT_THROW(assemble_system(mesh, coeff, -1.0, QuadratureRule{}, f), BoundViolation);
}

TEST(Assembly, ReactionBoundViolation)
{
    auto coeff = constant_coefficient(1.0);
    coeff.lambda_zero = false;
    coeff.lambda = [](double, double) { return -0.1; };
    EXPECT_THROW(assemble_system(build_mesh(3), coeff, 0.0, QuadratureRule{},
                                 [](double) { return 1.0; }),
                 BoundViolation);
}

TEST(Load, UnitLoad)
{
    const auto load = assemble_load(build_mesh(3), [](double) { return 1.0; }, QuadratureRule{});
    ASSERT_EQ(load.size(), 3u);
    for (double v : load)
        EXPECT_NEAR(v, 0.25, 1e-16);
}

TEST(Load, ZeroLoad)
{
    const auto load = assemble_load(build_mesh(7), [](double) { return 0.0; }, QuadratureRule{});
    for (double v : load)
        EXPECT_EQ(v, 0.0);
}

TEST(Load, LinearLoadSingleHat)
{
    const auto load = assemble_load(build_mesh(1), [](double x) { return x; }, QuadratureRule{});
    EXPECT_NEAR(load[0], 0.25, 1e-16);
}

TEST(Tridiagonal, OneByOne)
{
    TridiagonalSystem sys;
    sys.diag = {2.0};
    sys.rhs = {2.0};
    EXPECT_EQ(solve_tridiagonal(sys), std::vector<double>{1.0});
}

TEST(Tridiagonal, PoissonNodalExactness)
{
    for (std::size_t n : {1u, 2u, 3u, 10u, 15u, 100u, 255u, 1023u, 8191u}) {
        const auto u = solve_poisson(build_mesh(n), [](double) { return 1.0; });
        for (std::size_t i = 1; i <= n; ++i)
            ASSERT_NEAR(u.nodal(i), psi(u.mesh().node(i)), 1e-12) << "n=" << n << " i=" << i;
    }
}

TEST(Tridiagonal, ResidualBound)
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    CoefficientModel coeff;
    coeff.a = [](double x, double) { return 1.0 + 0.5 * std::sin(5.0 * x); };
    coeff.lambda = [](double x, double) { return 0.3 * x; };
    coeff.alpha = 0.5;
    coeff.beta = 1.5;
    for (std::size_t n : {5u, 50u, 500u}) {
        auto sys = assemble_system(build_mesh(n), coeff, 0.0, QuadratureRule(3),
                                   [](double) { return 0.0; });
        for (double& b : sys.rhs)
            b = dist(rng);
        const auto x = solve_tridiagonal(sys);
        double max_rhs = 0.0;
        for (double b : sys.rhs)
            max_rhs = std::max(max_rhs, std::abs(b));
        EXPECT_LE(residual_max_norm(sys, x), 1e-12 * (max_rhs + 1.0));
    }
}

TEST(Tridiagonal, SymmetricSolution)
{
    const auto mesh = build_mesh(31);
    CoefficientModel coeff;
    coeff.a = [](double x, double) { return 1.0 + (x - 0.5) * (x - 0.5); };
    coeff.lambda = [](double, double) { return 0.0; };
    coeff.alpha = 1.0;
    coeff.beta = 1.25;
    coeff.lambda_zero = true;
    const auto sys = assemble_system(mesh, coeff, 0.0, QuadratureRule(3),
                                     [](double x) { return std::cos(3.0 * (x - 0.5)); });
    const auto x = solve_tridiagonal(sys);
    for (std::size_t i = 0; i < x.size(); ++i)
        EXPECT_NEAR(x[i], x[x.size() - 1 - i], 1e-14);
}

TEST(Tridiagonal, NearZeroPivot)
{
    TridiagonalSystem sys;
    sys.diag = {1.0, 1.0};
    sys.sub = {1.0};
    sys.super = {1.0};
    sys.rhs = {1.0, 1.0};
    EXPECT_THROW(solve_tridiagonal(sys), SingularPivot);
}

TEST(Tridiagonal, RejectsInconsistentSizes)
{
    TridiagonalSystem sys;
    sys.diag = {1.0, 1.0};
    sys.rhs = {1.0};
    EXPECT_THROW(solve_tridiagonal(sys), PreconditionError);
}

TEST(FeFunction, LinearInterpolation)
{
    const FeFunction u(build_mesh(1), {1.0});
    EXPECT_EQ(eval_fe(u, 0.25), 0.5);
    EXPECT_EQ(eval_fe_derivative(u, 0.25), 2.0);
    EXPECT_EQ(eval_fe(u, 0.0), 0.0);
    EXPECT_EQ(eval_fe(u, 1.0), 0.0);
}

TEST(FeFunction, ZeroFunction)
{
    const auto u = FeFunction::zero(build_mesh(9));
    for (double x : {0.0, 0.13, 0.5, 0.99, 1.0}) {
        EXPECT_EQ(eval_fe(u, x), 0.0);
        EXPECT_EQ(eval_fe_derivative(u, x), 0.0);
    }
}

TEST(FeFunction, NodeDerivativeTakesRightElement)
{
    const FeFunction u(build_mesh(1), {1.0});
    EXPECT_EQ(eval_fe_derivative(u, 0.5), -2.0);
    EXPECT_EQ(eval_fe_derivative(u, 0.0), 2.0);
    EXPECT_EQ(eval_fe_derivative(u, 1.0), -2.0);
}

TEST(FeFunction, RejectsOutsideUnitInterval)
{
    const FeFunction u(build_mesh(3), {1.0, 2.0, 3.0});
    EXPECT_THROW(eval_fe(u, -0.01), PreconditionError);
    EXPECT_THROW(eval_fe(u, 1.01), PreconditionError);
    EXPECT_THROW(eval_fe_derivative(u, std::nan("")), PreconditionError);
}

TEST(FeFunction, RejectsWrongLength)
{
    EXPECT_THROW(FeFunction(build_mesh(3), {1.0}), PreconditionError);
}

TEST(DerivativeError, MidpointsOfQuadraticInterpolantAreExact)
{
    for (std::size_t n : {1u, 7u, 100u}) {
        const auto u = FeFunction::interpolate(build_mesh(n), psi);
        EXPECT_LE(max_derivative_error(dpsi, u, DerivativeSampling::Midpoint), 1e-13);
    }
}

TEST(DerivativeError, ZeroAgainstUnitSlope)
{
    const auto u = FeFunction::zero(build_mesh(5));
    EXPECT_EQ(max_derivative_error([](double) { return 1.0; }, u), 1.0);
}

TEST(DerivativeError, EndpointsSeeHalfMeshWidth)
{
    for (std::size_t n : {1u, 7u, 100u}) {
        const auto u = FeFunction::interpolate(build_mesh(n), psi);
        EXPECT_NEAR(max_derivative_error(dpsi, u, DerivativeSampling::Endpoints),
                    0.5 * u.mesh().h(), 1e-13);
    }
}

TEST(Galerkin, OrthogonalityForPoisson)
{
    for (std::size_t n : {3u, 31u, 255u}) {
        const auto uh = solve_poisson(build_mesh(n), [](double) { return 1.0; });
        const double h = uh.mesh().h();
        const double err2 = std::pow(energy_error(dpsi, uh, QuadratureRule(2)), 2);
        const double uh2 = std::pow(energy_norm(uh), 2);
        EXPECT_NEAR(err2, h * h / 12.0, 1e-10 * h * h / 12.0);
        EXPECT_NEAR(uh2, 1.0 / 12.0 - err2, 1e-10 / 12.0);
    }
}

TEST(Galerkin, RefinementNesting)
{
    for (std::size_t n : {3u, 15u, 127u}) {
        const auto coarse = solve_poisson(build_mesh(n), [](double) { return 1.0; });
        const auto fine = solve_poisson(build_mesh(2 * n + 1), [](double) { return 1.0; });
        for (std::size_t i = 1; i <= n; ++i)
            EXPECT_NEAR(coarse.nodal(i), fine.nodal(2 * i), 1e-14);
    }
}
