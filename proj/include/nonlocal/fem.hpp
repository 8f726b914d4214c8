#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <vector>

#include "nonlocal/coefficients.hpp"
#include "nonlocal/errors.hpp"
#include "nonlocal/mesh.hpp"

namespace nonlocal {

/// Banded system for the interior degrees of freedom.
struct TridiagonalSystem {
    std::vector<double> sub;    // row i+1, column i
    std::vector<double> diag;
    std::vector<double> super;  // row i, column i+1
    std::vector<double> rhs;
    /// False when the parameter lay outside the coefficient's validity range.
    bool bounds_checked = true;
    /// Element stiffness ∫a/h per element (n+1 entries); kept when λ ≡ 0 so
    /// the system can be solved in flux form.
    std::vector<double> element_k;

    std::size_t size() const noexcept { return diag.size(); }
};

namespace detail {

// Relative slack for bounds computed in floating point from exact extrema.
inline constexpr double kBoundSlack = 1e-12;

inline void check_bounds(double a, double lam, double x, double mu, const CoefficientModel& c)
{
    if (!(a >= c.alpha * (1.0 - kBoundSlack) && a <= c.beta * (1.0 + kBoundSlack))) {
        std::ostringstream msg;
        msg << "a(" << x << ", " << mu << ") = " << a << " outside [" << c.alpha << ", "
            << c.beta << "]";
        throw BoundViolation(msg.str());
    }
    if (!(lam >= 0.0 && lam <= c.beta * (1.0 + kBoundSlack))) {
        std::ostringstream msg;
        msg << "lambda(" << x << ", " << mu << ") = " << lam << " outside [0, " << c.beta << "]";
        throw BoundViolation(msg.str());
    }
}

}  // namespace detail

/// Load vector of F(v) = ∫ f v.
inline std::vector<double> assemble_load(const UniformMesh1D& mesh,
                                         const std::function<double(double)>& f,
                                         const QuadratureRule& quad)
{
    const std::size_t n = mesh.n_interior();
    const double h = mesh.h();
    std::vector<double> load(n, 0.0);
    const auto pts = quad.points();
    const auto wts = quad.weights();
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double xl = mesh.node(e);
        double left = 0.0;   // ∫ f φ_e over the element
        double right = 0.0;  // ∫ f φ_{e+1}
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double fx = f(xl + h * pts[q]);
            left += wts[q] * fx * (1.0 - pts[q]);
            right += wts[q] * fx * pts[q];
        }
        if (e >= 1)
            load[e - 1] += h * left;
        if (e < n)
            load[e] += h * right;
    }
    return load;
}

/**
 * Galerkin system of ∫ a(x,mu) u'v' + λ(x,mu) u v = ∫ f v on P1 hats.
 *
 * Element integrals use the given Gauss rule. Coefficient samples are
 * checked against the declared bounds when mu lies in the validity range;
 * a non-positive or non-finite a is rejected regardless.
 */
inline TridiagonalSystem assemble_system(const UniformMesh1D& mesh, const CoefficientModel& coeff,
                                         double mu, const QuadratureRule& quad,
                                         const std::function<double(double)>& f)
{
    const std::size_t n = mesh.n_interior();
    const double h = mesh.h();
    const bool check = coeff.in_validity(mu);
    TridiagonalSystem sys;
    sys.sub.assign(n - 1, 0.0);
    sys.diag.assign(n, 0.0);
    sys.super.assign(n - 1, 0.0);
    sys.bounds_checked = check;

    bool diffusion_only = true;
    std::vector<double> element_k(mesh.n_elements());
    const auto pts = quad.points();
    const auto wts = quad.weights();
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double xl = mesh.node(e);
        double stiff = 0.0;  // ∫ a over the reference element
        double m_ll = 0.0;   // ∫ λ φ_L φ_L / h, etc.
        double m_lr = 0.0;
        double m_rr = 0.0;
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double x = xl + h * pts[q];
            const double a = coeff.a(x, mu);
            if (!(std::isfinite(a) && a > 0.0)) {
                std::ostringstream msg;
                msg << "coefficient a(" << x << ", " << mu << ") = " << a << " is not positive";
                throw BoundViolation(msg.str());
            }
            const double lam = coeff.lambda_zero ? 0.0 : coeff.lambda(x, mu);
            if (check)
                detail::check_bounds(a, lam, x, mu, coeff);
            stiff += wts[q] * a;
            if (lam != 0.0) {
                diffusion_only = false;
                const double pl = 1.0 - pts[q];
                const double pr = pts[q];
                m_ll += wts[q] * lam * pl * pl;
                m_lr += wts[q] * lam * pl * pr;
                m_rr += wts[q] * lam * pr * pr;
            }
        }
        const double k = stiff / h;
        element_k[e] = k;
        // Local dofs: e-1 (left node e) and e (right node e+1) in interior numbering.
        if (e >= 1)
            sys.diag[e - 1] += k + h * m_ll;
        if (e < n)
            sys.diag[e] += k + h * m_rr;
        if (e >= 1 && e < n) {
            sys.super[e - 1] += -k + h * m_lr;
            sys.sub[e - 1] += -k + h * m_lr;
        }
    }
    sys.rhs = assemble_load(mesh, f, quad);
    if (diffusion_only)
        sys.element_k = std::move(element_k);
    return sys;
}

/// Thomas elimination without pivoting (the systems are SPD).
inline std::vector<double> solve_tridiagonal(const TridiagonalSystem& sys)
{
    const std::size_t n = sys.size();
    detail::require(n >= 1 && sys.rhs.size() == n && sys.sub.size() + 1 == n
                        && sys.super.size() + 1 == n,
                    "inconsistent tridiagonal system sizes");
    double max_diag = 0.0;
    for (double d : sys.diag)
        max_diag = std::max(max_diag, std::abs(d));
    const double threshold = 1e-14 * max_diag;

    std::vector<double> c(n, 0.0);
    std::vector<double> x(n, 0.0);
    double pivot = sys.diag[0];
    if (!(std::abs(pivot) > threshold))
        throw SingularPivot("near-zero pivot in row 0");
    c[0] = n > 1 ? sys.super[0] / pivot : 0.0;
    x[0] = sys.rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = sys.diag[i] - sys.sub[i - 1] * c[i - 1];
        if (!(std::abs(pivot) > threshold))
            throw SingularPivot("near-zero pivot in row " + std::to_string(i));
        if (i + 1 < n)
            c[i] = sys.super[i] / pivot;
        x[i] = (sys.rhs[i] - sys.sub[i - 1] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] -= c[i] * x[i + 1];
    return x;
}

/// max_i |(A x - b)_i|.
inline double residual_max_norm(const TridiagonalSystem& sys, const std::vector<double>& x)
{
    const std::size_t n = sys.size();
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ax = sys.diag[i] * x[i];
        if (i > 0)
            ax += sys.sub[i - 1] * x[i - 1];
        if (i + 1 < n)
            ax += sys.super[i] * x[i + 1];
        r = std::max(r, std::abs(ax - sys.rhs[i]));
    }
    return r;
}

/**
 * Solve for λ ≡ 0 via element fluxes q_e = k_e (u_{e+1} - u_e).
 *
 * Row i reads q_i - q_{i+1} = b_i, so q_e = q_0 - Σ_{j<e} b_j, and the zero
 * boundary values fix q_0. Slopes come out without the cancellation of
 * differencing nodal values, which keeps ℓ(u) accurate on fine meshes.
 */
inline FeFunction solve_flux_form(const UniformMesh1D& mesh, const TridiagonalSystem& sys)
{
    const std::size_t n = mesh.n_interior();
    detail::require(sys.element_k.size() == n + 1 && sys.rhs.size() == n,
                    "flux form needs element stiffness values");
    const double h = mesh.h();
    std::vector<double> partial(n + 1, 0.0);
    for (std::size_t e = 1; e <= n; ++e)
        partial[e] = partial[e - 1] + sys.rhs[e - 1];
    double num = 0.0;
    double den = 0.0;
    for (std::size_t e = 0; e <= n; ++e) {
        num += partial[e] / sys.element_k[e];
        den += 1.0 / sys.element_k[e];
    }
    const double q0 = num / den;
    std::vector<double> slopes(n + 1);
    std::vector<double> values(n);
    double acc = 0.0;
    for (std::size_t e = 0; e <= n; ++e) {
        const double d = (q0 - partial[e]) / sys.element_k[e];
        slopes[e] = d / h;
        if (e < n) {
            acc += d;
            values[e] = acc;
        }
    }
    return FeFunction(mesh, std::move(values), std::move(slopes));
}

/// Flux form when λ ≡ 0, Thomas elimination otherwise.
inline FeFunction solve_system(const UniformMesh1D& mesh, const TridiagonalSystem& sys)
{
    if (!sys.element_k.empty())
        return solve_flux_form(mesh, sys);
    return FeFunction(mesh, solve_tridiagonal(sys));
}

/// Solution of -u'' = f with homogeneous Dirichlet data.
inline FeFunction solve_poisson(const UniformMesh1D& mesh, const std::function<double(double)>& f,
                                const QuadratureRule& quad = QuadratureRule{})
{
    const auto sys = assemble_system(mesh, constant_coefficient(1.0), 0.0, quad, f);
    return solve_system(mesh, sys);
}

}  // namespace nonlocal
