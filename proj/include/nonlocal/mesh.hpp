#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nonlocal/errors.hpp"

namespace nonlocal {

/**
 * Uniform partition of the unit interval (0,1).
 *
 * Nodes are x_i = i*h for i = 0..n+1 with h = 1/(n+1); only the n interior
 * nodes carry degrees of freedom. Elements are indexed 0..n, element e
 * spanning [x_e, x_{e+1}].
 */
class UniformMesh1D {
public:
    explicit UniformMesh1D(std::size_t n_interior)
        : n_(n_interior)
        , h_(1.0 / static_cast<double>(n_interior + 1))
    {
        detail::require(n_interior >= 1, "mesh needs at least one interior node");
    }

    std::size_t n_interior() const noexcept { return n_; }
    std::size_t n_elements() const noexcept { return n_ + 1; }
    double h() const noexcept { return h_; }

    /// Node coordinate; node 0 is x=0 and node n+1 is x=1.
    double node(std::size_t i) const noexcept
    {
        if (i == n_ + 1)
            return 1.0;
        return static_cast<double>(i) * h_;
    }

    std::vector<double> nodes() const
    {
        std::vector<double> x(n_ + 2);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = node(i);
        return x;
    }

    double element_midpoint(std::size_t e) const noexcept
    {
        return (static_cast<double>(e) + 0.5) * h_;
    }

    friend bool operator==(const UniformMesh1D&, const UniformMesh1D&) = default;

private:
    std::size_t n_;
    double h_;
};

inline UniformMesh1D build_mesh(std::size_t n_interior)
{
    return UniformMesh1D(n_interior);
}

/// Mesh with width h; h must be the reciprocal of an integer >= 2.
inline UniformMesh1D mesh_from_width(double h)
{
    detail::require(h > 0.0 && h <= 0.5, "mesh width must lie in (0, 1/2]");
    const double cells = std::round(1.0 / h);
    detail::require(std::abs(cells * h - 1.0) < 1e-12,
                    "mesh width must divide the unit interval evenly");
    return UniformMesh1D(static_cast<std::size_t>(cells) - 1);
}

/**
 * Gauss-Legendre rule on the reference element [0,1].
 *
 * Weights sum to one; scaling by the element length gives the physical rule.
 */
class QuadratureRule {
public:
    explicit QuadratureRule(int order = 2)
        : order_(order)
    {
        detail::require(order >= 1, "quadrature order must be at least 1");
        build();
    }

    int order() const noexcept { return order_; }
    std::span<const double> points() const noexcept { return points_; }
    std::span<const double> weights() const noexcept { return weights_; }

private:
    void build()
    {
        const int n = order_;
        points_.resize(static_cast<std::size_t>(n));
        weights_.resize(static_cast<std::size_t>(n));
        // Newton iteration on P_n from the Chebyshev-like initial guesses.
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = 0.0;
                for (int k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16)
                    break;
            }
            const double w = 2.0 / ((1.0 - z * z) * dp * dp);
            const auto lo = static_cast<std::size_t>(i);
            const auto hi = static_cast<std::size_t>(n - 1 - i);
            points_[lo] = 0.5 * (1.0 - z);
            points_[hi] = 0.5 * (1.0 + z);
            weights_[lo] = 0.5 * w;
            weights_[hi] = 0.5 * w;
        }
        if (n % 2 == 1)
            points_[static_cast<std::size_t>(n / 2)] = 0.5;
        // Normalise so constants integrate exactly (the order-2 weights become 1/2).
        double sum = 0.0;
        for (double w : weights_)
            sum += w;
        for (double& w : weights_)
            w /= sum;
    }

    int order_;
    std::vector<double> points_;
    std::vector<double> weights_;
};

/// Integrate g over [lo, hi] with the rule mapped onto that interval.
template <class Fn>
double integrate(const QuadratureRule& quad, double lo, double hi, Fn&& g)
{
    const double len = hi - lo;
    double sum = 0.0;
    const auto pts = quad.points();
    const auto wts = quad.weights();
    for (std::size_t q = 0; q < pts.size(); ++q)
        sum += wts[q] * g(lo + len * pts[q]);
    return len * sum;
}

/// Continuous piecewise-linear function with zero boundary trace.
class FeFunction {
public:
    FeFunction(UniformMesh1D mesh, std::vector<double> values)
        : mesh_(mesh)
        , values_(std::move(values))
    {
        detail::require(values_.size() == mesh_.n_interior(),
                        "FeFunction needs one value per interior node");
    }

    /// With element slopes known to full precision; slope() then returns them
    /// instead of differencing nodal values.
    FeFunction(UniformMesh1D mesh, std::vector<double> values, std::vector<double> slopes)
        : FeFunction(mesh, std::move(values))
    {
        detail::require(slopes.size() == mesh_.n_elements(),
                        "FeFunction needs one slope per element");
        slopes_ = std::move(slopes);
    }

    static FeFunction zero(UniformMesh1D mesh)
    {
        return FeFunction(mesh, std::vector<double>(mesh.n_interior(), 0.0));
    }

    /// Nodal interpolant of g (boundary values of g are ignored).
    template <class Fn>
    static FeFunction interpolate(UniformMesh1D mesh, Fn&& g)
    {
        std::vector<double> v(mesh.n_interior());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = g(mesh.node(i + 1));
        return FeFunction(mesh, std::move(v));
    }

    const UniformMesh1D& mesh() const noexcept { return mesh_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Value at node i in 0..n+1, including the zero boundary nodes.
    double nodal(std::size_t i) const noexcept
    {
        if (i == 0 || i == mesh_.n_interior() + 1)
            return 0.0;
        return values_[i - 1];
    }

    /// Slope on element e.
    double slope(std::size_t e) const noexcept
    {
        if (!slopes_.empty())
            return slopes_[e];
        return (nodal(e + 1) - nodal(e)) / mesh_.h();
    }

    FeFunction scaled(double c) const
    {
        FeFunction out(*this);
        for (double& x : out.values_)
            x *= c;
        for (double& x : out.slopes_)
            x *= c;
        return out;
    }

private:
    UniformMesh1D mesh_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

namespace detail {

inline std::size_t element_of(const UniformMesh1D& mesh, double x)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw PreconditionError("evaluation point " + std::to_string(x) + " outside [0,1]");
    const auto last = mesh.n_elements() - 1;
    const auto e = static_cast<std::size_t>(std::floor(x / mesh.h()));
    return e > last ? last : e;
}

}  // namespace detail

inline double eval_fe(const FeFunction& u, double x)
{
    const auto& mesh = u.mesh();
    const std::size_t e = detail::element_of(mesh, x);
    const double xl = mesh.node(e);
    const double t = (x - xl) / mesh.h();
    return (1.0 - t) * u.nodal(e) + t * u.nodal(e + 1);
}

/// Element slope at x. At an interior node the element to the right is used;
/// at x = 1 the last element.
inline double eval_fe_derivative(const FeFunction& u, double x)
{
    return u.slope(detail::element_of(u.mesh(), x));
}

/// (∫|u'|²)^{1/2}, exact for piecewise-linear u.
inline double energy_norm(const FeFunction& u)
{
    double s = 0.0;
    for (std::size_t e = 0; e < u.mesh().n_elements(); ++e) {
        const double d = u.slope(e);
        s += d * d;
    }
    return std::sqrt(s * u.mesh().h());
}

/// (∫|g' - u'|²)^{1/2} by per-element quadrature.
template <class Fn>
double energy_error(Fn&& exact_derivative, const FeFunction& u, const QuadratureRule& quad)
{
    const auto& mesh = u.mesh();
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double slope = u.slope(e);
        s += integrate(quad, mesh.node(e), mesh.node(e + 1), [&](double x) {
            const double d = exact_derivative(x) - slope;
            return d * d;
        });
    }
    return std::sqrt(s);
}

enum class DerivativeSampling {
    Midpoint,   ///< element midpoints
    Endpoints,  ///< both ends of every element
};

/**
 * Discrete maximum norm of the derivative mismatch.
 *
 * Midpoint sampling is blind to the O(h) slope error of P1 interpolants of
 * quadratics; the endpoint variant sees it.
 */
template <class Fn>
double max_derivative_error(Fn&& exact_derivative, const FeFunction& u,
                            DerivativeSampling sampling = DerivativeSampling::Midpoint)
{
    const auto& mesh = u.mesh();
    double err = 0.0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double slope = u.slope(e);
        if (sampling == DerivativeSampling::Midpoint) {
            err = std::max(err, std::abs(exact_derivative(mesh.element_midpoint(e)) - slope));
        } else {
            err = std::max(err, std::abs(exact_derivative(mesh.node(e)) - slope));
            err = std::max(err, std::abs(exact_derivative(mesh.node(e + 1)) - slope));
        }
    }
    return err;
}

}  // namespace nonlocal
