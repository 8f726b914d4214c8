#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "nonlocal/errors.hpp"

namespace nonlocal {

/**
 * Constants entering the uniqueness and smallness conditions.
 *
 * The Lipschitz constants are supplied by the caller; nothing here derives
 * them. C_ell, C_A and C_lambda are understood as already evaluated at the
 * radii R_F and D_F, see radius_R() and radius_D().
 */
struct DiagnosticConstants {
    double alpha = 1.0;
    double beta = 1.0;
    double F_dual_norm = 0.0;
    double C_ell = 0.0;
    double C_A = 0.0;
    double C_lambda = 0.0;
    /// Poincaré-Friedrichs constant of (0,1).
    double C_P = 1.0 / std::numbers::pi;
    double gamma = 0.0;
    /// |ℓ(0)|, zero for every shipped functional.
    double ell_at_zero = 0.0;
    /// Homogeneity degree for the simplified-path variant.
    std::optional<double> p_hom;

    void validate() const
    {
        detail::require(alpha > 0.0, "alpha must be positive");
        detail::require(beta >= 0.0 && F_dual_norm >= 0.0 && C_ell >= 0.0 && C_A >= 0.0
                            && C_lambda >= 0.0 && C_P >= 0.0 && gamma >= 0.0
                            && ell_at_zero >= 0.0,
                        "diagnostic constants must be nonnegative");
    }

    /// R_F = ‖F‖_*/α.
    double radius_R() const { return F_dual_norm / alpha; }
    /// D_F = R_F C_ℓ(R_F) + |ℓ(0)|.
    double radius_D() const { return radius_R() * C_ell + ell_at_zero; }
};

struct DiagnosticResult {
    double value = 0.0;
    bool satisfied = false;
};

/// γ‖F‖_*/α² < 1.
inline DiagnosticResult uniqueness_diagnostic(const DiagnosticConstants& d)
{
    d.validate();
    const double ratio = d.gamma * d.F_dual_norm / (d.alpha * d.alpha);
    return {ratio, ratio < 1.0};
}

struct SmallnessResult {
    DiagnosticResult general;
    /// ‖F‖_* p β^{p-1}/α^{2p} C_ℓ C_A <= 1/2, present when p_hom is set.
    std::optional<DiagnosticResult> simplified;
};

/// 2 C_ℓ max(C_A, C_λ)(1 + C_P²)/α² · ‖F‖_* <= 1, plus the homogeneous variant.
inline SmallnessResult smallness_diagnostic(const DiagnosticConstants& d)
{
    d.validate();
    SmallnessResult out;
    const double c_al = std::max(d.C_A, d.C_lambda);
    const double value =
        2.0 * d.C_ell * c_al * (1.0 + d.C_P * d.C_P) / (d.alpha * d.alpha) * d.F_dual_norm;
    out.general = {value, value <= 1.0};
    if (d.p_hom) {
        const double p = *d.p_hom;
        detail::require(p > 0.0, "homogeneity degree must be positive");
        const double v = d.F_dual_norm * p * std::pow(d.beta, p - 1.0)
                         / std::pow(d.alpha, 2.0 * p) * d.C_ell * d.C_A;
        out.simplified = DiagnosticResult{v, v <= 0.5};
    }
    return out;
}

}  // namespace nonlocal
