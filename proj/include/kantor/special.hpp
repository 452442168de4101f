#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "kantor/errors.hpp"

namespace kantor {

inline double normal_pdf(double x) {
    if (std::isinf(x)) return 0.0;
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Standard normal CDF via erfc; relative accuracy near machine precision in both tails.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace detail {

// Acklam's rational approximation to the normal quantile (relative error ~1.15e-9).
inline double acklam_quantile(double t) {
    static constexpr std::array a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                  1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                  6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr std::array c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                  -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                  3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (t < p_low) {
        const double q = std::sqrt(-2.0 * std::log(t));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (t > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-t));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = t - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

// Phi^{-1}(t): rational initial guess refined by one Halley step against erfc.
// The residual is formed on the smaller tail so that 1 - t never loses digits.
inline double normal_quantile(double t) {
    if (!(t > 0.0 && t < 1.0))
        throw DomainError("normal_quantile: t must lie in (0,1), got " + std::to_string(t));
    if (t == 0.5) return 0.0;
    double x = detail::acklam_quantile(t);
    const double e = t < 0.5 ? normal_cdf(x) - t : (1.0 - t) - normal_sf(x);
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

}  // namespace kantor
