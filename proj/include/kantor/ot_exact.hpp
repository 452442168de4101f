#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "kantor/costs.hpp"
#include "kantor/errors.hpp"
#include "kantor/measures.hpp"
#include "kantor/numeric.hpp"
#include "kantor/special.hpp"

// Closed-form transport on the real line: the quantile (monotone) coupling and the
// integral  T_c(F, G) = int_0^1 C(|F^{-1}(t) - G^{-1}(t)|) dt  for convex C.

namespace kantor {

struct CouplingSegment {
    double t_lo = 0.0, t_hi = 0.0;
    double x = 0.0, y = 0.0;
    double mass() const { return t_hi - t_lo; }
};

// Pushforward of Lebesgue measure on (0,1) under t -> (F^{-1}(t), G^{-1}(t)).
struct MonotoneCoupling1D {
    std::vector<CouplingSegment> segments;

    double cost(const CostFunction& C) const {
        CompensatedSum s;
        for (const auto& seg : segments) s += seg.mass() * C(std::abs(seg.x - seg.y));
        return apply_divergence_guard(s.value());
    }
};

inline double gaussian_quantile(double t) { return normal_quantile(t); }

// Merges the two breakpoint sets. Level sets that agree to within 1e-15 are
// treated as one breakpoint so that rounding in cumulative sums does not create
// sliver segments.
inline MonotoneCoupling1D monotone_coupling(const Distribution1D& F, const Distribution1D& G) {
    if (!F.finite_support() || !G.finite_support())
        throw PreconditionError("monotone_coupling: both laws must have finite support");
    const auto qf = F.quantile_function();
    const auto qg = G.quantile_function();
    MonotoneCoupling1D out;
    std::size_t i = 0, j = 0;
    double t = 0.0;
    const std::size_t nf = qf.values.size(), ng = qg.values.size();
    while (i < nf && j < ng) {
        const double ef = qf.levels[i + 1];
        const double eg = qg.levels[j + 1];
        double next;
        bool adv_f = false, adv_g = false;
        if (std::abs(ef - eg) <= 1e-15) {
            next = std::max(ef, eg);
            adv_f = adv_g = true;
        } else if (ef < eg) {
            next = ef;
            adv_f = true;
        } else {
            next = eg;
            adv_g = true;
        }
        if (i + 1 == nf && j + 1 == ng) {
            next = 1.0;
            adv_f = adv_g = true;
        }
        if (next > t) out.segments.push_back({t, next, qf.values[i], qg.values[j]});
        t = next;
        if (adv_f) ++i;
        if (adv_g) ++j;
    }
    return out;
}

enum class DistanceMode {
    total_cost,   // T_c
    wasserstein,  // T_{d^p}^{1/p}; requires a power cost
};

namespace detail {

// int_{z_lo}^{z_hi} C(|x - z|) phi(z) dz where [z_lo, z_hi] = Phi^{-1}([t_lo, t_hi]).
// Closed forms for p = 1, 2; panelled Gauss-Kronrod otherwise.
inline double gaussian_segment_cost(const CostFunction& C, double x, double t_lo, double t_hi) {
    const double z_lo = t_lo <= 0.0 ? -infinity : normal_quantile(t_lo);
    const double z_hi = t_hi >= 1.0 ? infinity : normal_quantile(t_hi);
    const double dt = t_hi - t_lo;
    auto zphi = [](double z) { return std::isinf(z) ? 0.0 : z * normal_pdf(z); };
    if (C.is_power() && C.exponent() == 2.0) {
        const double first = normal_pdf(z_lo) - normal_pdf(z_hi);   // int z phi
        const double second = dt - (zphi(z_hi) - zphi(z_lo));         // int z^2 phi
        return std::max(0.0, x * x * dt - 2.0 * x * first + second);
    }
    if (C.is_power() && C.exponent() == 1.0) {
        const double c = std::clamp(x, z_lo, z_hi);
        const double tc = c == z_lo ? t_lo : (c == z_hi ? t_hi : normal_cdf(c));
        const double below = x * (tc - t_lo) - (normal_pdf(z_lo) - normal_pdf(c));
        const double above = (normal_pdf(c) - normal_pdf(z_hi)) - x * (t_hi - tc);
        return std::max(0.0, below + above);
    }
    return integrate_cost_against_normal(C, x, z_lo, z_hi, 1.0, 1e-11).value;
}

inline void require_convex(const CostFunction& C, const char* op) {
    if (!C.flags().convex || !C.flags().zero_at_zero)
        throw PreconditionError(std::string(op) + ": cost '" + C.name() +
                                "' is not convex with C(0) = 0; the quantile formula does not apply");
}

}  // namespace detail

// T_c(F, gamma) for the standard Gaussian gamma, integrated segment by segment over
// F's quantile breakpoints. The Gaussian side is handled in z-space with the
// exact normal weight, so the tails (0, eps) and (1 - eps, 1) need no truncation.
inline double distance_to_gaussian(const Distribution1D& F, const CostFunction& C,
                                   DistanceMode mode = DistanceMode::total_cost) {
    detail::require_convex(C, "distance_to_gaussian");
    if (mode == DistanceMode::wasserstein && !C.is_power())
        throw PreconditionError("distance_to_gaussian: wasserstein mode needs a power cost");
    if (F.is_gaussian()) return 0.0;
    const auto q = F.quantile_function();
    CompensatedSum s;
    for (std::size_t i = 0; i < q.values.size(); ++i) {
        const double v = detail::gaussian_segment_cost(C, q.values[i], q.levels[i], q.levels[i + 1]);
        if (!std::isfinite(v)) return infinity;
        s += v;
    }
    const double tc = apply_divergence_guard(s.value());
    if (mode == DistanceMode::wasserstein && std::isfinite(tc)) return std::pow(tc, 1.0 / C.exponent());
    return tc;
}

// Major's formula T_c(F, G) = int_0^1 C(|F^{-1} - G^{-1}|) dt, valid for convex C.
inline double transport_cost_convex(const Distribution1D& F, const Distribution1D& G, const CostFunction& C) {
    detail::require_convex(C, "transport_cost_convex");
    if (F.is_gaussian() && G.is_gaussian()) return 0.0;
    if (G.is_gaussian()) return distance_to_gaussian(F, C);
    if (F.is_gaussian()) return distance_to_gaussian(G, C);
    return monotone_coupling(F, G).cost(C);
}

// W_p(F, G) = (int_0^1 |F^{-1} - G^{-1}|^p dt)^{1/p}; +inf when the p-th moment diverges.
inline double wasserstein_p(const Distribution1D& F, const Distribution1D& G, double p) {
    if (!(p >= 1.0)) throw DomainError("wasserstein_p: p must be >= 1, got " + std::to_string(p));
    const double tc = transport_cost_convex(F, G, CostFunction::power(p));
    return std::isfinite(tc) ? std::pow(tc, 1.0 / p) : infinity;
}

}  // namespace kantor
