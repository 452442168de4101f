#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "kantor/costs.hpp"
#include "kantor/errors.hpp"
#include "kantor/metric.hpp"
#include "kantor/numeric.hpp"
#include "kantor/special.hpp"

namespace kantor {

// Weights must sum to one within this tolerance.
inline constexpr double weight_tolerance = 1e-12;

namespace detail {

// Validates positive finite weights summing to one within weight_tolerance.
// Sums that differ from one only by accumulated rounding (n ulps) are kept
// as-is so that a written measure re-reads bit-identically; larger deviations
// inside the tolerance are renormalised.
inline void check_and_normalize_weights(std::vector<double>& w, const char* what) {
    if (w.empty()) throw ValidationError(std::string(what) + ": no weights");
    CompensatedSum s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i]))
            throw ValidationError(std::string(what) + ": weight " + std::to_string(i) + " is not positive");
        s += w[i];
    }
    const double total = s.value();
    const double dev = std::abs(total - 1.0);
    if (dev > weight_tolerance) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": weights sum to " << total << ", not 1";
        throw ValidationError(os.str());
    }
    if (dev > static_cast<double>(w.size()) * std::numeric_limits<double>::epsilon())
        for (double& x : w) x /= total;
}

}  // namespace detail

// A finitely supported probability measure. Point is double for measures on the
// line and std::size_t (an index into a MetricSpaceFinite) for finite spaces.
template <class Point>
class DiscreteMeasure {
public:
    DiscreteMeasure(std::vector<Point> support, std::vector<double> weights)
        : support_(std::move(support)), weights_(std::move(weights)) {
        if (support_.size() != weights_.size())
            throw ValidationError("measure: " + std::to_string(support_.size()) + " support points but " +
                                  std::to_string(weights_.size()) + " weights");
        detail::check_and_normalize_weights(weights_, "measure");
        if constexpr (std::is_floating_point_v<Point>)
            for (Point p : support_)
                if (!std::isfinite(p)) throw ValidationError("measure: non-finite support point");
        std::vector<Point> sorted = support_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ValidationError("measure: support points must be distinct");
    }

    static DiscreteMeasure dirac(Point p) { return DiscreteMeasure({p}, {1.0}); }

    std::size_t size() const { return support_.size(); }
    std::span<const Point> support() const { return support_; }
    std::span<const double> weights() const { return weights_; }
    const Point& point(std::size_t i) const { return support_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

private:
    std::vector<Point> support_;
    std::vector<double> weights_;
};

using LineMeasure = DiscreteMeasure<double>;
using SpaceMeasure = DiscreteMeasure<std::size_t>;

enum class QuantileConvention {
    inf,        // inf{x : F(x) >= t}
    paper_sup,  // sup{x : F(x) <= t}
};

// Piecewise-constant quantile map: on (levels[i], levels[i+1]] the value is values[i].
// levels runs from 0 to 1 exactly. A Gaussian quantile is flagged instead.
struct QuantileFunction {
    std::vector<double> levels;
    std::vector<double> values;
    bool gaussian = false;

    double operator()(double t) const {
        if (gaussian) return normal_quantile(t);
        auto it = std::lower_bound(levels.begin() + 1, levels.end(), t);
        if (it == levels.end()) --it;
        return values[static_cast<std::size_t>(it - levels.begin()) - 1];
    }
};

// A law on the real line seen through its CDF and quantile function.
class Distribution1D {
public:
    enum class Kind { atoms, empirical, standard_gaussian };

    // values strictly increasing, weights positive with unit sum.
    static Distribution1D atoms(std::vector<double> values, std::vector<double> weights, double base = 0.0) {
        if (values.size() != weights.size())
            throw ValidationError("atoms: " + std::to_string(values.size()) + " values but " +
                                  std::to_string(weights.size()) + " weights");
        detail::check_and_normalize_weights(weights, "atoms");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i])) throw ValidationError("atoms: non-finite value");
            if (i > 0 && !(values[i] > values[i - 1]))
                throw ValidationError("atoms: values must be strictly increasing");
        }
        Distribution1D d(Kind::atoms, base);
        d.values_ = std::move(values);
        d.weights_ = std::move(weights);
        d.build_cumulative();
        return d;
    }

    // Uniform weight on each sample; the samples are sorted on construction.
    static Distribution1D empirical(std::vector<double> samples, double base = 0.0) {
        if (samples.empty()) throw ValidationError("empirical: at least one sample required");
        for (double s : samples)
            if (!std::isfinite(s)) throw ValidationError("empirical: non-finite sample");
        std::sort(samples.begin(), samples.end());
        Distribution1D d(Kind::empirical, base);
        const std::size_t n = samples.size();
        d.values_ = std::move(samples);
        d.weights_.assign(n, 1.0 / static_cast<double>(n));
        d.cumulative_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            d.cumulative_[i] = static_cast<double>(i + 1) / static_cast<double>(n);
        return d;
    }

    static Distribution1D standard_gaussian(double base = 0.0) { return Distribution1D(Kind::standard_gaussian, base); }

    static Distribution1D from_measure(const LineMeasure& m, double base = 0.0) {
        std::vector<std::size_t> order(m.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return m.point(a) < m.point(b); });
        std::vector<double> v, w;
        for (auto i : order) {
            v.push_back(m.point(i));
            w.push_back(m.weight(i));
        }
        return atoms(std::move(v), std::move(w), base);
    }

    Kind kind() const { return kind_; }
    double base() const { return base_; }
    bool is_gaussian() const { return kind_ == Kind::standard_gaussian; }
    bool finite_support() const { return !is_gaussian(); }

    // Sorted support values (samples for the empirical kind, possibly repeated).
    std::span<const double> values() const { return values_; }
    std::span<const double> weights() const { return weights_; }
    // cumulative()[i] = F(values()[i]) for atoms; (i+1)/n for samples. Last entry is exactly 1.
    std::span<const double> cumulative() const { return cumulative_; }

    double cdf(double x) const {
        if (is_gaussian()) return normal_cdf(x);
        const auto it = std::upper_bound(values_.begin(), values_.end(), x);
        if (it == values_.begin()) return 0.0;
        return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
    }

    // Left limit F(x-).
    double cdf_left(double x) const {
        if (is_gaussian()) return normal_cdf(x);
        const auto it = std::lower_bound(values_.begin(), values_.end(), x);
        if (it == values_.begin()) return 0.0;
        return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
    }

    double quantile(double t, QuantileConvention conv = QuantileConvention::inf) const {
        if (!(t > 0.0 && t < 1.0))
            throw DomainError("quantile: t must lie in (0,1), got " + std::to_string(t));
        if (is_gaussian()) return normal_quantile(t);
        auto it = conv == QuantileConvention::inf ? std::lower_bound(cumulative_.begin(), cumulative_.end(), t)
                                                  : std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
        if (it == cumulative_.end()) --it;
        return values_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

    // Breakpoint form with repeated sample values merged.
    QuantileFunction quantile_function() const {
        QuantileFunction q;
        if (is_gaussian()) {
            q.gaussian = true;
            q.levels = {0.0, 1.0};
            return q;
        }
        q.levels.push_back(0.0);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (i + 1 < values_.size() && values_[i + 1] == values_[i]) continue;
            q.levels.push_back(cumulative_[i]);
            q.values.push_back(values_[i]);
        }
        return q;
    }

    // Law of a*X for a > 0.
    Distribution1D dilated(double a) const {
        if (!(a > 0.0)) throw DomainError("dilated: factor must be positive");
        if (is_gaussian()) throw PreconditionError("dilated: only the standard Gaussian is representable");
        Distribution1D d = *this;
        for (double& v : d.values_) v *= a;
        d.base_ *= a;
        return d;
    }

    // Finite-support law as a measure with distinct atoms. Atom weights are passed
    // through unchanged; repeated samples get weight count / n.
    LineMeasure to_measure() const {
        if (is_gaussian()) throw PreconditionError("to_measure: Gaussian law has no finite support");
        if (kind_ == Kind::atoms) return LineMeasure(values_, weights_);
        std::vector<double> v, w;
        const double n = static_cast<double>(values_.size());
        for (std::size_t i = 0; i < values_.size();) {
            std::size_t j = i;
            while (j < values_.size() && values_[j] == values_[i]) ++j;
            v.push_back(values_[i]);
            w.push_back(static_cast<double>(j - i) / n);
            i = j;
        }
        return LineMeasure(std::move(v), std::move(w));
    }

private:
    Distribution1D(Kind k, double base) : kind_(k), base_(base) {}

    void build_cumulative() {
        cumulative_.resize(weights_.size());
        CompensatedSum s;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            s += weights_[i];
            cumulative_[i] = std::min(1.0, s.value());
        }
        cumulative_.back() = 1.0;
    }

    Kind kind_;
    double base_ = 0.0;
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

inline double cdf(const Distribution1D& F, double x) { return F.cdf(x); }

inline double quantile(const Distribution1D& F, double t, QuantileConvention conv = QuantileConvention::inf) {
    return F.quantile(t, conv);
}

// ---------------------------------------------------------------------------
// Moment integrals  int C(scale * d(x, a)) dmu(x)

namespace detail {

template <class Point>
std::string describe_point(const Point& p) {
    std::ostringstream os;
    os.precision(17);
    os << p;
    return os.str();
}

// C(y) * phi(x), formed in log space when either factor leaves the normal range so
// that the far tails neither read inf * 0 nor lose a huge cost against a tiny density.
inline double cost_times_density(const CostFunction& C, double y, double x) {
    const double c = C(y);
    if (c == 0.0) return 0.0;
    const double dens = normal_pdf(x);
    if (std::isfinite(c) && dens > 1e-300) return c * dens;
    return std::exp(C.log_value(y) - 0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi));
}

// int_lo^hi C(|x - z|) phi(z) dz over panels whose edges include the Gaussian bulk
// and the kink at x, so that adaptive refinement cannot step over either. The
// range is clipped to |z| <= 80, past which C * phi underflows to 0 for every
// cost value below the divergence guard.
inline QuadratureResult integrate_cost_against_normal(const CostFunction& C, double x, double lo, double hi,
                                                      double scale = 1.0, double rel_tol = 1e-12) {
    constexpr double reach = 80.0;
    lo = std::max(lo, -reach);
    hi = std::min(hi, reach);
    if (!(hi > lo)) return {};
    std::vector<double> edges{lo, hi};
    for (double e : {-38.0, -20.0, -10.0, -6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0, 10.0, 20.0, 38.0})
        edges.push_back(e);
    for (double e : {x - 4.0, x - 1.0, x, x + 1.0, x + 4.0}) edges.push_back(e);
    std::erase_if(edges, [&](double e) { return !(e >= lo && e <= hi); });
    std::sort(edges.begin(), edges.end());
    // Panels narrower than 1e-9 contribute nothing measurable; an edge that close to
    // its left neighbour is dropped (hi replaces its neighbour instead).
    auto close = [](double a, double b) { return b - a <= 1e-9 * std::max(1.0, std::abs(b)); };
    std::vector<double> kept{edges.front()};
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!close(kept.back(), edges[i])) {
            kept.push_back(edges[i]);
        } else if (i + 1 == edges.size() && kept.size() > 1) {
            kept.back() = edges[i];
        }
    }
    if (kept.back() != hi) kept.push_back(hi);
    edges = std::move(kept);
    // Values in the subnormal range stall the error estimate and cannot move a total above it.
    auto f = [&](double z) {
        const double v = cost_times_density(C, scale * std::abs(x - z), z);
        return v < 1e-280 ? 0.0 : v;
    };
    QuadratureResult total;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const auto r = integrate(f, edges[i], edges[i + 1], rel_tol);
        if (!std::isfinite(r.value)) return {infinity, infinity};
        total.value += r.value;
        total.error += r.error;
    }
    total.value = apply_divergence_guard(total.value);
    return total;
}

inline double checked_cost(const CostFunction& C, double y, const std::string& where) {
    const double v = C(y);
    if (std::isnan(v) || v < 0.0)
        throw EvaluationError("cost '" + C.name() + "' is not a finite non-negative number at support point " + where);
    return v;
}

}  // namespace detail

template <class Point, class Metric>
double moment_integral(const DiscreteMeasure<Point>& mu, const CostFunction& C, const Point& a, double scale,
                       const Metric& d) {
    if (!(scale >= 0.0)) throw DomainError("moment_integral: scale must be >= 0");
    CompensatedSum s;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double v = detail::checked_cost(C, scale * d(mu.point(i), a), detail::describe_point(mu.point(i)));
        if (std::isinf(v)) return infinity;
        s += mu.weight(i) * v;
    }
    return apply_divergence_guard(s.value());
}

inline double moment_integral(const LineMeasure& mu, const CostFunction& C, double a, double scale) {
    return moment_integral(mu, C, a, scale, LineMetric{});
}

// Gaussian case as a quadrature with an error estimate. The integral is taken in
// x-space against the normal density, which is the t-integral after substituting
// t = Phi(x) and keeps the endpoint singularity of Phi^{-1} out of the integrand.
// A non-finite integrand anywhere yields the +inf sentinel.
inline QuadratureResult gaussian_moment(const CostFunction& C, double a, double scale) {
    if (!(scale >= 0.0)) throw DomainError("moment_integral: scale must be >= 0");
    if (scale == 0.0) return {C(0.0), 0.0};
    return detail::integrate_cost_against_normal(C, a, -infinity, infinity, scale);
}

inline double moment_integral(const Distribution1D& F, const CostFunction& C, double a, double scale) {
    if (!(scale >= 0.0)) throw DomainError("moment_integral: scale must be >= 0");
    if (F.is_gaussian()) return gaussian_moment(C, a, scale).value;
    const auto v = F.values();
    const auto w = F.weights();
    CompensatedSum s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = detail::checked_cost(C, scale * std::abs(v[i] - a), detail::describe_point(v[i]));
        if (std::isinf(c)) return infinity;
        s += w[i] * c;
    }
    return apply_divergence_guard(s.value());
}

// Natural log of the moment integral, evaluated term-wise in log space so that
// overflowing single-atom terms such as (e^{1024} - 1)/n stay representable.
inline double log_moment_integral(const LineMeasure& mu, const CostFunction& C, double a, double scale) {
    std::vector<double> logs;
    logs.reserve(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double l = C.log_value(scale * std::abs(mu.point(i) - a));
        if (std::isnan(l))
            throw EvaluationError("cost '" + C.name() + "' has no logarithm at " + detail::describe_point(mu.point(i)));
        if (l > -infinity) logs.push_back(std::log(mu.weight(i)) + l);
    }
    if (logs.empty()) return -infinity;
    const double mx = *std::max_element(logs.begin(), logs.end());
    CompensatedSum s;
    for (double l : logs) s += std::exp(l - mx);
    return mx + std::log(s.value());
}

// ---------------------------------------------------------------------------
// Distances between CDFs

// sup_x |F(x) - G(x)|. Both one-sided limits are compared at every atom of
// either law, which is exact for step functions and for a step function against
// the continuous Gaussian CDF.
inline double kolmogorov_distance(const Distribution1D& F, const Distribution1D& G) {
    if (F.is_gaussian() && G.is_gaussian()) return 0.0;
    double best = 0.0;
    auto probe = [&](double x) {
        best = std::max(best, std::abs(F.cdf(x) - G.cdf(x)));
        best = std::max(best, std::abs(F.cdf_left(x) - G.cdf_left(x)));
    };
    for (double x : F.values()) probe(x);
    for (double x : G.values()) probe(x);
    return std::min(best, 1.0);
}

namespace detail {

// sup_x [G(x) - F(x + eps)]: attained at an atom of G, or approached from the
// left at a shifted atom of F.
inline double levy_excess(const Distribution1D& F, const Distribution1D& G, double eps) {
    double worst = 0.0;
    for (double g : G.values()) worst = std::max(worst, G.cdf(g) - F.cdf(g + eps));
    for (double f : F.values()) worst = std::max(worst, G.cdf_left(f - eps) - F.cdf_left(f));
    return worst;
}

}  // namespace detail

// Levy distance inf{eps : F(x-eps)-eps <= G(x) <= F(x+eps)+eps for all x}, found by
// bisection to 1e-15. Unlike the Kolmogorov distance it metrizes weak convergence,
// so delta_{1/n} -> delta_0 reads 1/n.
inline double levy_distance(const Distribution1D& F, const Distribution1D& G) {
    if (F.is_gaussian() && G.is_gaussian()) return 0.0;
    auto ok = [&](double eps) {
        return detail::levy_excess(F, G, eps) <= eps && detail::levy_excess(G, F, eps) <= eps;
    };
    double lo = 0.0, hi = 1.0;
    if (ok(0.0)) return 0.0;
    while (hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace kantor
