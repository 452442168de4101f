#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kantor/errors.hpp"
#include "kantor/metric.hpp"

namespace kantor {

enum class CostKind { power, exp_minus_one, tv_indicator, table };

struct CostFlags {
    bool nondecreasing = true;
    bool zero_at_zero = true;
    bool convex = false;
    bool continuous = true;
};

// A cost profile y -> C(y) on [0, inf), so that c(x, y) = C(d(x, y)).
// Immutable; copies share the interpolation table of custom costs.
class CostFunction {
public:
    // C(y) = y^p, doubling with lambda = 2^p.
    static CostFunction power(double p) {
        if (!(p >= 1.0) || !std::isfinite(p))
            throw DomainError("power cost requires p >= 1, got " + std::to_string(p));
        CostFunction c(CostKind::power, "power:" + format_number(p));
        c.exponent_ = p;
        c.flags_.convex = true;
        c.lambda_ = std::pow(2.0, p);
        c.growth_ = p;
        return c;
    }

    // C(y) = e^y - 1. Convex, grows faster than any power, no doubling constant.
    static CostFunction exp_minus_one() {
        CostFunction c(CostKind::exp_minus_one, "exp");
        c.flags_.convex = true;
        return c;
    }

    // C(0) = 0, C(y) = 2 for y > 0, so that T_c is the total variation norm.
    // Lower semicontinuous only; the convergence diagnostics refuse it.
    static CostFunction tv_indicator() {
        CostFunction c(CostKind::tv_indicator, "tv");
        c.flags_.continuous = false;
        return c;
    }

    // Piecewise-linear interpolation of (y, C(y)) knots starting at (0, 0); the
    // last slope is extended past the final knot.
    static CostFunction table(std::vector<std::pair<double, double>> knots, std::string name = "table") {
        if (knots.empty() || knots.front().first != 0.0 || knots.front().second != 0.0)
            throw ValidationError("cost table must start at (0, 0)");
        for (std::size_t i = 1; i < knots.size(); ++i) {
            const auto [y0, c0] = knots[i - 1];
            const auto [y1, c1] = knots[i];
            if (!std::isfinite(y1) || !std::isfinite(c1))
                throw ValidationError("cost table has a non-finite knot at row " + std::to_string(i));
            if (!(y1 > y0)) throw ValidationError("cost table abscissae must be strictly increasing");
            if (c1 < c0)
                throw ValidationError("cost table is not non-decreasing between y=" + format_number(y0) +
                                      " and y=" + format_number(y1));
        }
        CostFunction c(CostKind::table, std::move(name));
        bool convex = true;
        for (std::size_t i = 2; i < knots.size(); ++i) {
            const double s0 = (knots[i - 1].second - knots[i - 2].second) / (knots[i - 1].first - knots[i - 2].first);
            const double s1 = (knots[i].second - knots[i - 1].second) / (knots[i].first - knots[i - 1].first);
            if (s1 < s0 * (1.0 - 1e-12)) convex = false;
        }
        c.flags_.convex = convex;
        c.table_ = std::make_shared<const std::vector<std::pair<double, double>>>(std::move(knots));
        return c;
    }

    double operator()(double y) const {
        switch (kind_) {
            case CostKind::power:
                if (exponent_ == 1.0) return y;
                if (exponent_ == 2.0) return y * y;
                return std::pow(y, exponent_);
            case CostKind::exp_minus_one: return std::expm1(y);
            case CostKind::tv_indicator: return y > 0.0 ? 2.0 : 0.0;
            case CostKind::table: return interpolate(y);
        }
        return 0.0;
    }

    // log C(y); -inf where C(y) = 0. Finite even where C(y) itself overflows.
    double log_value(double y) const {
        switch (kind_) {
            case CostKind::power: return y > 0.0 ? exponent_ * std::log(y) : -INFINITY;
            case CostKind::exp_minus_one:
                if (!(y > 0.0)) return -INFINITY;
                return y < 1.0 ? std::log(std::expm1(y)) : y + std::log1p(-std::exp(-y));
            case CostKind::tv_indicator: return y > 0.0 ? std::log(2.0) : -INFINITY;
            case CostKind::table: {
                const double v = interpolate(y);
                return v > 0.0 ? std::log(v) : -INFINITY;
            }
        }
        return -INFINITY;
    }

    CostKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const CostFlags& flags() const { return flags_; }
    std::optional<double> doubling_lambda() const { return lambda_; }
    std::optional<double> growth_order() const { return growth_; }
    // Exponent p of a power cost; 0 otherwise.
    double exponent() const { return exponent_; }
    bool is_power() const { return kind_ == CostKind::power; }

private:
    CostFunction(CostKind k, std::string name) : kind_(k), name_(std::move(name)) {}

    static std::string format_number(double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    }

    double interpolate(double y) const {
        const auto& t = *table_;
        if (t.size() == 1 || y <= 0.0) return 0.0;
        auto it = std::upper_bound(t.begin(), t.end(), y, [](double v, const auto& k) { return v < k.first; });
        std::size_t hi = it == t.end() ? t.size() - 1 : static_cast<std::size_t>(it - t.begin());
        const auto [y0, c0] = t[hi - 1];
        const auto [y1, c1] = t[hi];
        return c0 + (c1 - c0) * (y - y0) / (y1 - y0);
    }

    CostKind kind_;
    std::string name_;
    CostFlags flags_;
    std::optional<double> lambda_;
    std::optional<double> growth_;
    double exponent_ = 0.0;
    std::shared_ptr<const std::vector<std::pair<double, double>>> table_;
};

// Two-column CSV "y,C(y)". Blank lines and lines starting with '#' are skipped,
// as is a header row whose first field is not numeric.
inline CostFunction read_cost_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open cost table '" + path + "'");
    std::vector<std::pair<double, double>> knots;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected two comma-separated columns");
        try {
            const double y = std::stod(line.substr(0, comma));
            const double c = std::stod(line.substr(comma + 1));
            knots.emplace_back(y, c);
        } catch (const std::invalid_argument&) {
            if (knots.empty() && lineno == 1) continue;  // header
            throw ValidationError(path + ":" + std::to_string(lineno) + ": not a number");
        }
    }
    return CostFunction::table(std::move(knots), "table:" + path);
}

// Parses the CLI cost grammar: "power:<p>", "exp", "tv", "table:<csv path>".
inline CostFunction parse_cost(std::string_view spec) {
    if (spec == "exp") return CostFunction::exp_minus_one();
    if (spec == "tv") return CostFunction::tv_indicator();
    if (spec.starts_with("power:")) {
        const auto arg = spec.substr(6);
        double p = 0.0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), p);
        if (ec != std::errc{} || ptr != arg.data() + arg.size())
            throw ValidationError("bad power exponent in cost spec '" + std::string(spec) + "'");
        try {
            return CostFunction::power(p);
        } catch (const DomainError& e) {
            throw ValidationError(e.what());
        }
    }
    if (spec.starts_with("table:")) return read_cost_table(std::string(spec.substr(6)));
    throw ValidationError("unknown cost spec '" + std::string(spec) + "' (expected power:<p>, exp, tv, table:<path>)");
}

// ---------------------------------------------------------------------------
// Structural checks

// Log-spaced 1e-6..1e6 (1000 points) plus any caller-supplied points.
inline std::vector<double> default_doubling_grid(const std::vector<double>& extra = {}) {
    constexpr int n = 1000;
    std::vector<double> g;
    g.reserve(n + extra.size());
    for (int i = 0; i < n; ++i) g.push_back(std::pow(10.0, -6.0 + 12.0 * i / (n - 1)));
    g.insert(g.end(), extra.begin(), extra.end());
    return g;
}

struct DoublingReport {
    bool holds = true;
    double worst_ratio = 0.0;  // max C(2y)/C(y); +inf once C overflows
    double worst_log_ratio = -INFINITY;
    double witness = 0.0;      // argmax
    std::size_t checked = 0;   // grid points with C(y) > 0
};

// C(2y) <= lambda C(y) on every grid point with C(y) > 0. Ratios are formed directly
// when both values are finite, and in log space once C overflows.
inline DoublingReport check_doubling(const CostFunction& cost, double lambda, const std::vector<double>& grid) {
    if (grid.empty()) throw ValidationError("check_doubling: empty grid");
    DoublingReport r;
    const double log_lambda = std::log(lambda);
    for (double y : grid) {
        if (!(y > 0.0)) throw ValidationError("check_doubling: grid values must be positive");
        const double cy = cost(y);
        if (!(cy > 0.0)) continue;
        const double c2y = cost(2.0 * y);
        ++r.checked;
        double ratio, log_ratio;
        if (std::isfinite(cy) && std::isfinite(c2y)) {
            ratio = c2y / cy;
            log_ratio = std::log(ratio);
        } else {
            log_ratio = cost.log_value(2.0 * y) - cost.log_value(y);
            ratio = std::exp(log_ratio);
        }
        if (log_ratio > r.worst_log_ratio || (r.checked == 1)) {
            r.worst_log_ratio = log_ratio;
            r.worst_ratio = ratio;
            r.witness = y;
        }
        const bool ok = std::isfinite(ratio) ? ratio <= lambda * (1.0 + 4e-16) : log_ratio <= log_lambda;
        if (!ok) r.holds = false;
    }
    return r;
}

template <class Point>
struct TripleViolation {
    Point x, y, a;
    double lhs = 0.0, rhs = 0.0;
};

template <class Point>
struct InequalityReport {
    std::size_t checked = 0;
    std::vector<TripleViolation<Point>> violations;
    bool holds() const { return violations.empty(); }
};

namespace detail {
inline bool le_with_slack(double lhs, double rhs) {
    if (std::isnan(lhs) || std::isnan(rhs)) return false;
    if (std::isinf(rhs) && rhs > 0) return true;
    return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}
}  // namespace detail

// C(d(x,y)) <= C(2 d(x,a)) + C(2 d(y,a)) on every triple.
template <class Point, class Metric>
InequalityReport<Point> check_split_inequality(const CostFunction& cost, const Metric& d,
                                               const std::vector<std::array<Point, 3>>& triples) {
    InequalityReport<Point> r;
    for (const auto& [x, y, a] : triples) {
        const double lhs = cost(d(x, y));
        const double rhs = cost(2.0 * d(x, a)) + cost(2.0 * d(y, a));
        ++r.checked;
        if (!detail::le_with_slack(lhs, rhs)) r.violations.push_back({x, y, a, lhs, rhs});
    }
    return r;
}

// C(d(x,a)) <= lambda C(d(x,y)) + lambda C(d(y,a)), the consequence of doubling
// combined with the split inequality.
template <class Point, class Metric>
InequalityReport<Point> check_reverse_split(const CostFunction& cost, const Metric& d,
                                            const std::vector<std::array<Point, 3>>& triples) {
    const auto lambda = cost.doubling_lambda();
    if (!lambda) throw PreconditionError("check_reverse_split: cost '" + cost.name() + "' has no doubling constant");
    InequalityReport<Point> r;
    for (const auto& [x, y, a] : triples) {
        const double lhs = cost(d(x, a));
        const double rhs = *lambda * cost(d(x, y)) + *lambda * cost(d(y, a));
        ++r.checked;
        if (!detail::le_with_slack(lhs, rhs)) r.violations.push_back({x, y, a, lhs, rhs});
    }
    return r;
}

struct PairViolation {
    double u = 0.0, v = 0.0, excess = 0.0;
};

// Midpoint convexity C((u+v)/2) <= (C(u)+C(v))/2 on the given pairs.
inline std::vector<PairViolation> check_midpoint_convexity(const CostFunction& cost,
                                                           const std::vector<std::pair<double, double>>& pairs) {
    std::vector<PairViolation> out;
    for (const auto& [u, v] : pairs) {
        const double lhs = cost(0.5 * (u + v));
        const double rhs = 0.5 * (cost(u) + cost(v));
        if (!detail::le_with_slack(lhs, rhs)) out.push_back({u, v, lhs - rhs});
    }
    return out;
}

// First grid index where C decreases, or grid.size() when monotone. grid must be sorted.
inline std::size_t find_monotonicity_break(const CostFunction& cost, const std::vector<double>& grid) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (cost(grid[i]) < cost(grid[i - 1])) return i;
    return grid.size();
}

}  // namespace kantor
