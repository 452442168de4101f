#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kantor/costs.hpp"
#include "kantor/errors.hpp"
#include "kantor/measures.hpp"
#include "kantor/numeric.hpp"
#include "kantor/ot_exact.hpp"
#include "kantor/ot_lp.hpp"

// Numerical diagnostics for T_c-convergence: a sequence mu_n -> mu is checked for
// (a) weak convergence through a computable proxy, (b) convergence of the moments
// int C(2 d(x,a)) dmu_n, and T_c(mu_n, mu) -> 0. All verdicts are recomputed from
// the per-n records and the declared thresholds.

namespace kantor {

struct Thresholds {
    double a = 1e-2;   // weak proxy at the largest n
    double b = 1e-2;   // |moment_n - moment| at the largest n
    double tc = 1e-2;  // T_c at the largest n
    double monotone_fraction = 0.8;
};

// Levy on the line metrizes weak convergence; Kolmogorov is stricter and stays at 1
// for delta_{1/n} -> delta_0. On finite spaces TV dominates both.
enum class WeakProxy { levy, kolmogorov, total_variation };

inline const char* to_string(WeakProxy p) {
    switch (p) {
        case WeakProxy::levy: return "levy";
        case WeakProxy::kolmogorov: return "kolmogorov";
        case WeakProxy::total_variation: return "total_variation";
    }
    return "?";
}

enum class TcMethod {
    automatic,  // quantile formula for convex costs on the line, LP otherwise
    lp,
    quantile,
};

template <class Law>
struct MeasureSequence {
    std::function<Law(std::size_t)> generator;
    Law limit;
    std::vector<std::size_t> ns;
};

using LineSequence = MeasureSequence<Distribution1D>;
using SpaceSequence = MeasureSequence<SpaceMeasure>;

struct DiagnosticRecord {
    std::size_t n = 0;
    double weak = 0.0;
    double kolmogorov = std::numeric_limits<double>::quiet_NaN();  // line sequences only
    double moment = 0.0;                                            // int C(2 d(x,a)) dmu_n
    double tc = 0.0;
};

struct Verdicts {
    bool cond_a = false;
    bool cond_b = false;
    bool tc_to_zero = false;
    bool violation = false;
};

struct DiagnosticReport {
    std::string check;  // "theorem2_forward" or "theorem2_converse"
    WeakProxy proxy = WeakProxy::levy;
    std::vector<DiagnosticRecord> per_n;
    double moment_limit = 0.0;
    Verdicts verdicts;
    Thresholds thresholds;
    std::optional<double> grid_step;
};

// Last value below threshold and at least `fraction` of consecutive steps non-increasing.
inline bool trend_to_zero(const std::vector<double>& v, double threshold, double fraction) {
    if (v.empty() || !std::isfinite(v.back()) || !(v.back() < threshold)) return false;
    if (v.size() < 2) return true;
    std::size_t down = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] <= v[i - 1] * (1.0 + 1e-12) + 1e-15) ++down;
    return static_cast<double>(down) >= fraction * static_cast<double>(v.size() - 1);
}

// Verdicts as a pure function of the records; `converse` selects which implication
// the violation flag tests.
inline Verdicts compute_verdicts(const std::vector<DiagnosticRecord>& per_n, double moment_limit, const Thresholds& th,
                                 bool converse) {
    Verdicts v;
    if (per_n.empty()) return v;
    std::vector<double> weak, tc;
    for (const auto& r : per_n) {
        weak.push_back(r.weak);
        tc.push_back(r.tc);
    }
    v.cond_a = trend_to_zero(weak, th.a, th.monotone_fraction);
    const double last = per_n.back().moment;
    v.cond_b = std::isfinite(last) && std::isfinite(moment_limit) && std::abs(last - moment_limit) < th.b;
    v.tc_to_zero = trend_to_zero(tc, th.tc, th.monotone_fraction);
    v.violation = converse ? (v.tc_to_zero && !v.cond_a) : (v.cond_a && v.cond_b && !v.tc_to_zero);
    return v;
}

namespace detail {

inline void require_continuous(const CostFunction& C, const char* op) {
    if (!C.flags().continuous)
        throw PreconditionError(std::string(op) + ": cost '" + C.name() +
                                "' is not continuous; the convergence criterion needs a continuous C");
    if (!C.flags().zero_at_zero || !C.flags().nondecreasing)
        throw PreconditionError(std::string(op) + ": cost '" + C.name() + "' must be non-decreasing with C(0) = 0");
}

inline void require_index_set(const std::vector<std::size_t>& ns) {
    if (ns.empty()) throw ValidationError("measure sequence: empty index set");
    for (std::size_t i = 1; i < ns.size(); ++i)
        if (ns[i] <= ns[i - 1]) throw ValidationError("measure sequence: index set must be strictly increasing");
}

inline double line_tc(const Distribution1D& F, const Distribution1D& G, const CostFunction& C, TcMethod method) {
    const bool convex = C.flags().convex && C.flags().zero_at_zero;
    if (method == TcMethod::quantile || (method == TcMethod::automatic && convex))
        return transport_cost_convex(F, G, C);
    if (!F.finite_support() || !G.finite_support())
        throw PreconditionError("T_c against a Gaussian needs a convex cost (quantile formula)");
    const auto mu = F.to_measure();
    const auto nu = G.to_measure();
    const auto r = solve_kantorovich(mu, nu, make_cost_matrix(mu, nu, C));
    if (r.status != SolveStatus::optimal) throw NumericalError("T_c: " + r.message);
    return r.cost;
}

inline DiagnosticRecord line_record(std::size_t n, const Distribution1D& Fn, const Distribution1D& F,
                                    const CostFunction& C, double a, WeakProxy proxy, TcMethod method) {
    DiagnosticRecord r;
    r.n = n;
    r.kolmogorov = kolmogorov_distance(Fn, F);
    r.weak = proxy == WeakProxy::kolmogorov ? r.kolmogorov : levy_distance(Fn, F);
    r.moment = moment_integral(Fn, C, a, 2.0);
    r.tc = line_tc(Fn, F, C, method);
    return r;
}

inline DiagnosticRecord space_record(std::size_t n, const SpaceMeasure& mn, const SpaceMeasure& m,
                                     const MetricSpaceFinite& space, const CostFunction& C, std::size_t a) {
    auto d = [&space](std::size_t i, std::size_t j) { return space(i, j); };
    for (std::size_t p : mn.support())
        if (p >= space.size()) throw ValidationError("measure sequence: support index outside the space");
    DiagnosticRecord r;
    r.n = n;
    r.weak = total_variation(mn, m);
    r.moment = moment_integral(mn, C, a, 2.0, d);
    const auto sol = solve_kantorovich(mn, m, C, d);
    if (sol.status != SolveStatus::optimal) throw NumericalError("T_c: " + sol.message);
    r.tc = sol.cost;
    return r;
}

inline DiagnosticReport line_report(const LineSequence& seq, const CostFunction& C, double a, const Thresholds& th,
                                    WeakProxy proxy, TcMethod method, bool converse, const char* op) {
    require_continuous(C, op);
    require_index_set(seq.ns);
    if (proxy == WeakProxy::total_variation)
        throw PreconditionError(std::string(op) + ": the TV proxy is for finite spaces");
    DiagnosticReport rep;
    rep.check = op;
    rep.proxy = proxy;
    rep.thresholds = th;
    for (std::size_t n : seq.ns) rep.per_n.push_back(line_record(n, seq.generator(n), seq.limit, C, a, proxy, method));
    rep.moment_limit = moment_integral(seq.limit, C, a, 2.0);
    rep.verdicts = compute_verdicts(rep.per_n, rep.moment_limit, th, converse);
    return rep;
}

inline DiagnosticReport space_report(const SpaceSequence& seq, const MetricSpaceFinite& space, const CostFunction& C,
                                     std::size_t a, const Thresholds& th, bool converse, const char* op) {
    require_continuous(C, op);
    require_index_set(seq.ns);
    if (a >= space.size()) throw ValidationError(std::string(op) + ": reference point outside the space");
    DiagnosticReport rep;
    rep.check = op;
    rep.proxy = WeakProxy::total_variation;
    rep.thresholds = th;
    for (std::size_t n : seq.ns) rep.per_n.push_back(space_record(n, seq.generator(n), seq.limit, space, C, a));
    auto d = [&space](std::size_t i, std::size_t j) { return space(i, j); };
    rep.moment_limit = moment_integral(seq.limit, C, a, 2.0, d);
    rep.verdicts = compute_verdicts(rep.per_n, rep.moment_limit, th, converse);
    return rep;
}

}  // namespace detail

// (a) and (b) should imply T_c(mu_n, mu) -> 0; VIOLATION flags a run where they hold and it does not.
inline DiagnosticReport theorem2_forward(const LineSequence& seq, const CostFunction& C, double a,
                                         const Thresholds& th = {}, WeakProxy proxy = WeakProxy::levy,
                                         TcMethod method = TcMethod::automatic) {
    return detail::line_report(seq, C, a, th, proxy, method, false, "theorem2_forward");
}

inline DiagnosticReport theorem2_forward(const SpaceSequence& seq, const MetricSpaceFinite& space,
                                         const CostFunction& C, std::size_t a, const Thresholds& th = {}) {
    return detail::space_report(seq, space, C, a, th, false, "theorem2_forward");
}

// T_c(mu_n, mu) -> 0 should imply the weak proxy -> 0; VIOLATION flags the opposite.
inline DiagnosticReport theorem2_converse(const LineSequence& seq, const CostFunction& C, const Thresholds& th = {},
                                          WeakProxy proxy = WeakProxy::levy, TcMethod method = TcMethod::automatic) {
    return detail::line_report(seq, C, 0.0, th, proxy, method, true, "theorem2_converse");
}

inline DiagnosticReport theorem2_converse(const SpaceSequence& seq, const MetricSpaceFinite& space,
                                          const CostFunction& C, const Thresholds& th = {}) {
    return detail::space_report(seq, space, C, 0, th, true, "theorem2_converse");
}

// ---------------------------------------------------------------------------
// Moments at scale 1 and scale 2 under the doubling condition

struct EquivalenceRecord {
    std::size_t n = 0;
    double moment_scale1 = 0.0;
    double moment_scale2 = 0.0;
    bool finite_agree = true;
};

struct EquivalenceReport {
    std::vector<EquivalenceRecord> per_n;
    double limit_scale1 = 0.0, limit_scale2 = 0.0;
    double lambda = 0.0;
    double threshold_scale2 = 0.0;  // thresholds.b
    double threshold_scale1 = 0.0;  // thresholds.b / lambda
    bool converges_scale1 = false;
    bool converges_scale2 = false;
    bool finiteness_agree = true;
    bool agree() const { return finiteness_agree && converges_scale1 == converges_scale2; }
};

namespace detail {

inline void finish_equivalence(EquivalenceReport& rep) {
    rep.finiteness_agree = std::isfinite(rep.limit_scale1) == std::isfinite(rep.limit_scale2);
    for (const auto& r : rep.per_n) rep.finiteness_agree = rep.finiteness_agree && r.finite_agree;
    if (rep.per_n.empty()) return;
    const auto& last = rep.per_n.back();
    auto close = [](double x, double lim, double thr) {
        return std::isfinite(x) && std::isfinite(lim) && std::abs(x - lim) < thr;
    };
    rep.converges_scale1 = close(last.moment_scale1, rep.limit_scale1, rep.threshold_scale1);
    rep.converges_scale2 = close(last.moment_scale2, rep.limit_scale2, rep.threshold_scale2);
}

inline double require_lambda(const CostFunction& C) {
    const auto lambda = C.doubling_lambda();
    if (!lambda)
        throw PreconditionError("corollary1_equivalence: cost '" + C.name() + "' has no doubling constant");
    return *lambda;
}

}  // namespace detail

// The scale-2 moment is compared against thresholds.b and the scale-1 moment
// against thresholds.b / lambda, the tolerance that C(2y) <= lambda C(y) transfers.
inline EquivalenceReport corollary1_equivalence(const LineSequence& seq, const CostFunction& C, double a,
                                                const Thresholds& th = {}) {
    EquivalenceReport rep;
    rep.lambda = detail::require_lambda(C);
    detail::require_index_set(seq.ns);
    rep.threshold_scale2 = th.b;
    rep.threshold_scale1 = th.b / rep.lambda;
    for (std::size_t n : seq.ns) {
        const auto Fn = seq.generator(n);
        EquivalenceRecord r;
        r.n = n;
        r.moment_scale1 = moment_integral(Fn, C, a, 1.0);
        r.moment_scale2 = moment_integral(Fn, C, a, 2.0);
        r.finite_agree = std::isfinite(r.moment_scale1) == std::isfinite(r.moment_scale2);
        rep.per_n.push_back(r);
    }
    rep.limit_scale1 = moment_integral(seq.limit, C, a, 1.0);
    rep.limit_scale2 = moment_integral(seq.limit, C, a, 2.0);
    detail::finish_equivalence(rep);
    return rep;
}

inline EquivalenceReport corollary1_equivalence(const SpaceSequence& seq, const MetricSpaceFinite& space,
                                                const CostFunction& C, std::size_t a, const Thresholds& th = {}) {
    EquivalenceReport rep;
    rep.lambda = detail::require_lambda(C);
    detail::require_index_set(seq.ns);
    rep.threshold_scale2 = th.b;
    rep.threshold_scale1 = th.b / rep.lambda;
    auto d = [&space](std::size_t i, std::size_t j) { return space(i, j); };
    for (std::size_t n : seq.ns) {
        const auto mn = seq.generator(n);
        EquivalenceRecord r;
        r.n = n;
        r.moment_scale1 = moment_integral(mn, C, a, 1.0, d);
        r.moment_scale2 = moment_integral(mn, C, a, 2.0, d);
        r.finite_agree = std::isfinite(r.moment_scale1) == std::isfinite(r.moment_scale2);
        rep.per_n.push_back(r);
    }
    rep.limit_scale1 = moment_integral(seq.limit, C, a, 1.0, d);
    rep.limit_scale2 = moment_integral(seq.limit, C, a, 2.0, d);
    detail::finish_equivalence(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// Uniform law with an escaping atom: mu_n = ((n-1)/n) U(0,1) + (1/n) delta_{x_n},
// mu = U(0,1), both discretized on the midpoints of a grid of step 1/k.

struct XnRule {
    enum class Kind { pow2, constant } kind = Kind::pow2;
    double c = 0.0;

    static XnRule pow2() { return {Kind::pow2, 0.0}; }
    static XnRule constant(double c) { return {Kind::constant, c}; }

    double operator()(std::size_t n) const {
        if (kind == Kind::constant) return c;
        if (n > 1023) throw ValidationError("x_n = 2^n is not representable for n = " + std::to_string(n));
        return std::ldexp(1.0, static_cast<int>(n));
    }
    std::string name() const;
};

inline std::string XnRule::name() const {
    if (kind == Kind::pow2) return "pow2";
    std::ostringstream os;
    os.precision(17);
    os << "const:" << c;
    return os.str();
}

// Uniform(0,1) on k midpoints (2i - 1)/(2k), each of weight 1/k.
inline std::vector<double> unit_grid(std::size_t k) {
    if (k == 0) throw ValidationError("grid needs at least one cell");
    std::vector<double> g(k);
    for (std::size_t i = 0; i < k; ++i) g[i] = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(k));
    return g;
}

// k with k * grid_step = 1.
inline std::size_t grid_cells(double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ValidationError("grid step must lie in (0, 1]");
    const double k = std::round(1.0 / grid_step);
    if (std::abs(k * grid_step - 1.0) > 1e-9)
        throw ValidationError("grid step must divide 1 evenly (use 1/k)");
    return static_cast<std::size_t>(k);
}

struct ExactAtom {
    double x;
    Rational w;
};

// The discretized mu_n with exact weights: (n-1)/(nk) on each midpoint and 1/n at x_n.
inline std::vector<ExactAtom> example1_exact(std::size_t n, const XnRule& rule, std::size_t k) {
    if (n < 2) throw ValidationError("example1: n must be >= 2");
    const double xn = rule(n);
    if (xn > 0.0 && xn < 1.0) throw ValidationError("example1: x_n must lie outside (0, 1)");
    const auto nn = static_cast<std::int64_t>(n), kk = static_cast<std::int64_t>(k);
    std::vector<ExactAtom> atoms;
    const Rational cell(nn - 1, nn * kk);
    for (double x : unit_grid(k)) atoms.push_back({x, cell});
    atoms.push_back({xn, Rational(1, nn)});
    std::sort(atoms.begin(), atoms.end(), [](const ExactAtom& p, const ExactAtom& q) { return p.x < q.x; });
    return atoms;
}

inline std::vector<ExactAtom> example1_limit_exact(std::size_t k) {
    std::vector<ExactAtom> atoms;
    for (double x : unit_grid(k)) atoms.push_back({x, Rational(1, static_cast<std::int64_t>(k))});
    return atoms;
}

inline LineMeasure to_measure(const std::vector<ExactAtom>& atoms) {
    Rational total;
    std::vector<double> x, w;
    for (const auto& a : atoms) {
        total += a.w;
        x.push_back(a.x);
        w.push_back(a.w.to_double());
    }
    if (!(total == Rational(1))) throw NumericalError("exact weights do not sum to 1");
    return LineMeasure(std::move(x), std::move(w));
}

inline LineMeasure example1_measure(std::size_t n, const XnRule& rule, double grid_step) {
    return to_measure(example1_exact(n, rule, grid_cells(grid_step)));
}

inline LineMeasure example1_limit(double grid_step) { return to_measure(example1_limit_exact(grid_cells(grid_step))); }

// ||mu_n - mu||_TV = 2/n.
inline double example1_tv(std::size_t n) {
    if (n < 1) throw DomainError("example1_tv: n must be >= 1");
    return 2.0 / static_cast<double>(n);
}

// Exact TV of two atom lists over the union of supports.
inline Rational total_variation_exact(const std::vector<ExactAtom>& p, const std::vector<ExactAtom>& q) {
    std::map<double, std::pair<Rational, Rational>> merged;
    for (const auto& a : p) merged[a.x].first += a.w;
    for (const auto& a : q) merged[a.x].second += a.w;
    Rational tv;
    for (const auto& [x, w] : merged) tv += abs(w.first - w.second);
    return tv;
}

inline Rational example1_tv_discretized(std::size_t n, const XnRule& rule, std::size_t k) {
    return total_variation_exact(example1_exact(n, rule, k), example1_limit_exact(k));
}

// Distance from x_n to the unit interval; all uniform mass sits inside it, so
// T_c(mu_n, mu) >= C(gap) / n for non-decreasing C.
inline double example1_gap(double xn) { return xn >= 1.0 ? xn - 1.0 : (xn <= 0.0 ? -xn : 0.0); }

inline double example1_tc_lower_bound(std::size_t n, const XnRule& rule, const CostFunction& C) {
    return C(example1_gap(rule(n))) / static_cast<double>(n);
}

inline LineSequence example1_sequence(const XnRule& rule, double grid_step, std::vector<std::size_t> ns) {
    return {[rule, grid_step](std::size_t n) {
                return Distribution1D::from_measure(example1_measure(n, rule, grid_step));
            },
            Distribution1D::from_measure(example1_limit(grid_step)), std::move(ns)};
}

enum class MomentVerdict { diverges, converges, inconclusive };

inline const char* to_string(MomentVerdict v) {
    switch (v) {
        case MomentVerdict::diverges: return "DIVERGES";
        case MomentVerdict::converges: return "CONVERGES";
        case MomentVerdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

struct DivergenceRecord {
    std::size_t n = 0;
    double moment = 0.0;      // +inf once it overflows
    double log_moment = 0.0;  // natural log, finite past overflow
};

struct MomentDivergenceReport {
    std::vector<DivergenceRecord> per_n;
    MomentVerdict verdict = MomentVerdict::inconclusive;
    double bound = 1e12;
    double threshold = 1e-2;
};

// int C(|x|) dmu_n on the discretized measures. DIVERGES when the last moment
// exceeds `bound` after mostly non-decreasing growth; CONVERGES when the last two
// moments differ by less than `threshold`.
inline MomentDivergenceReport example1_moment_divergence(const std::vector<std::size_t>& ns, const CostFunction& C,
                                                         const XnRule& rule, double grid_step, double bound = 1e12,
                                                         double threshold = 1e-2, double monotone_fraction = 0.8) {
    detail::require_index_set(ns);
    MomentDivergenceReport rep;
    rep.bound = bound;
    rep.threshold = threshold;
    for (std::size_t n : ns) {
        const auto mu = example1_measure(n, rule, grid_step);
        DivergenceRecord r;
        r.n = n;
        r.log_moment = log_moment_integral(mu, C, 0.0, 1.0);
        r.moment = apply_divergence_guard(std::exp(r.log_moment));
        rep.per_n.push_back(r);
    }
    const auto& last = rep.per_n.back();
    std::size_t up = 0;
    for (std::size_t i = 1; i < rep.per_n.size(); ++i)
        if (rep.per_n[i].log_moment >= rep.per_n[i - 1].log_moment) ++up;
    const bool growing = rep.per_n.size() < 2 ||
                         static_cast<double>(up) >= monotone_fraction * static_cast<double>(rep.per_n.size() - 1);
    if (last.log_moment > std::log(bound) && growing) {
        rep.verdict = MomentVerdict::diverges;
    } else if (rep.per_n.size() >= 2 && std::isfinite(last.moment) &&
               std::abs(last.moment - rep.per_n[rep.per_n.size() - 2].moment) < threshold) {
        rep.verdict = MomentVerdict::converges;
    }
    return rep;
}

}  // namespace kantor
