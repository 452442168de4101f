#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kantor/costs.hpp"
#include "kantor/errors.hpp"
#include "kantor/measures.hpp"
#include "kantor/numeric.hpp"
#include "kantor/ot_exact.hpp"
#include "kantor/random.hpp"
#include "kantor/special.hpp"

namespace kantor {

// ---------------------------------------------------------------------------
// Sequence models

// iid laws are centered; ar1 is the stationary Gaussian AR(1)
// X_t = phi X_{t-1} + sqrt(1 - phi^2) sigma eps_t with X_0 ~ N(0, sigma^2).
class SequenceModel {
public:
    enum class Kind { rademacher, uniform, gaussian, ar1 };

    static SequenceModel rademacher(double scale = 1.0) {
        if (!(scale > 0.0 && std::isfinite(scale))) throw DomainError("rademacher: scale must be positive");
        SequenceModel m(Kind::rademacher);
        m.scale_ = scale;
        return m;
    }
    // U(a, b) shifted to mean zero.
    static SequenceModel uniform(double a, double b) {
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw DomainError("uniform: need finite a < b");
        SequenceModel m(Kind::uniform);
        m.a_ = a;
        m.b_ = b;
        m.scale_ = (b - a) / 2.0;
        return m;
    }
    static SequenceModel gaussian(double sigma = 1.0) {
        if (!(sigma > 0.0 && std::isfinite(sigma))) throw DomainError("gaussian: sigma must be positive");
        SequenceModel m(Kind::gaussian);
        m.scale_ = sigma;
        return m;
    }
    static SequenceModel ar1(double phi, double sigma = 1.0) {
        if (!(phi > 0.0 && phi < 1.0)) throw DomainError("ar1: phi must lie in (0, 1), got " + std::to_string(phi));
        if (!(sigma > 0.0 && std::isfinite(sigma))) throw DomainError("ar1: sigma must be positive");
        SequenceModel m(Kind::ar1);
        m.phi_ = phi;
        m.scale_ = sigma;
        return m;
    }

    Kind kind() const { return kind_; }
    bool iid() const { return kind_ != Kind::ar1; }
    double scale() const { return scale_; }
    double phi() const { return phi_; }

    // Independent sequences are trivially associated and mixing; ar1 with phi > 0
    // has positive covariances and a geometric alpha-mixing envelope.
    bool associated() const { return true; }
    bool mixing() const { return true; }

    double variance() const {
        switch (kind_) {
            case Kind::rademacher: return scale_ * scale_;
            case Kind::uniform: return scale_ * scale_ / 3.0;
            default: return scale_ * scale_;
        }
    }
    double sigma() const { return std::sqrt(variance()); }

    // E|X_1|^p of the stationary marginal.
    double abs_moment(double p) const {
        if (!(p >= 0.0)) throw DomainError("abs_moment: p must be >= 0");
        switch (kind_) {
            case Kind::rademacher: return std::pow(scale_, p);
            case Kind::uniform: return std::pow(scale_, p) / (p + 1.0);
            default:
                return std::pow(scale_, p) * std::exp(0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (p + 1.0))) /
                       std::sqrt(std::numbers::pi);
        }
    }

    // X_1..X_n of one path drawn from `s`.
    void fill_path(Stream& s, std::span<double> out) const {
        switch (kind_) {
            case Kind::rademacher:
                for (double& x : out) x = scale_ * s.rademacher();
                break;
            case Kind::uniform:
                for (double& x : out) x = scale_ * (2.0 * s.uniform() - 1.0);
                break;
            case Kind::gaussian:
                for (double& x : out) x = scale_ * s.normal();
                break;
            case Kind::ar1: {
                const double innov = std::sqrt(1.0 - phi_ * phi_) * scale_;
                double x = scale_ * s.normal();
                for (std::size_t t = 0; t < out.size(); ++t) {
                    if (t > 0) x = phi_ * x + innov * s.normal();
                    out[t] = x;
                }
                break;
            }
        }
    }

    // S_n of one path; draws exactly what fill_path draws.
    double path_sum(Stream& s, std::size_t n) const {
        CompensatedSum sum;
        switch (kind_) {
            case Kind::rademacher:
                for (std::size_t t = 0; t < n; ++t) sum += scale_ * s.rademacher();
                break;
            case Kind::uniform:
                for (std::size_t t = 0; t < n; ++t) sum += scale_ * (2.0 * s.uniform() - 1.0);
                break;
            case Kind::gaussian:
                for (std::size_t t = 0; t < n; ++t) sum += scale_ * s.normal();
                break;
            case Kind::ar1: {
                const double innov = std::sqrt(1.0 - phi_ * phi_) * scale_;
                double x = scale_ * s.normal();
                sum += x;
                for (std::size_t t = 1; t < n; ++t) {
                    x = phi_ * x + innov * s.normal();
                    sum += x;
                }
                break;
            }
        }
        return sum.value();
    }

    std::string name() const {
        auto num = [](double v) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        };
        switch (kind_) {
            case Kind::rademacher: return "iid:rademacher:" + num(scale_);
            case Kind::uniform: return "iid:uniform:" + num(a_) + ":" + num(b_);
            case Kind::gaussian: return "iid:gaussian:" + num(scale_);
            case Kind::ar1: return "ar1:" + num(phi_) + ":" + num(scale_);
        }
        return "?";
    }

private:
    explicit SequenceModel(Kind k) : kind_(k) {}
    Kind kind_;
    double scale_ = 1.0;
    double a_ = -1.0, b_ = 1.0;
    double phi_ = 0.0;
};

// Parses iid:rademacher[:scale], iid:uniform:a:b, iid:gaussian[:sigma], ar1:phi[:sigma].
inline SequenceModel parse_model(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = spec.find(':', start);
        parts.push_back(spec.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    auto num = [&](std::size_t i) {
        try {
            std::size_t used = 0;
            const double v = std::stod(parts.at(i), &used);
            if (used != parts[i].size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ValidationError("bad number in model spec '" + spec + "'");
        }
    };
    try {
        if (parts[0] == "iid" && parts.size() >= 2) {
            if (parts[1] == "rademacher" && parts.size() <= 3) return SequenceModel::rademacher(parts.size() == 3 ? num(2) : 1.0);
            if (parts[1] == "gaussian" && parts.size() <= 3) return SequenceModel::gaussian(parts.size() == 3 ? num(2) : 1.0);
            if (parts[1] == "uniform" && parts.size() == 4) return SequenceModel::uniform(num(2), num(3));
        }
        if (parts[0] == "ar1" && (parts.size() == 2 || parts.size() == 3))
            return SequenceModel::ar1(num(1), parts.size() == 3 ? num(2) : 1.0);
    } catch (const DomainError& e) {
        throw ValidationError(std::string("model spec '") + spec + "': " + e.what());
    }
    throw ValidationError("unknown model spec '" + spec +
                          "' (expected iid:rademacher[:s], iid:uniform:a:b, iid:gaussian[:s], ar1:phi[:s])");
}

// sigma_n = sqrt(Var S_n); for ar1 the exact finite-n covariance sum
// n + 2 sum_{j<n} (n-j) phi^j = n + 2 phi (n (1-phi) - (1-phi^n)) / (1-phi)^2.
inline double sigma_n(const SequenceModel& model, std::size_t n) {
    const double nn = static_cast<double>(n);
    if (model.iid()) return model.sigma() * std::sqrt(nn);
    const double phi = model.phi();
    const double q = 1.0 - phi;
    const double cross = phi * (nn * q + std::expm1(nn * std::log(phi))) / (q * q);
    return model.sigma() * std::sqrt(nn + 2.0 * cross);
}

// ---------------------------------------------------------------------------
// Sampling

inline constexpr std::size_t min_replications = 1000;

struct ExperimentConfig {
    SequenceModel model = SequenceModel::rademacher();
    std::vector<std::size_t> ns;
    std::size_t m = 100000;
    CostFunction cost = CostFunction::power(2);
    DistanceMode mode = DistanceMode::wasserstein;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const {
        if (ns.empty()) throw ValidationError("experiment: empty n list");
        for (std::size_t n : ns)
            if (n == 0) throw ValidationError("experiment: n must be >= 1");
        if (m < min_replications)
            throw ValidationError("experiment: m = " + std::to_string(m) + " replications; at least " +
                                  std::to_string(min_replications) + " are required");
        if (threads == 0) throw ValidationError("experiment: threads must be >= 1");
    }
};

// Stream tags.
inline constexpr std::uint64_t model_tag = 0;
inline constexpr std::uint64_t floor_tag = 1;

namespace detail {

// out[r] = f(r) for r < count, split into contiguous blocks across threads.
template <class F>
void parallel_fill(std::vector<double>& out, std::size_t count, unsigned threads, F f) {
    out.assign(count, 0.0);
    const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t r = 0; r < count; ++r) out[r] = f(r);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t block = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * block, hi = std::min(count, lo + block);
        pool.emplace_back([&out, &f, lo, hi] {
            for (std::size_t r = lo; r < hi; ++r) out[r] = f(r);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

// Raw partial sums S_n, one per replication.
inline std::vector<double> sample_sums(const ExperimentConfig& cfg, std::size_t n) {
    std::vector<double> out;
    detail::parallel_fill(out, cfg.m, cfg.threads, [&](std::size_t r) {
        Stream s(cfg.seed, n, r, model_tag);
        return cfg.model.path_sum(s, n);
    });
    return out;
}

struct NormalizedSums {
    std::size_t n = 0;
    double sigma_n = 0.0;
    std::vector<double> y;  // S_n / sigma_n
};

inline std::vector<NormalizedSums> sample_normalized_sums(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<NormalizedSums> out;
    for (std::size_t n : cfg.ns) {
        NormalizedSums s;
        s.n = n;
        s.sigma_n = sigma_n(cfg.model, n);
        s.y = sample_sums(cfg, n);
        for (double& v : s.y) v /= s.sigma_n;
        out.push_back(std::move(s));
    }
    return out;
}

// m exact N(0, 1) draws on the floor stream of index n.
inline std::vector<double> sample_floor(const ExperimentConfig& cfg, std::size_t n) {
    std::vector<double> out;
    detail::parallel_fill(out, cfg.m, cfg.threads, [&](std::size_t r) {
        Stream s(cfg.seed, n, r, floor_tag);
        return s.normal();
    });
    return out;
}

// ---------------------------------------------------------------------------
// Distance curves

inline constexpr std::size_t curve_batches = 4;

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Plug-in distance of the sample's empirical law to the standard Gaussian, with a
// batch-means standard error over `batches` contiguous blocks.
inline Estimate empirical_distance(std::span<const double> y, const CostFunction& C, DistanceMode mode,
                                   std::size_t batches = curve_batches) {
    Estimate e;
    e.value = distance_to_gaussian(Distribution1D::empirical({y.begin(), y.end()}), C, mode);
    if (!std::isfinite(e.value)) {
        e.std_error = infinity;
        return e;
    }
    const std::size_t size = y.size() / batches;
    std::vector<double> b;
    for (std::size_t i = 0; i < batches; ++i) {
        const auto part = y.subspan(i * size, size);
        b.push_back(distance_to_gaussian(Distribution1D::empirical({part.begin(), part.end()}), C, mode));
    }
    double mean = 0.0;
    for (double v : b) mean += v;
    mean /= static_cast<double>(batches);
    double ss = 0.0;
    for (double v : b) ss += (v - mean) * (v - mean);
    e.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
    return e;
}

struct CurvePoint {
    std::size_t n = 0;
    double dist = 0.0;
    double std_error = 0.0;
    double floor = 0.0;
    double floor_stderr = 0.0;
    double excess() const { return dist - floor; }
};

struct CltCurve {
    std::vector<CurvePoint> points;
    std::string model;
    std::string cost;
    DistanceMode mode = DistanceMode::wasserstein;
};

// For each n: distance of the Y_n sample to gamma, and the Monte Carlo floor, the same
// estimator applied to m exact Gaussian draws.
namespace detail {

inline void require_curve_config(const ExperimentConfig& cfg) {
    cfg.validate();
    require_convex(cfg.cost, "clt_distance_curve");
    if (cfg.mode == DistanceMode::wasserstein && !cfg.cost.is_power())
        throw PreconditionError("clt_distance_curve: wasserstein mode needs a power cost");
}

}  // namespace detail

// `sums` are the normalized sums of cfg, one entry per n.
inline CltCurve clt_distance_curve(const ExperimentConfig& cfg, const std::vector<NormalizedSums>& sums) {
    detail::require_curve_config(cfg);
    CltCurve curve;
    curve.model = cfg.model.name();
    curve.cost = cfg.cost.name();
    curve.mode = cfg.mode;
    for (const auto& s : sums) {
        CurvePoint p;
        p.n = s.n;
        const auto d = empirical_distance(s.y, cfg.cost, cfg.mode);
        p.dist = d.value;
        p.std_error = d.std_error;
        const auto f = empirical_distance(sample_floor(cfg, s.n), cfg.cost, cfg.mode);
        p.floor = f.value;
        p.floor_stderr = f.std_error;
        curve.points.push_back(p);
    }
    return curve;
}

inline CltCurve clt_distance_curve(const ExperimentConfig& cfg) {
    detail::require_curve_config(cfg);
    return clt_distance_curve(cfg, sample_normalized_sums(cfg));
}

// ---------------------------------------------------------------------------
// Moment inequalities

enum class RosenthalMode {
    generic,   // K(p) (n E|X|^p + n^{p/2} sigma^p) with a single constant
    explicit_, // k^k n E|X|^k + 4 k^{k/2+1} 2^{-k} e^k n^{k/2} sigma^k, integer k >= 2
};

inline const char* to_string(RosenthalMode m) { return m == RosenthalMode::generic ? "generic" : "explicit"; }

// Coefficients of the two terms in the explicit form, evaluated at real p.
inline double rosenthal_first_coefficient(double p) { return std::pow(p, p); }
inline double rosenthal_second_coefficient(double p) {
    return 4.0 * std::pow(p, p / 2.0 + 1.0) * std::pow(2.0, -p) * std::exp(p);
}

// K(p) for the generic form: the larger of the two explicit coefficients.
inline double rosenthal_constant(double p) {
    return std::max(rosenthal_first_coefficient(p), rosenthal_second_coefficient(p));
}

inline double rosenthal_bound(const SequenceModel& model, std::size_t n, double p, RosenthalMode mode) {
    if (!model.iid())
        throw PreconditionError(
            "rosenthal_check: the model is dependent; use dependent_moment_check for mixing or associated sequences");
    if (!(p > 1.0)) throw DomainError("rosenthal_check: p must exceed 1");
    const double nn = static_cast<double>(n);
    const double first = nn * model.abs_moment(p);
    const double second = std::pow(nn, p / 2.0) * std::pow(model.sigma(), p);
    if (mode == RosenthalMode::generic) return rosenthal_constant(p) * (first + second);
    if (p != std::floor(p) || p < 2.0) throw DomainError("rosenthal_check: explicit mode needs an integer p >= 2");
    return rosenthal_first_coefficient(p) * first + rosenthal_second_coefficient(p) * second;
}

struct MomentRecord {
    std::size_t n = 0;
    double p = 0.0;
    double empirical = 0.0;  // E|S_n|^p
    double std_error = 0.0;
    double bound = 0.0;
    double normalized_empirical = 0.0;  // E|Y_n|^p
    double normalized_bound = 0.0;      // K(p) (E|X|^p sigma^{-p} n^{1-p/2} + 1)
    bool holds() const { return empirical <= bound && normalized_empirical <= normalized_bound; }
};

struct MomentReport {
    std::string check;
    std::string mode;
    double constant = 0.0;
    std::vector<MomentRecord> records;
    bool holds() const {
        return std::all_of(records.begin(), records.end(), [](const MomentRecord& r) { return r.holds(); });
    }
};

inline Estimate abs_moment_estimate(std::span<const double> s, double p) {
    CompensatedSum sum, sq;
    for (double v : s) {
        const double a = std::pow(std::abs(v), p);
        sum += a;
        sq += a * a;
    }
    const double m = static_cast<double>(s.size());
    Estimate e;
    e.value = sum.value() / m;
    const double var = std::max(0.0, sq.value() / m - e.value * e.value);
    e.std_error = std::sqrt(var / std::max(1.0, m - 1.0));
    return e;
}

inline MomentRecord rosenthal_record(const SequenceModel& model, std::size_t n, double p, double moment,
                                     double std_error, RosenthalMode mode) {
    MomentRecord r;
    r.n = n;
    r.p = p;
    r.empirical = moment;
    r.std_error = std_error;
    r.bound = rosenthal_bound(model, n, p, mode);
    const double sp = std::pow(sigma_n(model, n), p);
    r.normalized_empirical = moment / sp;
    r.normalized_bound = rosenthal_constant(p) *
                         (model.abs_moment(p) * std::pow(model.sigma(), -p) * std::pow(static_cast<double>(n), 1.0 - p / 2.0) + 1.0);
    return r;
}

// Empirical E|S_n|^p from raw sums against the bound.
inline MomentReport rosenthal_check(const SequenceModel& model, std::size_t n, double p, std::span<const double> sums,
                                    RosenthalMode mode) {
    if (sums.empty()) throw ValidationError("rosenthal_check: no samples");
    const auto e = abs_moment_estimate(sums, p);
    MomentReport rep;
    rep.check = "rosenthal";
    rep.mode = to_string(mode);
    rep.constant = rosenthal_constant(p);
    rep.records.push_back(rosenthal_record(model, n, p, e.value, e.std_error, mode));
    return rep;
}

// Same comparison with a known moment instead of a sample.
inline MomentReport rosenthal_check_exact(const SequenceModel& model, std::size_t n, double p, double moment,
                                          RosenthalMode mode) {
    MomentReport rep;
    rep.check = "rosenthal";
    rep.mode = to_string(mode);
    rep.constant = rosenthal_constant(p);
    rep.records.push_back(rosenthal_record(model, n, p, moment, 0.0, mode));
    return rep;
}

// Mann-Kendall trend statistic with the tie-corrected variance.
struct MannKendall {
    double s = 0.0;
    double variance = 0.0;
    double z = 0.0;
    bool upward(double z_crit) const { return z > z_crit; }
};

inline MannKendall mann_kendall(std::span<const double> x) {
    MannKendall mk;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) mk.s += (x[j] > x[i]) - (x[j] < x[i]);
    std::map<double, std::size_t> ties;
    for (double v : x) ++ties[v];
    const double nn = static_cast<double>(n);
    mk.variance = nn * (nn - 1.0) * (2.0 * nn + 5.0);
    for (const auto& [v, t] : ties) {
        const double tt = static_cast<double>(t);
        mk.variance -= tt * (tt - 1.0) * (2.0 * tt + 5.0);
    }
    mk.variance /= 18.0;
    if (mk.variance > 0.0) {
        if (mk.s > 0) mk.z = (mk.s - 1.0) / std::sqrt(mk.variance);
        if (mk.s < 0) mk.z = (mk.s + 1.0) / std::sqrt(mk.variance);
    }
    return mk;
}

// One-sided 5% critical value.
inline constexpr double mann_kendall_z_crit = 1.6448536269514722;

struct RatioRecord {
    std::size_t n = 0;
    double moment = 0.0;  // E|S_n|^p
    double std_error = 0.0;
    double ratio = 0.0;   // E|S_n|^p / n^{p/2}
};

struct DependentMomentReport {
    double p = 0.0;
    std::vector<RatioRecord> records;
    double k_hat = 0.0;  // max ratio
    std::optional<double> k_override;
    MannKendall trend;
    bool upward_trend() const { return trend.upward(mann_kendall_z_crit); }
    bool holds() const { return !upward_trend() && (!k_override || k_hat <= *k_override); }
};

// sums_by_n[i] holds raw S_n samples for ns[i].
inline DependentMomentReport dependent_moment_check(const SequenceModel& model, const std::vector<std::size_t>& ns,
                                                    const std::vector<std::vector<double>>& sums_by_n, double p,
                                                    std::optional<double> k_override = std::nullopt) {
    if (!model.mixing() && !model.associated())
        throw PreconditionError("dependent_moment_check: model declares neither mixing nor association");
    if (!(p >= 2.0)) throw DomainError("dependent_moment_check: p must be >= 2");
    if (ns.size() != sums_by_n.size() || ns.empty())
        throw ValidationError("dependent_moment_check: one sample set per n is required");
    DependentMomentReport rep;
    rep.p = p;
    rep.k_override = k_override;
    std::vector<double> ratios;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (sums_by_n[i].empty()) throw ValidationError("dependent_moment_check: empty sample set");
        const auto e = abs_moment_estimate(sums_by_n[i], p);
        RatioRecord r;
        r.n = ns[i];
        r.moment = e.value;
        r.std_error = e.std_error;
        r.ratio = e.value / std::pow(static_cast<double>(ns[i]), p / 2.0);
        rep.k_hat = std::max(rep.k_hat, r.ratio);
        ratios.push_back(r.ratio);
        rep.records.push_back(r);
    }
    rep.trend = mann_kendall(ratios);
    return rep;
}

// ---------------------------------------------------------------------------
// Mixing and association conditions

struct AlphaEnvelope {
    enum class Kind { geometric, power_law } kind = Kind::geometric;
    double kappa = 1.0;
    double rate = 0.5;  // rho for geometric, beta for power law (alpha_n = kappa n^{-beta})

    static AlphaEnvelope geometric(double kappa, double rho) { return {Kind::geometric, kappa, rho}; }
    static AlphaEnvelope power_law(double kappa, double beta) { return {Kind::power_law, kappa, beta}; }
    double operator()(std::size_t n) const {
        const double nn = static_cast<double>(n);
        return kind == Kind::geometric ? kappa * std::pow(rate, nn) : kappa * std::pow(nn, -rate);
    }
};

struct YokoyamaResult {
    double partial_sum = 0.0;
    std::size_t terms = 0;
    bool converged = false;
    bool terms_vanish = false;
    double ratio_limit = 0.0;  // geometric: rho^{delta/(p+delta)}
    double exponent = 0.0;     // power law: terms behave like n^exponent
    double tail_bound = infinity;
};

// Mixing envelope of a model; none for iid sequences, where alpha_n = 0. For the
// Gaussian ar1 the maximal correlation at lag n is phi^n and alpha_n <= phi^n / 4.
inline std::optional<AlphaEnvelope> alpha_envelope(const SequenceModel& model) {
    if (model.iid()) return std::nullopt;
    return AlphaEnvelope::geometric(0.25, model.phi());
}

// sum_{n>=1} (n+1)^{p/2-1} alpha_n^{delta/(p+delta)} for an envelope of alpha_n.
inline YokoyamaResult yokoyama_condition(const AlphaEnvelope& alpha, double p, double delta, std::size_t n_terms) {
    if (!(p > 2.0)) throw DomainError("yokoyama_condition: p must exceed 2");
    if (!(delta > 0.0)) throw DomainError("yokoyama_condition: delta must be positive");
    if (!(alpha.kappa > 0.0)) throw DomainError("yokoyama_condition: kappa must be positive");
    if (n_terms == 0) throw DomainError("yokoyama_condition: need at least one term");
    const double e = delta / (p + delta);
    auto term = [&](std::size_t n) {
        const double nn = static_cast<double>(n);
        return std::pow(nn + 1.0, p / 2.0 - 1.0) * std::pow(alpha(n), e);
    };
    YokoyamaResult r;
    r.terms = n_terms;
    CompensatedSum s;
    for (std::size_t n = 1; n <= n_terms; ++n) s += term(n);
    r.partial_sum = s.value();
    if (alpha.kind == AlphaEnvelope::Kind::geometric) {
        if (!(alpha.rate > 0.0 && alpha.rate < 1.0))
            throw DomainError("yokoyama_condition: rho must lie in (0, 1), got " + std::to_string(alpha.rate));
        r.ratio_limit = std::pow(alpha.rate, e);
        r.converged = true;
        r.terms_vanish = true;
        // Term ratios past N are at most q = ((N+2)/(N+1))^{p/2-1} rho^e.
        const double nn = static_cast<double>(n_terms);
        const double q = std::pow((nn + 2.0) / (nn + 1.0), p / 2.0 - 1.0) * r.ratio_limit;
        if (q < 1.0) r.tail_bound = term(n_terms + 1) / (1.0 - q);
    } else {
        if (!(alpha.rate > 0.0)) throw DomainError("yokoyama_condition: beta must be positive");
        r.exponent = p / 2.0 - 1.0 - alpha.rate * e;
        r.converged = r.exponent < -1.0;
        r.terms_vanish = r.exponent < 0.0;
        if (r.converged) {
            // integral comparison: sum_{n>N} c n^x <= c N^{x+1} / (-x-1), c bounding (n+1)^{p/2-1}/n^{p/2-1}
            const double nn = static_cast<double>(n_terms);
            const double c = std::pow(2.0, p / 2.0 - 1.0) * std::pow(alpha.kappa, e);
            r.tail_bound = c * std::pow(nn, r.exponent + 1.0) / (-r.exponent - 1.0);
        }
    }
    return r;
}

// u(n) = 2 sum_{k>n} Cov(X_1, X_k) = 2 Var(X) phi^n / (1 - phi) for ar1; 0 for iid.
inline double cox_grimmett(const SequenceModel& model, std::size_t n) {
    if (model.iid()) return 0.0;
    const double phi = model.phi();
    return 2.0 * model.variance() * std::pow(phi, static_cast<double>(n)) / (1.0 - phi);
}

struct CoxGrimmettVerdict {
    double exponent = 0.0;  // s in u(n) <= B n^{-s}
    double b_min = 0.0;     // sup_n u(n) n^s
    double b = 0.0;
    bool holds = false;
};

// u(n) <= B n^{-(p-2)(p+delta)/(2 delta)} for all n >= 1. Geometric decay beats any
// power, so sup_n u(n) n^s is finite and attained near n = s / ln(1/phi).
inline CoxGrimmettVerdict cox_grimmett_condition(const SequenceModel& model, double p, double delta, double b) {
    if (!(p > 2.0)) throw DomainError("cox_grimmett_condition: p must exceed 2");
    if (!(delta > 0.0)) throw DomainError("cox_grimmett_condition: delta must be positive");
    CoxGrimmettVerdict v;
    v.exponent = (p - 2.0) * (p + delta) / (2.0 * delta);
    v.b = b;
    if (!model.iid()) {
        const double peak = v.exponent / -std::log(model.phi());
        const auto last = static_cast<std::size_t>(std::ceil(peak)) + 2;
        for (std::size_t n = 1; n <= last; ++n)
            v.b_min = std::max(v.b_min, cox_grimmett(model, n) * std::pow(static_cast<double>(n), v.exponent));
    }
    v.holds = v.b_min <= b;
    return v;
}

// ---------------------------------------------------------------------------
// Series of even moments

enum class SeriesVerdict { converged_by_ratio, diverged_by_terms, inconclusive };

inline const char* to_string(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::converged_by_ratio: return "converged_by_ratio";
        case SeriesVerdict::diverged_by_terms: return "diverged_by_terms";
        case SeriesVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

// k -> log E X^{2k}; -inf encodes a zero moment.
using LogMomentOracle = std::function<double(std::size_t)>;

inline LogMomentOracle rademacher_even_moments(double scale = 1.0) {
    return [scale](std::size_t k) { return 2.0 * static_cast<double>(k) * std::log(scale); };
}

// E Z^{2k} = (2k-1)!! sigma^{2k}
inline LogMomentOracle gaussian_even_moments(double sigma = 1.0) {
    return [sigma](std::size_t k) {
        const double kk = static_cast<double>(k);
        return std::lgamma(2.0 * kk + 1.0) - kk * std::numbers::ln2 - std::lgamma(kk + 1.0) + 2.0 * kk * std::log(sigma);
    };
}

inline LogMomentOracle zero_even_moments() {
    return [](std::size_t) { return -infinity; };
}

// E X^{2k} = h^{2k} / (2k+1) for X uniform on [-h, h].
inline LogMomentOracle uniform_even_moments(double half_width) {
    return [half_width](std::size_t k) {
        const double kk = static_cast<double>(k);
        return 2.0 * kk * std::log(half_width) - std::log(2.0 * kk + 1.0);
    };
}

// Even moments of the stationary marginal X_1.
inline LogMomentOracle model_even_moments(const SequenceModel& model) {
    switch (model.kind()) {
        case SequenceModel::Kind::rademacher: return rademacher_even_moments(model.scale());
        case SequenceModel::Kind::uniform: return uniform_even_moments(model.scale());
        default: return gaussian_even_moments(model.scale());
    }
}

struct SeriesResult {
    std::vector<double> log_terms;     // log(k^k E X^{2k})
    std::vector<double> terms;         // +inf once they overflow
    std::vector<double> partial_sums;  // +inf once they overflow
    SeriesVerdict verdict = SeriesVerdict::inconclusive;
    double ratio_bound = 0.9;
};

// t_k = k^k E X^{2k}, k = 1..k_max. Over the last quarter of the terms:
// diverged_by_terms if they never decrease and end at or above 1, converged_by_ratio
// if every ratio t_{k+1}/t_k is at most `ratio_bound`.
inline SeriesResult series_condition(const LogMomentOracle& log_moment, std::size_t k_max, double ratio_bound = 0.9) {
    if (k_max < 4) throw DomainError("series_condition: need k_max >= 4");
    if (!(ratio_bound > 0.0 && ratio_bound < 1.0)) throw DomainError("series_condition: ratio bound must lie in (0, 1)");
    SeriesResult r;
    r.ratio_bound = ratio_bound;
    CompensatedSum s;
    bool overflow = false;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double lm = log_moment(k);
        if (std::isnan(lm)) throw EvaluationError("series_condition: moment oracle returned NaN at k = " + std::to_string(k));
        const double kk = static_cast<double>(k);
        const double lt = lm == -infinity ? -infinity : kk * std::log(kk) + lm;
        r.log_terms.push_back(lt);
        const double t = lt > std::log(divergence_guard) ? infinity : std::exp(lt);
        r.terms.push_back(t);
        if (!std::isfinite(t)) overflow = true;
        if (!overflow) s += t;
        r.partial_sums.push_back(overflow ? infinity : s.value());
    }
    if (std::all_of(r.log_terms.begin(), r.log_terms.end(), [](double v) { return v == -infinity; })) {
        r.verdict = SeriesVerdict::converged_by_ratio;
        return r;
    }
    const std::size_t from = k_max - k_max / 4;
    bool nondecreasing = true, ratio_ok = true;
    for (std::size_t i = from; i < k_max; ++i) {
        const double step = r.log_terms[i] - r.log_terms[i - 1];
        if (!(step >= 0.0)) nondecreasing = false;
        if (!(step <= std::log(ratio_bound))) ratio_ok = false;
    }
    if (nondecreasing && r.log_terms.back() >= 0.0)
        r.verdict = SeriesVerdict::diverged_by_terms;
    else if (ratio_ok)
        r.verdict = SeriesVerdict::converged_by_ratio;
    return r;
}

// ---------------------------------------------------------------------------
// E exp(Y^2 / 16)

inline constexpr std::size_t exp_moment_batches = 100;
inline const double gaussian_exp_moment = std::sqrt(8.0 / 7.0);  // (1 - 2/16)^{-1/2}

struct ExpMomentResult {
    double mean = 0.0;
    double std_error = 0.0;
    bool finite = true;
    double target = gaussian_exp_moment;
};

// Sample mean of exp(Y^2/16) with a batch-means standard error.
inline ExpMomentResult exp_moment_check(std::span<const double> y, std::size_t batches = exp_moment_batches) {
    if (y.empty()) throw ValidationError("exp_moment_check: no samples");
    batches = std::min(batches, y.size());
    ExpMomentResult r;
    std::vector<double> v(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        v[i] = std::exp(y[i] * y[i] / 16.0);
        if (!std::isfinite(v[i])) r.finite = false;
    }
    if (!r.finite) {
        r.mean = r.std_error = infinity;
        return r;
    }
    CompensatedSum total;
    for (double x : v) total += x;
    r.mean = total.value() / static_cast<double>(v.size());
    if (batches < 2) return r;
    const std::size_t size = v.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
        CompensatedSum s;
        for (std::size_t i = b * size; i < (b + 1) * size; ++i) s += v[i];
        means.push_back(s.value() / static_cast<double>(size));
    }
    double mu = 0.0;
    for (double x : means) mu += x;
    mu /= static_cast<double>(batches);
    double ss = 0.0;
    for (double x : means) ss += (x - mu) * (x - mu);
    r.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
    return r;
}

}  // namespace kantor
