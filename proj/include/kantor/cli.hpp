#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kantor/clt_lab.hpp"
#include "kantor/convergence.hpp"
#include "kantor/costs.hpp"
#include "kantor/errors.hpp"
#include "kantor/io.hpp"
#include "kantor/measures.hpp"
#include "kantor/metric.hpp"
#include "kantor/ot_exact.hpp"
#include "kantor/ot_lp.hpp"

// Command-line driver. Every report carries the resolved configuration, defaults
// included, so that re-running the echoed config reproduces it byte for byte.

namespace kantor::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_numerical = 2;

namespace detail {

using io::json;

// A report plus the exit status it warrants; a numerical failure still emits the report.
struct Outcome {
    json report;
    int code = exit_ok;
    std::string message;
};

inline json header(const std::string& command, json config) {
    json j = json::object();
    j["schema_version"] = io::schema_version;
    j["command"] = command;
    j["config"] = std::move(config);
    return j;
}

inline json optional_path(const std::string& path) { return path.empty() ? json(nullptr) : json(path); }

inline void require_finite_costs(const CostMatrix& c, const CostFunction& C) {
    for (double x : c.data())
        if (!std::isfinite(x))
            throw NumericalError("cost '" + C.name() + "' overflows on this pair of supports; T_c is not finite");
}

inline XnRule parse_xn(const std::string& spec) {
    if (spec == "pow2") return XnRule::pow2();
    if (spec.starts_with("const:")) {
        const std::string arg = spec.substr(6);
        double c = 0.0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), c);
        if (ec == std::errc{} && ptr == arg.data() + arg.size() && std::isfinite(c)) return XnRule::constant(c);
    }
    throw ValidationError("bad --xn '" + spec + "' (expected pow2 or const:<value>)");
}

inline TcMethod parse_method(const std::string& s) {
    if (s == "lp") return TcMethod::lp;
    if (s == "quantile") return TcMethod::quantile;
    return TcMethod::automatic;
}

inline std::vector<std::size_t> powers_of_two(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> out;
    for (std::size_t n = lo; n <= hi; n *= 2) out.push_back(n);
    return out;
}

// ---------------------------------------------------------------------------
// dist: exact T_c on finite supports by the LP, with the coupling

struct DistOptions {
    std::string mu, nu;
    std::string cost = "power:2";
    std::string coupling;
};

inline Outcome run_dist(const DistOptions& o) {
    const auto C = parse_cost(o.cost);
    const auto mu = io::read_measure(o.mu);
    const auto nu = io::read_measure(o.nu);
    Outcome out;
    out.report = header("dist", {{"mu", o.mu}, {"nu", o.nu}, {"cost", C.name()}, {"coupling", optional_path(o.coupling)}});
    if (mu.on_line() != nu.on_line())
        throw ValidationError("dist: mu and nu must both live on the line or on the same finite space");
    SolveResult r;
    if (mu.on_line()) {
        if (mu.line->is_gaussian() || nu.line->is_gaussian())
            throw ValidationError("dist: the Gaussian has no finite support; use dist1d");
        const auto a = mu.line->to_measure(), b = nu.line->to_measure();
        const auto c = make_cost_matrix(a, b, C);
        require_finite_costs(c, C);
        r = solve_kantorovich(a, b, c);
    } else {
        if (!(*mu.space == *nu.space)) throw ValidationError("dist: mu and nu are given on different spaces");
        const auto audit = validate_metric(*mu.space);
        if (!audit.valid())
            throw ValidationError(std::string("dist: distance matrix violates the ") + to_string(audit.violations[0].axiom) +
                                  " axiom");
        const auto& space = *mu.space;
        const auto c = make_cost_matrix(*mu.space_measure, *nu.space_measure, C,
                                        [&space](std::size_t i, std::size_t j) { return space(i, j); });
        require_finite_costs(c, C);
        r = solve_kantorovich(*mu.space_measure, *nu.space_measure, c);
    }
    if (r.status != SolveStatus::optimal) throw ValidationError("dist: " + r.message);
    out.report["tc"] = io::number(r.cost);
    out.report["solver"] = to_string(r.method);
    out.report["iterations"] = r.iterations;
    out.report["certified"] = r.certificate.certified;
    if (!o.coupling.empty()) io::write_json(o.coupling, io::to_json(r));
    if (!r.certificate.certified) {
        out.code = exit_numerical;
        out.message = "dist: the dual certificate failed at tolerance " + std::to_string(r.certificate.tolerance);
    }
    return out;
}

// ---------------------------------------------------------------------------
// dist1d: quantile formula on the line

struct Dist1dOptions {
    std::string f, g;
    std::string cost = "power:2";
};

inline Outcome run_dist1d(const Dist1dOptions& o) {
    const auto C = parse_cost(o.cost);
    const auto fm = io::read_measure(o.f);
    const auto gm = io::read_measure(o.g);
    if (!fm.on_line() || !gm.on_line()) throw ValidationError("dist1d: both laws must live on the real line");
    const auto& F = *fm.line;
    const auto& G = *gm.line;
    Outcome out;
    out.report = header("dist1d", {{"F", o.f}, {"G", o.g}, {"cost", C.name()}});
    const double tc = transport_cost_convex(F, G, C);
    out.report["tc"] = io::number(tc);
    if (C.is_power()) out.report["wasserstein"] = io::number(std::isfinite(tc) ? std::pow(tc, 1.0 / C.exponent()) : tc);
    out.report["levy"] = io::number(levy_distance(F, G));
    out.report["kolmogorov"] = io::number(kolmogorov_distance(F, G));
    if (!std::isfinite(tc)) {
        out.code = exit_numerical;
        out.message = "dist1d: T_c diverges for cost '" + C.name() + "'";
    }
    return out;
}

// ---------------------------------------------------------------------------
// example1: the uniform law with an escaping atom

struct Example1Options {
    std::size_t n = 0;
    std::string xn = "pow2";
    std::string cost = "exp";
    double grid = 0.001;
    std::vector<std::size_t> ns;
    bool tc = false;
    double bound = 1e12;
    std::string write_measure, write_limit;
};

inline Outcome run_example1(Example1Options o) {
    const auto C = parse_cost(o.cost);
    const auto rule = parse_xn(o.xn);
    const std::size_t k = grid_cells(o.grid);
    if (o.n < 2) throw ValidationError("example1: --n must be at least 2");
    if (o.ns.empty())
        for (std::size_t i = 2; i <= o.n; ++i) o.ns.push_back(i);
    Outcome out;
    out.report = header("example1", {{"n", o.n},
                                     {"xn", rule.name()},
                                     {"cost", C.name()},
                                     {"grid", o.grid},
                                     {"ns", o.ns},
                                     {"tc", o.tc},
                                     {"bound", io::number(o.bound)},
                                     {"write_measure", optional_path(o.write_measure)},
                                     {"write_limit", optional_path(o.write_limit)}});
    out.report["xn_value"] = io::number(rule(o.n));
    out.report["tv"] = io::number(example1_tv(o.n));
    const Rational tv = example1_tv_discretized(o.n, rule, k);
    out.report["tv_discretized"] = io::number(tv.to_double());
    out.report["tv_discretized_exact"] = std::to_string(tv.num()) + "/" + std::to_string(tv.den());
    out.report["tc_lower_bound"] = io::number(example1_tc_lower_bound(o.n, rule, C));
    out.report["moment_divergence"] = io::to_json(example1_moment_divergence(o.ns, C, rule, o.grid, o.bound));
    if (!o.write_measure.empty())
        io::write_json(o.write_measure, io::to_json(Distribution1D::from_measure(example1_measure(o.n, rule, o.grid))));
    if (!o.write_limit.empty())
        io::write_json(o.write_limit, io::to_json(Distribution1D::from_measure(example1_limit(o.grid))));
    if (o.tc) {
        const auto mu_n = example1_measure(o.n, rule, o.grid);
        const auto mu = example1_limit(o.grid);
        const auto c = make_cost_matrix(mu_n, mu, C);
        require_finite_costs(c, C);
        const auto r = solve_kantorovich(mu_n, mu, c);
        out.report["tc_lp"] = io::number(r.cost);
        out.report["tc_certified"] = r.certificate.certified;
    }
    return out;
}

// ---------------------------------------------------------------------------
// theorem2: forward / converse diagnostics on a measure sequence

struct Theorem2Options {
    std::string family = "example1";
    std::vector<std::size_t> ns;
    std::string cost = "power:2";
    double a = 0.0;
    std::string direction = "forward";
    std::string proxy = "levy";
    std::string method = "auto";
    Thresholds thresholds;
    std::string xn = "const:2";
    double grid = 0.01;
    std::vector<std::string> measures;
    std::string limit;
};

inline Outcome run_theorem2(Theorem2Options o) {
    const auto C = parse_cost(o.cost);
    const bool converse = o.direction == "converse";
    const WeakProxy proxy = o.proxy == "kolmogorov" ? WeakProxy::kolmogorov : WeakProxy::levy;
    const TcMethod method = parse_method(o.method);

    json config = {{"family", o.family}, {"cost", C.name()}, {"a", o.a}, {"direction", o.direction}};
    auto finish = [&](json cfg, const DiagnosticReport& rep, std::optional<EquivalenceReport> eq) {
        Outcome out;
        out.report = header("theorem2", std::move(cfg));
        const json body = io::to_json(rep);
        for (const auto& [key, value] : body.items()) out.report[key] = value;
        out.report["corollary1"] = eq ? io::to_json(*eq) : json(nullptr);
        return out;
    };

    if (o.family == "files") {
        if (o.measures.empty() || o.limit.empty())
            throw ValidationError("theorem2: the files family needs --measures and --limit");
        if (o.ns.empty())
            for (std::size_t i = 1; i <= o.measures.size(); ++i) o.ns.push_back(i);
        if (o.ns.size() != o.measures.size())
            throw ValidationError("theorem2: " + std::to_string(o.ns.size()) + " indices for " +
                                  std::to_string(o.measures.size()) + " measure files");
        std::vector<io::MeasureFile> files;
        for (const auto& path : o.measures) files.push_back(io::read_measure(path));
        const auto limit = io::read_measure(o.limit);
        config["measures"] = o.measures;
        config["limit"] = o.limit;
        config["ns"] = o.ns;
        config["thresholds"] = io::to_json(o.thresholds);
        auto slot = [&](std::size_t n) {
            return static_cast<std::size_t>(std::find(o.ns.begin(), o.ns.end(), n) - o.ns.begin());
        };
        if (limit.on_line()) {
            for (const auto& f : files)
                if (!f.on_line()) throw ValidationError("theorem2: sequence mixes line and finite-space measures");
            config["proxy"] = o.proxy;
            config["method"] = o.method;
            LineSequence seq{[&](std::size_t n) { return *files[slot(n)].line; }, *limit.line, o.ns};
            const auto rep = converse ? theorem2_converse(seq, C, o.thresholds, proxy, method)
                                      : theorem2_forward(seq, C, o.a, o.thresholds, proxy, method);
            std::optional<EquivalenceReport> eq;
            if (C.doubling_lambda()) eq = corollary1_equivalence(seq, C, o.a, o.thresholds);
            return finish(std::move(config), rep, eq);
        }
        const auto& space = *limit.space;
        for (const auto& f : files)
            if (f.on_line() || !(*f.space == space))
                throw ValidationError("theorem2: every measure must live on the limit's finite space");
        if (!(o.a >= 0.0) || o.a != std::floor(o.a))
            throw ValidationError("theorem2: on a finite space --a is a point index");
        const auto a = static_cast<std::size_t>(o.a);
        config["proxy"] = to_string(WeakProxy::total_variation);
        SpaceSequence seq{[&](std::size_t n) { return *files[slot(n)].space_measure; }, *limit.space_measure, o.ns};
        const auto rep = converse ? theorem2_converse(seq, space, C, o.thresholds)
                                  : theorem2_forward(seq, space, C, a, o.thresholds);
        std::optional<EquivalenceReport> eq;
        if (C.doubling_lambda()) eq = corollary1_equivalence(seq, space, C, a, o.thresholds);
        return finish(std::move(config), rep, eq);
    }

    LineSequence seq{nullptr, Distribution1D::standard_gaussian(), {}};
    if (o.family == "example1") {
        const auto rule = parse_xn(o.xn);
        if (o.ns.empty()) o.ns = powers_of_two(2, 512);
        config["xn"] = rule.name();
        config["grid"] = o.grid;
        seq = example1_sequence(rule, o.grid, o.ns);
    } else if (o.family == "dirac") {
        if (o.ns.empty()) o.ns = powers_of_two(1, 1024);  // 1/n has to fall below the default thresholds
        seq = LineSequence{[](std::size_t n) { return Distribution1D::atoms({1.0 / static_cast<double>(n)}, {1.0}); },
                           Distribution1D::atoms({0.0}, {1.0}), o.ns};
    } else {
        throw ValidationError("theorem2: unknown family '" + o.family + "'");
    }
    config["ns"] = o.ns;
    config["proxy"] = o.proxy;
    config["method"] = o.method;
    config["thresholds"] = io::to_json(o.thresholds);
    auto rep = converse ? theorem2_converse(seq, C, o.thresholds, proxy, method)
                        : theorem2_forward(seq, C, o.a, o.thresholds, proxy, method);
    if (o.family == "example1") rep.grid_step = o.grid;
    std::optional<EquivalenceReport> eq;
    if (C.doubling_lambda()) eq = corollary1_equivalence(seq, C, o.a, o.thresholds);
    return finish(std::move(config), rep, eq);
}

// ---------------------------------------------------------------------------
// clt: Monte Carlo distance curve, moment bounds and dependence conditions

struct CltOptions {
    std::string model = "iid:rademacher";
    std::vector<std::size_t> ns{4, 16, 64, 256};
    std::size_t m = 100000;
    std::string cost = "power:2";
    std::string mode = "wasserstein";
    std::optional<double> p;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string rosenthal = "generic";
    double cond_p = 3.0;
    double delta = 1.0;
    std::optional<double> cox_b;
    std::size_t series_kmax = 64;
    std::size_t yokoyama_terms = 1000;
};

inline std::uint64_t draw_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

inline Outcome run_clt(const CltOptions& o) {
    ExperimentConfig cfg;
    cfg.model = parse_model(o.model);
    cfg.ns = o.ns;
    cfg.m = o.m;
    cfg.cost = parse_cost(o.cost);
    cfg.mode = o.mode == "total_cost" ? DistanceMode::total_cost : DistanceMode::wasserstein;
    cfg.seed = o.seed ? *o.seed : draw_seed();
    cfg.threads = o.threads;
    kantor::detail::require_curve_config(cfg);
    const RosenthalMode rmode = o.rosenthal == "explicit" ? RosenthalMode::explicit_ : RosenthalMode::generic;

    json config = io::to_json(cfg);
    config["p"] = io::optional_number(o.p);
    config["rosenthal"] = o.rosenthal;
    config["cond_p"] = o.cond_p;
    config["delta"] = o.delta;
    config["cox_b"] = io::optional_number(o.cox_b);
    config["series_kmax"] = o.series_kmax;
    config["yokoyama_terms"] = o.yokoyama_terms;
    Outcome out;
    out.report = header("clt", std::move(config));

    const auto sums = sample_normalized_sums(cfg);
    const auto curve = clt_distance_curve(cfg, sums);
    out.report["curve"] = io::to_json(curve);

    json moments = json::array();
    if (o.p) {
        std::vector<std::vector<double>> raw;
        for (std::size_t n : cfg.ns) raw.push_back(sample_sums(cfg, n));
        if (cfg.model.iid()) {
            for (std::size_t i = 0; i < cfg.ns.size(); ++i)
                moments.push_back(io::to_json(rosenthal_check(cfg.model, cfg.ns[i], *o.p, raw[i], rmode)));
        } else {
            moments.push_back(io::to_json(dependent_moment_check(cfg.model, cfg.ns, raw, *o.p)));
        }
    }
    out.report["moment_reports"] = std::move(moments);

    json conditions = json::object();
    if (const auto env = alpha_envelope(cfg.model)) {
        json y = io::to_json(yokoyama_condition(*env, o.cond_p, o.delta, o.yokoyama_terms));
        y["envelope"] = {{"kind", env->kind == AlphaEnvelope::Kind::geometric ? "geometric" : "power_law"},
                         {"kappa", env->kappa},
                         {"rate", env->rate}};
        conditions["yokoyama"] = std::move(y);
    } else {
        conditions["yokoyama"] = {{"envelope", nullptr}, {"converged", true}};
    }
    json cg = io::to_json(cox_grimmett_condition(cfg.model, o.cond_p, o.delta, o.cox_b.value_or(infinity)));
    if (!o.cox_b) cg["b"] = nullptr;
    conditions["cox_grimmett"] = std::move(cg);
    conditions["series"] = io::to_json(series_condition(model_even_moments(cfg.model), o.series_kmax));
    out.report["conditions"] = std::move(conditions);
    out.report["exp_moment"] = io::to_json(exp_moment_check(sums.back().y));
    out.report["exp_moment"]["n"] = sums.back().n;

    for (const auto& pt : curve.points)
        if (!std::isfinite(pt.dist) || !std::isfinite(pt.floor)) {
            out.code = exit_numerical;
            out.message = "clt: the distance to the Gaussian diverges at n = " + std::to_string(pt.n);
            break;
        }
    return out;
}

// ---------------------------------------------------------------------------
// check-cost: structural flags and the doubling condition on the default grid

struct CheckCostOptions {
    std::string cost;
    std::optional<double> lambda;
};

inline Outcome run_check_cost(const CheckCostOptions& o) {
    const auto C = parse_cost(o.cost);
    if (o.lambda && !(*o.lambda > 0.0)) throw ValidationError("check-cost: --lambda must be positive");
    Outcome out;
    out.report = header("check-cost", {{"cost", C.name()}, {"lambda", io::optional_number(o.lambda)}});
    const auto& f = C.flags();
    out.report["flags"] = {{"nondecreasing", f.nondecreasing},
                           {"zero_at_zero", f.zero_at_zero},
                           {"convex", f.convex},
                           {"continuous", f.continuous}};
    out.report["declared_lambda"] = io::optional_number(C.doubling_lambda());
    out.report["growth_order"] = io::optional_number(C.growth_order());
    const auto grid = default_doubling_grid();
    const std::optional<double> lambda = o.lambda ? o.lambda : C.doubling_lambda();
    const auto d = check_doubling(C, lambda.value_or(infinity), grid);
    out.report["doubling"] = {{"lambda", io::optional_number(lambda)},
                              {"holds", lambda ? json(d.holds) : json(nullptr)},
                              {"worst_ratio", io::number(d.worst_ratio)},
                              {"worst_log_ratio", io::number(d.worst_log_ratio)},
                              {"witness", io::number(d.witness)},
                              {"checked", d.checked}};
    const auto brk = find_monotonicity_break(C, grid);
    out.report["monotone_on_grid"] = brk == grid.size();
    return out;
}

}  // namespace detail

// Parses args (without the program name), runs one subcommand and writes the JSON
// report to `out` or to --out. Returns 0, 1 (validation or usage) or 2 (numerical).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kantorovich transportation distances, convergence diagnostics and CLT experiments", "kantor"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.failure_message(CLI::FailureMessage::help);
    std::string out_path;
    app.add_option("--out", out_path, "Write the report here instead of stdout");

    detail::DistOptions dist;
    auto* c_dist = app.add_subcommand("dist", "Exact T_c between finitely supported measures (LP)");
    c_dist->add_option("--mu", dist.mu, "Measure file")->required();
    c_dist->add_option("--nu", dist.nu, "Measure file")->required();
    c_dist->add_option("--cost", dist.cost, "power:<p> | exp | tv | table:<csv>")->capture_default_str();
    c_dist->add_option("--coupling", dist.coupling, "Write the optimal coupling and potentials here");

    detail::Dist1dOptions dist1d;
    auto* c_dist1d = app.add_subcommand("dist1d", "T_c on the line by the quantile formula, with weak proxies");
    c_dist1d->add_option("--F", dist1d.f, "Measure file on the line")->required();
    c_dist1d->add_option("--G", dist1d.g, "Measure file on the line")->required();
    c_dist1d->add_option("--cost", dist1d.cost, "Convex cost")->capture_default_str();

    detail::Example1Options ex1;
    auto* c_ex1 = app.add_subcommand("example1", "Uniform law with an escaping atom: TV, T_c bound, moment divergence");
    c_ex1->add_option("--n", ex1.n, "Index n >= 2")->required();
    c_ex1->add_option("--xn", ex1.xn, "pow2 | const:<value>")->capture_default_str();
    c_ex1->add_option("--cost", ex1.cost, "Cost spec")->capture_default_str();
    c_ex1->add_option("--grid", ex1.grid, "Grid step 1/k")->capture_default_str();
    c_ex1->add_option("--ns", ex1.ns, "Indices for the moment sequence (default 2..n)")->delimiter(',');
    c_ex1->add_option("--bound", ex1.bound, "Divergence bound on the moment")->capture_default_str();
    c_ex1->add_flag("--tc", ex1.tc, "Also solve the discretized LP for T_c");
    c_ex1->add_option("--write-measure", ex1.write_measure, "Write the discretized mu_n here");
    c_ex1->add_option("--write-limit", ex1.write_limit, "Write the discretized limit here");

    detail::Theorem2Options t2;
    auto* c_t2 = app.add_subcommand("theorem2", "Forward / converse convergence diagnostics");
    c_t2->add_option("--family", t2.family, "example1 | dirac | files")
        ->check(CLI::IsMember({"example1", "dirac", "files"}))
        ->capture_default_str();
    c_t2->add_option("--ns", t2.ns, "Index set (comma separated)")->delimiter(',');
    c_t2->add_option("--cost", t2.cost, "Cost spec")->capture_default_str();
    c_t2->add_option("--a", t2.a, "Reference point (index on a finite space)")->capture_default_str();
    c_t2->add_option("--direction", t2.direction, "forward | converse")
        ->check(CLI::IsMember({"forward", "converse"}))
        ->capture_default_str();
    c_t2->add_option("--proxy", t2.proxy, "levy | kolmogorov")
        ->check(CLI::IsMember({"levy", "kolmogorov"}))
        ->capture_default_str();
    c_t2->add_option("--method", t2.method, "auto | lp | quantile")
        ->check(CLI::IsMember({"auto", "lp", "quantile"}))
        ->capture_default_str();
    c_t2->add_option("--thr-a", t2.thresholds.a, "Threshold on the weak proxy")->capture_default_str();
    c_t2->add_option("--thr-b", t2.thresholds.b, "Threshold on the moment gap")->capture_default_str();
    c_t2->add_option("--thr-tc", t2.thresholds.tc, "Threshold on T_c")->capture_default_str();
    c_t2->add_option("--monotone-fraction", t2.thresholds.monotone_fraction, "Required non-increasing fraction")
        ->capture_default_str();
    c_t2->add_option("--xn", t2.xn, "example1 family: pow2 | const:<value>")->capture_default_str();
    c_t2->add_option("--grid", t2.grid, "example1 family: grid step")->capture_default_str();
    c_t2->add_option("--measures", t2.measures, "files family: one measure file per n")->delimiter(',');
    c_t2->add_option("--limit", t2.limit, "files family: the limit measure");

    detail::CltOptions clt;
    auto* c_clt = app.add_subcommand("clt", "Monte Carlo CLT curve with moment and dependence checks");
    c_clt->add_option("--model", clt.model, "iid:rademacher[:s] | iid:uniform:a:b | iid:gaussian[:s] | ar1:phi[:s]")
        ->capture_default_str();
    c_clt->add_option("--ns", clt.ns, "Sample sizes (comma separated)")->delimiter(',')->capture_default_str();
    c_clt->add_option("--m", clt.m, "Replications per n")->capture_default_str();
    c_clt->add_option("--cost", clt.cost, "Convex cost")->capture_default_str();
    c_clt->add_option("--mode", clt.mode, "wasserstein | total_cost")
        ->check(CLI::IsMember({"wasserstein", "total_cost"}))
        ->capture_default_str();
    c_clt->add_option("--p", clt.p, "Moment order for the Rosenthal / dependent checks");
    c_clt->add_option("--seed", clt.seed, "Random seed (drawn and echoed when absent)");
    c_clt->add_option("--threads", clt.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    c_clt->add_option("--rosenthal", clt.rosenthal, "generic | explicit")
        ->check(CLI::IsMember({"generic", "explicit"}))
        ->capture_default_str();
    c_clt->add_option("--cond-p", clt.cond_p, "p > 2 for the mixing conditions")->capture_default_str();
    c_clt->add_option("--delta", clt.delta, "delta > 0 for the mixing conditions")->capture_default_str();
    c_clt->add_option("--cox-b", clt.cox_b, "Constant B for the covariance condition");
    c_clt->add_option("--series-kmax", clt.series_kmax, "Terms of the even-moment series")->capture_default_str();
    c_clt->add_option("--yokoyama-terms", clt.yokoyama_terms, "Terms of the mixing series")->capture_default_str();

    detail::CheckCostOptions cc;
    auto* c_cc = app.add_subcommand("check-cost", "Structural flags and the doubling condition of a cost");
    c_cc->add_option("--cost", cc.cost, "Cost spec")->required();
    c_cc->add_option("--lambda", cc.lambda, "Doubling constant to test (default: the declared one)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_validation;
    }

    try {
        detail::Outcome o;
        if (c_dist->parsed()) o = detail::run_dist(dist);
        else if (c_dist1d->parsed()) o = detail::run_dist1d(dist1d);
        else if (c_ex1->parsed()) o = detail::run_example1(ex1);
        else if (c_t2->parsed()) o = detail::run_theorem2(t2);
        else if (c_clt->parsed()) o = detail::run_clt(clt);
        else o = detail::run_check_cost(cc);
        if (out_path.empty()) out << io::dump(o.report);
        else io::write_json(out_path, o.report);
        if (o.code != exit_ok) err << "kantor: " << o.message << "\n";
        return o.code;
    } catch (const ValidationError& e) {
        err << "kantor: " << e.what() << "\n";
        return exit_validation;
    } catch (const DomainError& e) {
        err << "kantor: " << e.what() << "\n";
        return exit_validation;
    } catch (const PreconditionError& e) {
        err << "kantor: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << "kantor: " << e.what() << "\n";
        return exit_numerical;
    }
}

}  // namespace kantor::cli
