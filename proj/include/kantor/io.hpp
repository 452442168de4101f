#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kantor/clt_lab.hpp"
#include "kantor/convergence.hpp"
#include "kantor/errors.hpp"
#include "kantor/measures.hpp"
#include "kantor/metric.hpp"
#include "kantor/ot_lp.hpp"

// JSON and CSV formats for measures, couplings and reports. Doubles are written in
// shortest round-trip form, so a measure written here re-reads bit-identically.
// Non-finite numbers are written as the strings "inf", "-inf" and "nan".

namespace kantor::io {

using json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "1";

inline json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

inline json numbers(std::span<const double> xs) {
    json a = json::array();
    for (double x : xs) a.push_back(number(x));
    return a;
}

inline json optional_number(std::optional<double> x) { return x ? number(*x) : json(nullptr); }

inline double read_number(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return infinity;
        if (s == "-inf") return -infinity;
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ValidationError(where + ": expected a number, got " + j.dump());
}

inline std::vector<double> read_numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ValidationError(where + ": expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json parse_json(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(where + ": invalid JSON: " + e.what());
    }
}

inline json read_json(const std::string& path) { return parse_json(read_text(path), path); }

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ValidationError("write to '" + path + "' failed");
}

inline void write_json(const std::string& path, const json& j) { write_text(path, dump(j)); }

// One sample per line; blank lines and lines starting with '#' are skipped.
inline std::vector<double> parse_samples_csv(const std::string& text, const std::string& where) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t");
        const std::string field = line.substr(first, last - first + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || ptr != field.data() + field.size())
            throw ValidationError(where + ":" + std::to_string(lineno) + ": not a number: '" + field + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(where + ": no samples");
    return out;
}

// ---------------------------------------------------------------------------
// Measures

// A measure file holds either a law on the line or a measure on a finite space.
struct MeasureFile {
    std::optional<Distribution1D> line;
    std::optional<MetricSpaceFinite> space;
    std::optional<SpaceMeasure> space_measure;

    bool on_line() const { return line.has_value(); }
};

namespace detail {

inline MetricSpaceFinite read_space(const json& j) {
    if (!j.is_object() || !j.contains("dist")) throw ValidationError("space: expected {\"points\": [...], \"dist\": [[...]]}");
    const json& rows = j["dist"];
    if (!rows.is_array()) throw ValidationError("space.dist: expected an array of rows");
    std::vector<std::vector<double>> dist;
    for (std::size_t i = 0; i < rows.size(); ++i) dist.push_back(read_numbers(rows[i], "space.dist[" + std::to_string(i) + "]"));
    if (!j.contains("points")) return MetricSpaceFinite::from_matrix(std::move(dist));
    const json& pts = j["points"];
    if (!pts.is_array()) throw ValidationError("space.points: expected an array");
    std::vector<std::string> labels;
    for (const auto& p : pts) labels.push_back(p.is_string() ? p.get<std::string>() : p.dump());
    return MetricSpaceFinite(std::move(labels), std::move(dist));
}

// Support entries are point indices or point labels.
inline std::size_t read_support_entry(const json& e, const MetricSpaceFinite& space, std::size_t i) {
    const std::string where = "support[" + std::to_string(i) + "]";
    if (e.is_number_unsigned()) {
        const auto k = e.get<std::size_t>();
        if (k >= space.size())
            throw ValidationError(where + ": index " + std::to_string(k) + " outside a space of " +
                                  std::to_string(space.size()) + " points");
        return k;
    }
    const std::string label = e.is_string() ? e.get<std::string>() : e.dump();
    const std::size_t k = space.index_of(label);
    if (k == space.size()) throw ValidationError(where + ": unknown point '" + label + "'");
    return k;
}

}  // namespace detail

inline MeasureFile measure_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("measure: expected a JSON object");
    const double base = j.contains("base") ? read_number(j["base"], "base") : 0.0;
    MeasureFile m;
    if (j.contains("space")) {
        auto space = detail::read_space(j["space"]);
        if (!j.contains("support") || !j.contains("weights"))
            throw ValidationError("measure: a space measure needs \"support\" and \"weights\"");
        const json& sup = j["support"];
        if (!sup.is_array()) throw ValidationError("support: expected an array");
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < sup.size(); ++i) idx.push_back(detail::read_support_entry(sup[i], space, i));
        m.space_measure = SpaceMeasure(std::move(idx), read_numbers(j["weights"], "weights"));
        m.space = std::move(space);
    } else if (j.contains("atoms")) {
        const json& a = j["atoms"];
        if (!a.is_object() || !a.contains("values") || !a.contains("weights"))
            throw ValidationError("atoms: expected {\"values\": [...], \"weights\": [...]}");
        m.line = Distribution1D::atoms(read_numbers(a["values"], "atoms.values"), read_numbers(a["weights"], "atoms.weights"),
                                       base);
    } else if (j.contains("samples")) {
        m.line = Distribution1D::empirical(read_numbers(j["samples"], "samples"), base);
    } else if (j.contains("gaussian")) {
        if (j["gaussian"] != true) throw ValidationError("gaussian: only {\"gaussian\": true} is supported");
        m.line = Distribution1D::standard_gaussian(base);
    } else {
        throw ValidationError("measure: expected one of \"space\", \"atoms\", \"samples\", \"gaussian\"");
    }
    return m;
}

// JSON by default; a .csv path is read as raw samples.
inline MeasureFile read_measure(const std::string& path) {
    const std::string text = read_text(path);
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        MeasureFile m;
        m.line = Distribution1D::empirical(parse_samples_csv(text, path));
        return m;
    }
    try {
        return measure_from_json(parse_json(text, path));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

inline json to_json(const Distribution1D& F) {
    json j = json::object();
    switch (F.kind()) {
        case Distribution1D::Kind::atoms:
            j["atoms"] = {{"values", numbers(F.values())}, {"weights", numbers(F.weights())}};
            break;
        case Distribution1D::Kind::empirical: j["samples"] = numbers(F.values()); break;
        case Distribution1D::Kind::standard_gaussian: j["gaussian"] = true; break;
    }
    if (F.base() != 0.0) j["base"] = number(F.base());
    return j;
}

inline json to_json(const MetricSpaceFinite& space) {
    json rows = json::array();
    for (const auto& r : space.matrix()) rows.push_back(numbers(r));
    return {{"points", space.points()}, {"dist", rows}};
}

inline json to_json(const MetricSpaceFinite& space, const SpaceMeasure& mu) {
    return {{"space", to_json(space)},
            {"support", std::vector<std::size_t>(mu.support().begin(), mu.support().end())},
            {"weights", numbers(mu.weights())}};
}

inline json to_json(const MeasureFile& m) {
    if (m.line) return to_json(*m.line);
    return to_json(*m.space, *m.space_measure);
}

// ---------------------------------------------------------------------------
// Couplings

inline json to_json(const SolveResult& r) {
    json pi = json::array();
    for (std::size_t i = 0; i < r.coupling.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < r.coupling.cols; ++j) row.push_back(number(r.coupling(i, j)));
        pi.push_back(std::move(row));
    }
    return {{"cost", number(r.cost)},
            {"pi", std::move(pi)},
            {"dual_u", numbers(r.certificate.u)},
            {"dual_v", numbers(r.certificate.v)}};
}

struct CouplingFile {
    double cost = 0.0;
    Coupling coupling;
    std::vector<double> dual_u, dual_v;
};

inline CouplingFile coupling_from_json(const json& j) {
    for (const char* key : {"cost", "pi", "dual_u", "dual_v"})
        if (!j.contains(key)) throw ValidationError(std::string("coupling: missing \"") + key + "\"");
    CouplingFile c;
    c.cost = read_number(j["cost"], "cost");
    const json& rows = j["pi"];
    if (!rows.is_array()) throw ValidationError("pi: expected an array of rows");
    c.coupling.rows = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto row = read_numbers(rows[i], "pi[" + std::to_string(i) + "]");
        if (i == 0) c.coupling.cols = row.size();
        if (row.size() != c.coupling.cols) throw ValidationError("pi: ragged rows");
        c.coupling.pi.insert(c.coupling.pi.end(), row.begin(), row.end());
    }
    c.dual_u = read_numbers(j["dual_u"], "dual_u");
    c.dual_v = read_numbers(j["dual_v"], "dual_v");
    return c;
}

// ---------------------------------------------------------------------------
// Convergence reports

inline json to_json(const Thresholds& t) {
    return {{"a", number(t.a)}, {"b", number(t.b)}, {"tc", number(t.tc)}, {"monotone_fraction", number(t.monotone_fraction)}};
}

inline json to_json(const Verdicts& v) {
    return {{"cond_a", v.cond_a}, {"cond_b", v.cond_b}, {"tc_to_zero", v.tc_to_zero}, {"violation", v.violation}};
}

inline json to_json(const DiagnosticReport& r) {
    json per_n = json::array();
    for (const auto& rec : r.per_n) {
        json e = {{"n", rec.n}, {"weak", number(rec.weak)}, {"moment", number(rec.moment)}, {"tc", number(rec.tc)}};
        if (!std::isnan(rec.kolmogorov)) e["kolmogorov"] = number(rec.kolmogorov);
        per_n.push_back(std::move(e));
    }
    return {{"check", r.check},
            {"proxy", to_string(r.proxy)},
            {"per_n", std::move(per_n)},
            {"moment_limit", number(r.moment_limit)},
            {"verdicts", to_json(r.verdicts)},
            {"thresholds", to_json(r.thresholds)},
            {"grid_step", optional_number(r.grid_step)}};
}

inline json to_json(const EquivalenceReport& r) {
    json per_n = json::array();
    for (const auto& rec : r.per_n)
        per_n.push_back({{"n", rec.n},
                         {"moment_scale1", number(rec.moment_scale1)},
                         {"moment_scale2", number(rec.moment_scale2)},
                         {"finite_agree", rec.finite_agree}});
    return {{"per_n", std::move(per_n)},
            {"limit_scale1", number(r.limit_scale1)},
            {"limit_scale2", number(r.limit_scale2)},
            {"lambda", number(r.lambda)},
            {"threshold_scale1", number(r.threshold_scale1)},
            {"threshold_scale2", number(r.threshold_scale2)},
            {"converges_scale1", r.converges_scale1},
            {"converges_scale2", r.converges_scale2},
            {"agree", r.agree()}};
}

inline json to_json(const MomentDivergenceReport& r) {
    json per_n = json::array();
    for (const auto& rec : r.per_n)
        per_n.push_back({{"n", rec.n}, {"moment", number(rec.moment)}, {"log_moment", number(rec.log_moment)}});
    return {{"per_n", std::move(per_n)},
            {"verdict", to_string(r.verdict)},
            {"bound", number(r.bound)},
            {"threshold", number(r.threshold)}};
}

// ---------------------------------------------------------------------------
// CLT reports

inline const char* to_string(DistanceMode m) { return m == DistanceMode::wasserstein ? "wasserstein" : "total_cost"; }

inline json to_json(const ExperimentConfig& c) {
    return {{"model", c.model.name()}, {"ns", c.ns},         {"m", c.m},
            {"cost", c.cost.name()},   {"mode", to_string(c.mode)}, {"seed", c.seed},
            {"threads", c.threads}};
}

inline json to_json(const CltCurve& c) {
    json pts = json::array();
    for (const auto& p : c.points)
        pts.push_back({{"n", p.n},
                       {"dist", number(p.dist)},
                       {"stderr", number(p.std_error)},
                       {"floor", number(p.floor)},
                       {"floor_stderr", number(p.floor_stderr)},
                       {"excess", number(p.excess())}});
    return pts;
}

inline json to_json(const MomentReport& r) {
    json recs = json::array();
    for (const auto& m : r.records)
        recs.push_back({{"n", m.n},
                        {"p", number(m.p)},
                        {"empirical", number(m.empirical)},
                        {"stderr", number(m.std_error)},
                        {"bound", number(m.bound)},
                        {"normalized_empirical", number(m.normalized_empirical)},
                        {"normalized_bound", number(m.normalized_bound)},
                        {"holds", m.holds()}});
    return {{"check", r.check}, {"mode", r.mode}, {"constant", number(r.constant)}, {"records", std::move(recs)},
            {"holds", r.holds()}};
}

inline json to_json(const MannKendall& mk) {
    return {{"s", number(mk.s)}, {"variance", number(mk.variance)}, {"z", number(mk.z)}};
}

inline json to_json(const DependentMomentReport& r) {
    json recs = json::array();
    for (const auto& m : r.records)
        recs.push_back({{"n", m.n}, {"moment", number(m.moment)}, {"stderr", number(m.std_error)}, {"ratio", number(m.ratio)}});
    return {{"check", "dependent_moment"},
            {"p", number(r.p)},
            {"records", std::move(recs)},
            {"k_hat", number(r.k_hat)},
            {"k_override", optional_number(r.k_override)},
            {"trend", to_json(r.trend)},
            {"upward_trend", r.upward_trend()},
            {"holds", r.holds()}};
}

inline json to_json(const YokoyamaResult& r) {
    return {{"partial_sum", number(r.partial_sum)}, {"terms", r.terms},
            {"converged", r.converged},             {"terms_vanish", r.terms_vanish},
            {"ratio_limit", number(r.ratio_limit)}, {"exponent", number(r.exponent)},
            {"tail_bound", number(r.tail_bound)}};
}

inline json to_json(const CoxGrimmettVerdict& v) {
    return {{"exponent", number(v.exponent)}, {"b_min", number(v.b_min)}, {"b", number(v.b)}, {"holds", v.holds}};
}

// The term lists are long; only the verdict and the tail of the series are kept.
inline json to_json(const SeriesResult& r) {
    const std::size_t k = r.log_terms.size();
    return {{"verdict", to_string(r.verdict)},
            {"ratio_bound", number(r.ratio_bound)},
            {"k_max", k},
            {"last_log_term", k ? number(r.log_terms.back()) : json(nullptr)},
            {"last_partial_sum", k ? number(r.partial_sums.back()) : json(nullptr)}};
}

inline json to_json(const ExpMomentResult& r) {
    return {{"mean", number(r.mean)}, {"stderr", number(r.std_error)}, {"finite", r.finite}, {"target", number(r.target)}};
}

}  // namespace kantor::io
