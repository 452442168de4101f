#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kantor/errors.hpp"

namespace kantor {

// Euclidean distance on the real line.
struct LineMetric {
    double operator()(double x, double y) const { return std::abs(x - y); }
};

// A finite metric space given by its distance matrix. Construction checks only
// the shape; the metric axioms are audited separately by validate_metric.
class MetricSpaceFinite {
public:
    MetricSpaceFinite(std::vector<std::string> points, std::vector<std::vector<double>> dist)
        : points_(std::move(points)), dist_(std::move(dist)) {
        if (dist_.size() != points_.size())
            throw ValidationError("metric space: distance matrix has " + std::to_string(dist_.size()) +
                                  " rows for " + std::to_string(points_.size()) + " points");
        for (std::size_t i = 0; i < dist_.size(); ++i) {
            if (dist_[i].size() != points_.size())
                throw ValidationError("metric space: row " + std::to_string(i) + " has " +
                                      std::to_string(dist_[i].size()) + " entries, expected " +
                                      std::to_string(points_.size()));
        }
    }

    // Unlabelled space; points are named by their index.
    static MetricSpaceFinite from_matrix(std::vector<std::vector<double>> dist) {
        auto labels = default_labels(dist.size());
        return MetricSpaceFinite(std::move(labels), std::move(dist));
    }

    std::size_t size() const { return points_.size(); }
    const std::vector<std::string>& points() const { return points_; }
    const std::vector<std::vector<double>>& matrix() const { return dist_; }

    double operator()(std::size_t i, std::size_t j) const { return dist_[i][j]; }

    // Index of a labelled point, or size() when absent.
    std::size_t index_of(const std::string& label) const {
        return static_cast<std::size_t>(std::find(points_.begin(), points_.end(), label) - points_.begin());
    }

    friend bool operator==(const MetricSpaceFinite&, const MetricSpaceFinite&) = default;

private:
    static std::vector<std::string> default_labels(std::size_t n) {
        std::vector<std::string> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
        return out;
    }

    std::vector<std::string> points_;
    std::vector<std::vector<double>> dist_;
};

enum class MetricAxiom { identity, symmetry, positivity, triangle };

inline const char* to_string(MetricAxiom a) {
    switch (a) {
        case MetricAxiom::identity: return "identity";
        case MetricAxiom::symmetry: return "symmetry";
        case MetricAxiom::positivity: return "positivity";
        case MetricAxiom::triangle: return "triangle";
    }
    return "?";
}

struct MetricViolation {
    MetricAxiom axiom;
    std::size_t i = 0, j = 0, k = 0;  // unused indices repeat i
    double amount = 0.0;
};

struct MetricReport {
    std::vector<MetricViolation> violations;
    bool valid() const { return violations.empty(); }
};

// Lists every violated axiom. Triangle checks use a relative slack of 1e-12 of the
// largest distance so that decimal inputs like 0.1 + 0.2 do not trip it.
inline MetricReport validate_metric(const MetricSpaceFinite& space) {
    MetricReport report;
    const std::size_t n = space.size();
    double scale = 0.0;
    for (const auto& row : space.matrix())
        for (double v : row)
            if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
    const double slack = 1e-12 * std::max(1.0, scale);

    for (std::size_t i = 0; i < n; ++i) {
        if (space(i, i) != 0.0) report.violations.push_back({MetricAxiom::identity, i, i, i, space(i, i)});
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!(space(i, j) > 0.0) || !std::isfinite(space(i, j)))
                report.violations.push_back({MetricAxiom::positivity, i, j, j, space(i, j)});
            if (j > i && space(i, j) != space(j, i))
                report.violations.push_back({MetricAxiom::symmetry, i, j, j, space(i, j) - space(j, i)});
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                if (i == j || j == k || i == k) continue;
                const double excess = space(i, k) - (space(i, j) + space(j, k));
                if (excess > slack) report.violations.push_back({MetricAxiom::triangle, i, j, k, excess});
            }
    return report;
}

}  // namespace kantor
