#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kantor/costs.hpp"
#include "kantor/errors.hpp"
#include "kantor/measures.hpp"
#include "kantor/numeric.hpp"

// Exact Kantorovich problem on finite supports:
//   minimise sum_ij c_ij pi_ij  s.t.  sum_j pi_ij = a_i,  sum_i pi_ij = b_j,  pi >= 0.
// Solved by the primal network simplex on the bipartite transportation graph, so
// every optimum is a vertex of the transportation polytope and comes with dual
// potentials (u, v) certifying it.

namespace kantor {

// Dense row-major cost matrix.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<const double> data() const { return data_; }

    CostMatrix scaled(double s) const {
        CostMatrix out = *this;
        for (double& x : out.data_) x *= s;
        return out;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// c_ij = C(d(x_i, y_j)).
template <class Point, class Metric>
CostMatrix make_cost_matrix(const DiscreteMeasure<Point>& mu, const DiscreteMeasure<Point>& nu, const CostFunction& C,
                            const Metric& d) {
    CostMatrix m(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) m(i, j) = C(d(mu.point(i), nu.point(j)));
    return m;
}

inline CostMatrix make_cost_matrix(const LineMeasure& mu, const LineMeasure& nu, const CostFunction& C) {
    return make_cost_matrix(mu, nu, C, LineMetric{});
}

struct Coupling {
    std::size_t rows = 0, cols = 0;
    std::vector<double> pi;  // row-major
    std::vector<double> row_marginal, col_marginal;

    double operator()(std::size_t i, std::size_t j) const { return pi[i * cols + j]; }
    std::size_t positive_entries() const {
        return static_cast<std::size_t>(std::count_if(pi.begin(), pi.end(), [](double x) { return x > 0.0; }));
    }
};

struct DualCertificate {
    std::vector<double> u, v;
    double dual_violation = 0.0;      // max_ij (u_i + v_j - c_ij)^+
    double slackness_violation = 0.0; // max over pi_ij > 0 of |c_ij - u_i - v_j|
    double tolerance = 0.0;
    bool certified = false;
};

enum class SolveStatus { optimal, infeasible_input };
enum class SolverMethod { automatic, network_simplex, hungarian };

inline const char* to_string(SolveStatus s) { return s == SolveStatus::optimal ? "optimal" : "infeasible_input"; }
inline const char* to_string(SolverMethod m) {
    switch (m) {
        case SolverMethod::automatic: return "automatic";
        case SolverMethod::network_simplex: return "network_simplex";
        case SolverMethod::hungarian: return "hungarian";
    }
    return "?";
}

struct SolveResult {
    double cost = std::numeric_limits<double>::quiet_NaN();
    Coupling coupling;
    SolveStatus status = SolveStatus::infeasible_input;
    std::size_t iterations = 0;
    DualCertificate certificate;
    SolverMethod method = SolverMethod::network_simplex;
    std::string message;
};

// Certificates are checked at this tolerance, relative to max(1, max c_ij).
inline constexpr double certificate_tolerance = 1e-10;

// Checks dual feasibility and complementary slackness for a coupling and potentials.
inline DualCertificate certify(const CostMatrix& c, const Coupling& pi, std::vector<double> u, std::vector<double> v) {
    DualCertificate cert;
    double scale = 1.0;
    for (double x : c.data()) scale = std::max(scale, x);
    cert.tolerance = certificate_tolerance * scale;
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j) {
            const double slack = c(i, j) - u[i] - v[j];
            cert.dual_violation = std::max(cert.dual_violation, -slack);
            if (pi(i, j) > 0.0) cert.slackness_violation = std::max(cert.slackness_violation, std::abs(slack));
        }
    cert.certified = cert.dual_violation <= cert.tolerance && cert.slackness_violation <= cert.tolerance;
    cert.u = std::move(u);
    cert.v = std::move(v);
    return cert;
}

namespace detail {

class TransportationSimplex {
public:
    TransportationSimplex(std::span<const double> a, std::span<const double> b, const CostMatrix& c)
        : m_(a.size()), n_(b.size()), a_(a), b_(b), c_(c) {
        double scale = 1.0;
        for (double x : c.data()) scale = std::max(scale, x);
        const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(m_ + n_);
        eps_ = std::max(1e-12, rounding) * scale;
    }

    // Returns the number of pivots.
    std::size_t solve() {
        initial_basis();
        build_tree();
        std::size_t pivots = 0;
        std::size_t degenerate_run = 0;
        const std::size_t bland_after = 50;
        const std::size_t max_pivots = 200 * (m_ + n_) * (m_ + n_) + 10000;
        for (;;) {
            const bool bland = degenerate_run >= bland_after;
            const std::size_t entering = bland ? price_bland() : price_block();
            if (entering == npos) break;
            const bool degenerate = pivot(entering, bland);
            degenerate_run = degenerate ? degenerate_run + 1 : 0;
            if (++pivots > max_pivots) throw NumericalError("network simplex: pivot limit exceeded");
            build_tree();
        }
        return pivots;
    }

    Coupling coupling() const {
        Coupling out;
        out.rows = m_;
        out.cols = n_;
        out.pi.assign(m_ * n_, 0.0);
        out.row_marginal.assign(a_.begin(), a_.end());
        out.col_marginal.assign(b_.begin(), b_.end());
        for (const auto& arc : arcs_) out.pi[arc.i * n_ + arc.j] = arc.flow;
        return out;
    }

    std::vector<double> u() const { return {pot_.begin(), pot_.begin() + static_cast<std::ptrdiff_t>(m_)}; }
    std::vector<double> v() const { return {pot_.begin() + static_cast<std::ptrdiff_t>(m_), pot_.end()}; }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    struct Arc {
        std::size_t i, j;
        double flow;
    };

    std::size_t cell(const Arc& arc) const { return arc.i * n_ + arc.j; }

    // North-west corner rule; always yields m + n - 1 basic cells forming a tree,
    // with zero-flow cells where row and column are exhausted together.
    void initial_basis() {
        basic_.assign(m_ * n_, npos);
        arcs_.clear();
        std::size_t i = 0, j = 0;
        double ra = a_[0], rb = b_[0];
        for (;;) {
            const double x = std::max(0.0, std::min(ra, rb));
            basic_[i * n_ + j] = arcs_.size();
            arcs_.push_back({i, j, x});
            ra -= x;
            rb -= x;
            if (i + 1 == m_ && j + 1 == n_) break;
            const bool move_row = j + 1 == n_ || (i + 1 < m_ && ra < rb);
            if (move_row)
                ra = a_[++i];
            else
                rb = b_[++j];
        }
        adj_.assign(m_ + n_, {});
        for (std::size_t k = 0; k < arcs_.size(); ++k) {
            adj_[arcs_[k].i].push_back(k);
            adj_[m_ + arcs_[k].j].push_back(k);
        }
    }

    // Potentials u_i (nodes 0..m-1) and v_j (nodes m..m+n-1) with u_0 = 0 and
    // u_i + v_j = c_ij on every basic cell, plus parent links for cycle search.
    void build_tree() {
        const std::size_t N = m_ + n_;
        pot_.assign(N, 0.0);
        parent_arc_.assign(N, npos);
        parent_node_.assign(N, npos);
        depth_.assign(N, npos);
        queue_.clear();
        queue_.push_back(0);
        depth_[0] = 0;
        for (std::size_t h = 0; h < queue_.size(); ++h) {
            const std::size_t node = queue_[h];
            for (std::size_t k : adj_[node]) {
                const Arc& arc = arcs_[k];
                const std::size_t other = node < m_ ? m_ + arc.j : arc.i;
                if (depth_[other] != npos) continue;
                depth_[other] = depth_[node] + 1;
                parent_arc_[other] = k;
                parent_node_[other] = node;
                pot_[other] = c_(arc.i, arc.j) - pot_[node];
                queue_.push_back(other);
            }
        }
        if (queue_.size() != N) throw NumericalError("network simplex: basis is not a spanning tree");
    }

    double reduced(std::size_t i, std::size_t j) const { return c_(i, j) - pot_[i] - pot_[m_ + j]; }

    // Block search: scan blocks of about sqrt(mn) cells from where the last search
    // stopped and take the most negative reduced cost in the first block that has one.
    std::size_t price_block() {
        const std::size_t total = m_ * n_;
        const std::size_t block = std::max<std::size_t>(32, static_cast<std::size_t>(std::sqrt(double(total))));
        std::size_t best = npos;
        double best_r = -eps_;
        std::size_t scanned = 0, in_block = 0;
        while (scanned < total) {
            const std::size_t k = cursor_;
            cursor_ = cursor_ + 1 == total ? 0 : cursor_ + 1;
            ++scanned;
            if (basic_[k] == npos) {
                const double r = reduced(k / n_, k % n_);
                if (r < best_r) {
                    best_r = r;
                    best = k;
                }
            }
            if (++in_block == block) {
                if (best != npos) return best;
                in_block = 0;
            }
        }
        return best;
    }

    // Bland: lowest-index cell with negative reduced cost.
    std::size_t price_bland() const {
        for (std::size_t k = 0; k < m_ * n_; ++k)
            if (basic_[k] == npos && reduced(k / n_, k % n_) < -eps_) return k;
        return npos;
    }

    // Pushes flow around the cycle closed by the entering cell. Leaving arc is the
    // minimum-flow backward arc, ties broken by lowest cell index. Returns true for
    // a degenerate (zero-step) pivot.
    bool pivot(std::size_t entering, bool /*bland*/) {
        const std::size_t ei = entering / n_, ej = entering % n_;
        std::size_t x = m_ + ej;  // walk from the column node ...
        std::size_t y = ei;       // ... and from the row node up to their common ancestor
        path_x_.clear();
        path_y_.clear();
        while (depth_[x] > depth_[y]) {
            path_x_.push_back(parent_arc_[x]);
            x = parent_node_[x];
        }
        while (depth_[y] > depth_[x]) {
            path_y_.push_back(parent_arc_[y]);
            y = parent_node_[y];
        }
        while (x != y) {
            path_x_.push_back(parent_arc_[x]);
            x = parent_node_[x];
            path_y_.push_back(parent_arc_[y]);
            y = parent_node_[y];
        }
        // Cycle order after the entering arc: path_x_ then path_y_ reversed; signs alternate -, +, -, ...
        cycle_.assign(path_x_.begin(), path_x_.end());
        cycle_.insert(cycle_.end(), path_y_.rbegin(), path_y_.rend());

        double theta = infinity;
        std::size_t leave = npos;
        for (std::size_t k = 0; k < cycle_.size(); k += 2) {
            const Arc& arc = arcs_[cycle_[k]];
            if (arc.flow < theta || (arc.flow == theta && cell(arc) < cell(arcs_[leave]))) {
                theta = arc.flow;
                leave = cycle_[k];
            }
        }
        for (std::size_t k = 0; k < cycle_.size(); ++k) {
            Arc& arc = arcs_[cycle_[k]];
            if (k % 2 == 0)
                arc.flow = std::max(0.0, arc.flow - theta);
            else
                arc.flow += theta;
        }

        Arc& out = arcs_[leave];
        basic_[cell(out)] = npos;
        erase_adj(out.i, leave);
        erase_adj(m_ + out.j, leave);
        out = Arc{ei, ej, theta};
        basic_[entering] = leave;
        adj_[ei].push_back(leave);
        adj_[m_ + ej].push_back(leave);
        return theta == 0.0;
    }

    void erase_adj(std::size_t node, std::size_t arc) {
        auto& list = adj_[node];
        list.erase(std::find(list.begin(), list.end(), arc));
    }

    std::size_t m_, n_;
    std::span<const double> a_, b_;
    const CostMatrix& c_;
    double eps_;
    std::vector<std::size_t> basic_;  // cell -> arc id or npos
    std::vector<Arc> arcs_;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<double> pot_;
    std::vector<std::size_t> parent_arc_, parent_node_, depth_, queue_;
    std::vector<std::size_t> path_x_, path_y_, cycle_;
    std::size_t cursor_ = 0;
};

// O(n^3) Hungarian method with potentials (u_i + v_j <= c_ij throughout).
struct AssignmentSolution {
    std::vector<std::size_t> row_of_col;
    std::vector<double> u, v;
    std::size_t augmentations = 0;
};

inline AssignmentSolution hungarian(const CostMatrix& c) {
    const std::size_t n = c.rows();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), infinity);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = infinity;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    AssignmentSolution s;
    s.augmentations = n;
    s.row_of_col.resize(n);
    for (std::size_t j = 1; j <= n; ++j) s.row_of_col[j - 1] = p[j] - 1;
    s.u.assign(u.begin() + 1, u.end());
    s.v.assign(v.begin() + 1, v.end());
    return s;
}

inline bool uniform_square(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) return false;
    const double w = 1.0 / static_cast<double>(a.size());
    auto near = [w](double x) { return std::abs(x - w) <= 1e-15; };
    return std::all_of(a.begin(), a.end(), near) && std::all_of(b.begin(), b.end(), near);
}

}  // namespace detail

// Solves the transportation problem for raw marginals. Cost entries must be finite
// and non-negative (ValidationError otherwise); marginals that are negative or do
// not both sum to one are reported as infeasible_input.
inline SolveResult solve_transport(std::span<const double> supply, std::span<const double> demand, const CostMatrix& cost,
                                   SolverMethod method = SolverMethod::automatic) {
    if (cost.rows() != supply.size() || cost.cols() != demand.size())
        throw ValidationError("solve_transport: cost matrix is " + std::to_string(cost.rows()) + "x" +
                              std::to_string(cost.cols()) + " for marginals of size " + std::to_string(supply.size()) +
                              " and " + std::to_string(demand.size()));
    for (std::size_t i = 0; i < cost.rows(); ++i)
        for (std::size_t j = 0; j < cost.cols(); ++j)
            if (!std::isfinite(cost(i, j)) || cost(i, j) < 0.0)
                throw ValidationError("solve_transport: cost entry (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") is negative or not finite");

    SolveResult result;
    auto reject = [&](std::string why) {
        result.status = SolveStatus::infeasible_input;
        result.message = std::move(why);
        return result;
    };
    if (supply.empty() || demand.empty()) return reject("empty marginal");
    CompensatedSum sa, sb;
    for (double x : supply) {
        if (!(x >= 0.0) || !std::isfinite(x)) return reject("negative or non-finite supply");
        sa += x;
    }
    for (double x : demand) {
        if (!(x >= 0.0) || !std::isfinite(x)) return reject("negative or non-finite demand");
        sb += x;
    }
    if (std::abs(sa.value() - 1.0) > weight_tolerance || std::abs(sb.value() - 1.0) > weight_tolerance)
        return reject("marginals must both sum to 1 (unbalanced input)");

    if (method == SolverMethod::automatic)
        method = detail::uniform_square(supply, demand) ? SolverMethod::hungarian : SolverMethod::network_simplex;
    if (method == SolverMethod::hungarian && !detail::uniform_square(supply, demand))
        throw PreconditionError("solve_transport: the Hungarian method needs equal-size uniform marginals");

    std::vector<double> u, v;
    if (method == SolverMethod::hungarian) {
        const auto s = detail::hungarian(cost);
        Coupling& c = result.coupling;
        c.rows = c.cols = cost.rows();
        c.pi.assign(c.rows * c.cols, 0.0);
        c.row_marginal.assign(supply.begin(), supply.end());
        c.col_marginal.assign(demand.begin(), demand.end());
        for (std::size_t j = 0; j < c.cols; ++j) c.pi[s.row_of_col[j] * c.cols + j] = supply[s.row_of_col[j]];
        u = s.u;
        v = s.v;
        result.iterations = s.augmentations;
    } else {
        detail::TransportationSimplex simplex(supply, demand, cost);
        result.iterations = simplex.solve();
        result.coupling = simplex.coupling();
        u = simplex.u();
        v = simplex.v();
    }
    result.method = method;
    CompensatedSum total;
    for (std::size_t i = 0; i < cost.rows(); ++i)
        for (std::size_t j = 0; j < cost.cols(); ++j)
            if (result.coupling(i, j) > 0.0) total += cost(i, j) * result.coupling(i, j);
    result.cost = total.value();
    result.certificate = certify(cost, result.coupling, std::move(u), std::move(v));
    result.status = SolveStatus::optimal;
    return result;
}

// T_c(mu, nu) with a witness coupling pi* attaining it.
template <class Point>
SolveResult solve_kantorovich(const DiscreteMeasure<Point>& mu, const DiscreteMeasure<Point>& nu, const CostMatrix& cost,
                              SolverMethod method = SolverMethod::automatic) {
    return solve_transport(mu.weights(), nu.weights(), cost, method);
}

template <class Point, class Metric>
SolveResult solve_kantorovich(const DiscreteMeasure<Point>& mu, const DiscreteMeasure<Point>& nu, const CostFunction& C,
                              const Metric& d, SolverMethod method = SolverMethod::automatic) {
    return solve_transport(mu.weights(), nu.weights(), make_cost_matrix(mu, nu, C, d), method);
}

struct CouplingReport {
    double max_row_violation = 0.0;
    double max_col_violation = 0.0;
    double min_entry = 0.0;
    std::size_t negative_entries = 0;
    bool pass = false;
    double max_violation() const { return std::max(max_row_violation, max_col_violation); }
};

inline CouplingReport verify_coupling(const Coupling& pi, std::span<const double> mu, std::span<const double> nu,
                                      double tol) {
    if (pi.rows != mu.size() || pi.cols != nu.size())
        throw ValidationError("verify_coupling: coupling is " + std::to_string(pi.rows) + "x" + std::to_string(pi.cols) +
                              " for marginals of size " + std::to_string(mu.size()) + " and " + std::to_string(nu.size()));
    CouplingReport r;
    r.min_entry = pi.pi.empty() ? 0.0 : *std::min_element(pi.pi.begin(), pi.pi.end());
    std::vector<CompensatedSum> cols(pi.cols);
    for (std::size_t i = 0; i < pi.rows; ++i) {
        CompensatedSum row;
        for (std::size_t j = 0; j < pi.cols; ++j) {
            const double x = pi(i, j);
            if (x < 0.0) ++r.negative_entries;
            row += x;
            cols[j] += x;
        }
        r.max_row_violation = std::max(r.max_row_violation, std::abs(row.value() - mu[i]));
    }
    for (std::size_t j = 0; j < pi.cols; ++j)
        r.max_col_violation = std::max(r.max_col_violation, std::abs(cols[j].value() - nu[j]));
    r.pass = r.negative_entries == 0 && r.max_violation() <= tol;
    // Entries that are negative only at rounding level are tolerated.
    if (r.negative_entries > 0 && r.min_entry >= -tol && r.max_violation() <= tol) r.pass = true;
    return r;
}

template <class Point>
CouplingReport verify_coupling(const Coupling& pi, const DiscreteMeasure<Point>& mu, const DiscreteMeasure<Point>& nu,
                               double tol) {
    return verify_coupling(pi, mu.weights(), nu.weights(), tol);
}

// sum_i |a_i - b_i| on a common index set.
inline double total_variation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("total_variation: marginals on different index sets");
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s.value();
}

// Total variation norm sum_x |mu(x) - nu(x)| over the union of supports (range [0, 2]).
template <class Point>
double total_variation(const DiscreteMeasure<Point>& mu, const DiscreteMeasure<Point>& nu) {
    std::map<Point, std::pair<double, double>> merged;
    for (std::size_t i = 0; i < mu.size(); ++i) merged[mu.point(i)].first = mu.weight(i);
    for (std::size_t j = 0; j < nu.size(); ++j) merged[nu.point(j)].second = nu.weight(j);
    CompensatedSum s;
    for (const auto& [p, w] : merged) s += std::abs(w.first - w.second);
    return s.value();
}

// Cost matrix 2 * 1{x != y}, under which T_c is the total variation norm.
template <class Point>
CostMatrix tv_cost_matrix(const DiscreteMeasure<Point>& mu, const DiscreteMeasure<Point>& nu) {
    CostMatrix m(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) m(i, j) = mu.point(i) == nu.point(j) ? 0.0 : 2.0;
    return m;
}

struct PhiTvBound {
    double lhs = 0.0;       // |int phi dmu - int phi dnu|
    double tv = 0.0;
    double l_phi = 0.0;     // sup |phi| on the union of supports
    double rhs = 0.0;       // l_phi * tv
    bool holds = false;
};

// |int phi dmu - int phi dnu| <= L_phi ||mu - nu||_TV with L_phi = sup|phi| over both supports.
template <class Point, class Phi>
PhiTvBound phi_tv_bound(const Phi& phi, const DiscreteMeasure<Point>& mu, const DiscreteMeasure<Point>& nu) {
    PhiTvBound r;
    CompensatedSum im, in;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double v = phi(mu.point(i));
        if (!std::isfinite(v)) throw EvaluationError("phi_tv_bound: phi is not finite on the support of mu");
        im += mu.weight(i) * v;
        r.l_phi = std::max(r.l_phi, std::abs(v));
    }
    for (std::size_t j = 0; j < nu.size(); ++j) {
        const double v = phi(nu.point(j));
        if (!std::isfinite(v)) throw EvaluationError("phi_tv_bound: phi is not finite on the support of nu");
        in += nu.weight(j) * v;
        r.l_phi = std::max(r.l_phi, std::abs(v));
    }
    r.lhs = std::abs(im.value() - in.value());
    r.tv = total_variation(mu, nu);
    r.rhs = r.l_phi * r.tv;
    r.holds = r.lhs <= r.rhs + 1e-12;
    return r;
}

}  // namespace kantor
