#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "kantor/ot_exact.hpp"
#include "kantor/ot_lp.hpp"

using namespace kantor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, int max_k = 16) {
    std::uniform_int_distribution<int> k(1, max_k);
    std::vector<int> ks(n);
    int den = 0;
    for (int& x : ks) den += (x = k(rng));
    std::vector<double> w;
    for (int x : ks) w.push_back(static_cast<double>(x) / den);
    return w;
}

std::vector<double> random_points(std::mt19937_64& rng, std::size_t n, double spread) {
    std::uniform_real_distribution<double> u(-spread, spread);
    std::vector<double> v;
    while (v.size() < n) {
        const double x = u(rng);
        if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
    }
    std::sort(v.begin(), v.end());
    return v;
}

CostMatrix random_costs(std::mt19937_64& rng, std::size_t m, std::size_t n, bool integer) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    CostMatrix c(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c(i, j) = integer ? std::floor(u(rng)) : u(rng);
    return c;
}

// Minimum over all basic feasible solutions, found by enumerating every set of
// m + n - 1 cells and peeling leaves. Exponential; for m, n <= 3.
double brute_force_transport(std::span<const double> a, std::span<const double> b, const CostMatrix& c) {
    const std::size_t m = a.size(), n = b.size(), cells = m * n, k = m + n - 1;
    double best = infinity;
    std::vector<int> pick(cells, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), 1);
    std::sort(pick.begin(), pick.end());
    do {
        std::vector<double> ra(a.begin(), a.end()), rb(b.begin(), b.end());
        std::vector<char> open(cells);
        for (std::size_t e = 0; e < cells; ++e) open[e] = static_cast<char>(pick[e]);
        std::vector<double> flow(cells, 0.0);
        bool progress = true, ok = true;
        std::size_t remaining = k;
        while (remaining > 0 && progress) {
            progress = false;
            for (std::size_t i = 0; i < m && !progress; ++i) {
                std::size_t cnt = 0, last = 0;
                for (std::size_t j = 0; j < n; ++j)
                    if (open[i * n + j]) ++cnt, last = j;
                if (cnt == 1) {
                    flow[i * n + last] = ra[i];
                    rb[last] -= ra[i];
                    ra[i] = 0.0;
                    open[i * n + last] = 0;
                    --remaining;
                    progress = true;
                }
            }
            for (std::size_t j = 0; j < n && !progress; ++j) {
                std::size_t cnt = 0, last = 0;
                for (std::size_t i = 0; i < m; ++i)
                    if (open[i * n + j]) ++cnt, last = i;
                if (cnt == 1) {
                    flow[last * n + j] = rb[j];
                    ra[last] -= rb[j];
                    rb[j] = 0.0;
                    open[last * n + j] = 0;
                    --remaining;
                    progress = true;
                }
            }
        }
        if (remaining > 0) continue;  // cells contain a cycle
        for (double f : flow) ok = ok && f >= -1e-12;
        for (double r : ra) ok = ok && std::abs(r) <= 1e-12;
        for (double r : rb) ok = ok && std::abs(r) <= 1e-12;
        if (!ok) continue;
        double cost = 0.0;
        for (std::size_t e = 0; e < cells; ++e) cost += flow[e] * c(e / n, e % n);
        best = std::min(best, cost);
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
}

double recomputed_cost(const SolveResult& r, const CostMatrix& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j) s += c(i, j) * r.coupling(i, j);
    return s;
}

void check_solution(const SolveResult& r, std::span<const double> a, std::span<const double> b, const CostMatrix& c) {
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.certificate.certified);
    CHECK(verify_coupling(r.coupling, a, b, 1e-10).pass);
    CHECK_THAT(r.cost, WithinAbs(recomputed_cost(r, c), 1e-10 * std::max(1.0, std::abs(r.cost))));
    CHECK(r.coupling.positive_entries() <= a.size() + b.size() - 1);
}

}  // namespace

TEST_CASE("solver examples", "[ot_lp]") {
    SECTION("two diracs") {
        const LineMeasure x = LineMeasure::dirac(0.0), y = LineMeasure::dirac(1.0);
        CostMatrix c(1, 1, 7.0);
        const auto r = solve_kantorovich(x, y, c);
        REQUIRE(r.status == SolveStatus::optimal);
        CHECK(r.cost == 7.0);
        CHECK(r.coupling(0, 0) == 1.0);
        CHECK(r.certificate.certified);
    }
    SECTION("identical measures with zero diagonal") {
        const LineMeasure mu({0, 1, 2}, {0.2, 0.3, 0.5});
        const auto c = make_cost_matrix(mu, mu, CostFunction::power(2));
        const auto r = solve_kantorovich(mu, mu, c);
        CHECK(r.cost == 0.0);
        for (std::size_t i = 0; i < 3; ++i) CHECK(r.coupling(i, i) == mu.weight(i));
        check_solution(r, mu.weights(), mu.weights(), c);
    }
    SECTION("two-by-two line instance") {
        const LineMeasure mu({0, 1}, {0.5, 0.5}), nu({0, 2}, {0.5, 0.5});
        const auto c = make_cost_matrix(mu, nu, CostFunction::power(1));
        const auto r = solve_kantorovich(mu, nu, c, SolverMethod::network_simplex);
        CHECK_THAT(r.cost, WithinAbs(0.5, 1e-15));
        CHECK_THAT(r.cost, WithinAbs(brute_force_transport(mu.weights(), nu.weights(), c), 1e-15));
        check_solution(r, mu.weights(), nu.weights(), c);
        const auto h = solve_kantorovich(mu, nu, c, SolverMethod::hungarian);
        CHECK(h.method == SolverMethod::hungarian);
        CHECK_THAT(h.cost, WithinAbs(0.5, 1e-15));
    }
}

TEST_CASE("solver input validation", "[ot_lp]") {
    const std::vector<double> a{0.5, 0.5}, b{1.0};
    CostMatrix c(2, 1, 1.0);
    c(1, 0) = -1.0;
    CHECK_THROWS_AS(solve_transport(a, b, c), ValidationError);
    c(1, 0) = infinity;
    CHECK_THROWS_AS(solve_transport(a, b, c), ValidationError);
    CHECK_THROWS_AS(solve_transport(a, b, CostMatrix(1, 1)), ValidationError);

    const std::vector<double> heavy{0.5, 0.6};
    const auto r = solve_transport(heavy, b, CostMatrix(2, 1, 1.0));
    CHECK(r.status == SolveStatus::infeasible_input);
    CHECK(std::isnan(r.cost));
    CHECK_THROWS_AS(solve_transport(a, b, CostMatrix(2, 1, 1.0), SolverMethod::hungarian), PreconditionError);
}

TEST_CASE("network simplex matches vertex enumeration", "[ot_lp][property]") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> dim(1, 3);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t m = dim(rng), n = dim(rng);
        const auto a = random_weights(rng, m, trial % 2 ? 4 : 16);
        const auto b = random_weights(rng, n, trial % 2 ? 4 : 16);
        const auto c = random_costs(rng, m, n, trial % 3 == 0);
        const auto r = solve_transport(a, b, c, SolverMethod::network_simplex);
        check_solution(r, a, b, c);
        CHECK_THAT(r.cost, WithinAbs(brute_force_transport(a, b, c), 1e-12));
    }
}

TEST_CASE("network simplex matches the quantile formula on the line", "[ot_lp][property]") {
    std::mt19937_64 rng(32);
    std::uniform_int_distribution<std::size_t> dim(1, 8);
    const std::vector<CostFunction> costs{CostFunction::power(1), CostFunction::power(2), CostFunction::power(3),
                                          CostFunction::exp_minus_one()};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = dim(rng), n = dim(rng);
        const LineMeasure mu(random_points(rng, m, 3.0), random_weights(rng, m));
        const LineMeasure nu(random_points(rng, n, 3.0), random_weights(rng, n));
        for (const auto& C : costs) {
            const auto c = make_cost_matrix(mu, nu, C);
            const auto r = solve_kantorovich(mu, nu, c, SolverMethod::network_simplex);
            check_solution(r, mu.weights(), nu.weights(), c);
            const double closed =
                transport_cost_convex(Distribution1D::from_measure(mu), Distribution1D::from_measure(nu), C);
            CHECK_THAT(r.cost, WithinAbs(closed, 1e-9));
        }
    }
}

TEST_CASE("Hungarian and network simplex agree on uniform square instances", "[ot_lp][property]") {
    std::mt19937_64 rng(33);
    std::uniform_int_distribution<std::size_t> dim(2, 40);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = dim(rng);
        const std::vector<double> w(n, 1.0 / static_cast<double>(n));
        const auto c = random_costs(rng, n, n, trial % 2 == 0);
        const auto h = solve_transport(w, w, c, SolverMethod::hungarian);
        const auto s = solve_transport(w, w, c, SolverMethod::network_simplex);
        check_solution(h, w, w, c);
        check_solution(s, w, w, c);
        CHECK_THAT(h.cost, WithinAbs(s.cost, 1e-10));
        CHECK(solve_transport(w, w, c).method == SolverMethod::hungarian);
    }
}

TEST_CASE("degenerate instances terminate with certificates", "[ot_lp]") {
    SECTION("all-zero costs") {
        const std::vector<double> w(20, 0.05);
        const auto r = solve_transport(w, w, CostMatrix(20, 20, 0.0), SolverMethod::network_simplex);
        check_solution(r, w, w, CostMatrix(20, 20, 0.0));
        CHECK(r.cost == 0.0);
    }
    SECTION("constant costs with highly degenerate marginals") {
        std::vector<double> a(30, 1.0 / 30), b(15, 1.0 / 15);
        const CostMatrix c(30, 15, 3.0);
        const auto r = solve_transport(a, b, c);
        check_solution(r, a, b, c);
        CHECK_THAT(r.cost, WithinAbs(3.0, 1e-12));
    }
    SECTION("integer costs, uniform marginals, many ties") {
        std::mt19937_64 rng(34);
        std::uniform_int_distribution<int> u(0, 2);
        for (int trial = 0; trial < 20; ++trial) {
            CostMatrix c(25, 35);
            for (std::size_t i = 0; i < 25; ++i)
                for (std::size_t j = 0; j < 35; ++j) c(i, j) = u(rng);
            const std::vector<double> a(25, 1.0 / 25), b(35, 1.0 / 35);
            check_solution(solve_transport(a, b, c), a, b, c);
        }
    }
    SECTION("zero entries in the marginals") {
        const std::vector<double> a{0.0, 0.5, 0.5, 0.0}, b{0.25, 0.0, 0.75};
        std::mt19937_64 rng(35);
        const auto c = random_costs(rng, 4, 3, false);
        const auto r = solve_transport(a, b, c);
        check_solution(r, a, b, c);
    }
}

TEST_CASE("larger random instances are certified", "[ot_lp][property]") {
    std::mt19937_64 rng(36);
    for (auto [m, n] : {std::pair<std::size_t, std::size_t>{60, 80}, {150, 120}, {300, 300}}) {
        const auto a = random_weights(rng, m, 100);
        const auto b = random_weights(rng, n, 100);
        const auto c = random_costs(rng, m, n, false);
        const auto r = solve_transport(a, b, c, SolverMethod::network_simplex);
        check_solution(r, a, b, c);
    }
}

TEST_CASE("large-magnitude exponential costs are certified relative to their scale", "[ot_lp]") {
    std::mt19937_64 rng(37);
    const LineMeasure mu(random_points(rng, 12, 30.0), random_weights(rng, 12));
    const LineMeasure nu(random_points(rng, 9, 30.0), random_weights(rng, 9));
    const auto c = make_cost_matrix(mu, nu, CostFunction::exp_minus_one());
    const auto r = solve_kantorovich(mu, nu, c);
    check_solution(r, mu.weights(), nu.weights(), c);
    const double closed = transport_cost_convex(Distribution1D::from_measure(mu), Distribution1D::from_measure(nu),
                                                CostFunction::exp_minus_one());
    CHECK_THAT(r.cost, WithinRel(closed, 1e-12));
}

TEST_CASE("scaling the costs scales the optimum", "[ot_lp][property]") {
    std::mt19937_64 rng(38);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_weights(rng, 6);
        const auto b = random_weights(rng, 7);
        const auto c = random_costs(rng, 6, 7, false);
        const double base = solve_transport(a, b, c).cost;
        for (double s : {0.5, 3.0, 1e4}) {
            const auto r = solve_transport(a, b, c.scaled(s));
            CHECK_THAT(r.cost, WithinRel(s * base, 1e-12));
            // the original optimiser stays optimal for the scaled problem
            CHECK_THAT(recomputed_cost(solve_transport(a, b, c), c.scaled(s)), WithinRel(r.cost, 1e-12));
        }
    }
}

TEST_CASE("certificate rejects a suboptimal coupling", "[ot_lp]") {
    const std::vector<double> a{0.5, 0.5}, b{0.5, 0.5};
    CostMatrix c(2, 2);
    c(0, 0) = 0;
    c(0, 1) = 1;
    c(1, 0) = 1;
    c(1, 1) = 0;
    Coupling anti{2, 2, {0.0, 0.5, 0.5, 0.0}, a, b};
    const auto cert = certify(c, anti, {0.0, 0.0}, {1.0, 1.0});
    CHECK_FALSE(cert.certified);
    CHECK(cert.dual_violation == 1.0);
}

TEST_CASE("verify_coupling reports violations", "[ot_lp]") {
    const std::vector<double> mu{0.5, 0.5};
    Coupling diag{2, 2, {0.5, 0.0, 0.0, 0.5}, mu, mu};
    CHECK(verify_coupling(diag, mu, mu, 1e-10).pass);

    Coupling off{2, 2, {0.6, 0.0, 0.0, 0.5}, mu, mu};
    const auto r = verify_coupling(off, mu, mu, 1e-10);
    CHECK_FALSE(r.pass);
    CHECK_THAT(r.max_violation(), WithinAbs(0.1, 1e-15));

    Coupling neg{2, 2, {0.6, -0.1, -0.1, 0.6}, mu, mu};
    const auto rn = verify_coupling(neg, mu, mu, 1e-10);
    CHECK_FALSE(rn.pass);
    CHECK(rn.negative_entries == 2);

    CHECK_THROWS_AS(verify_coupling(diag, std::vector<double>{1.0}, mu, 1e-10), ValidationError);
}

TEST_CASE("total variation examples", "[ot_lp][tv]") {
    const LineMeasure mu({0, 1}, {0.75, 0.25}), nu({0, 1}, {0.5, 0.5});
    CHECK(total_variation(mu, mu) == 0.0);
    CHECK(total_variation(mu, LineMeasure({5, 6}, {0.5, 0.5})) == 2.0);
    CHECK(total_variation(mu, nu) == 0.5);
    CHECK_THAT(solve_kantorovich(mu, nu, tv_cost_matrix(mu, nu)).cost, WithinAbs(0.5, 1e-15));
    CHECK(total_variation(std::vector<double>{0.75, 0.25}, std::vector<double>{0.5, 0.5}) == 0.5);
}

TEST_CASE("total variation equals the LP under the indicator cost", "[ot_lp][tv][property]") {
    std::mt19937_64 rng(39);
    std::uniform_int_distribution<std::size_t> dim(1, 8);
    std::uniform_int_distribution<int> pt(0, 9);
    for (int trial = 0; trial < 300; ++trial) {
        auto draw = [&](std::size_t n) {
            std::vector<std::size_t> s;
            while (s.size() < n) {
                const auto x = static_cast<std::size_t>(pt(rng));
                if (std::find(s.begin(), s.end(), x) == s.end()) s.push_back(x);
            }
            return SpaceMeasure(s, random_weights(rng, n));
        };
        const auto mu = draw(dim(rng));
        const auto nu = draw(dim(rng));
        const auto c = tv_cost_matrix(mu, nu);
        const auto r = solve_kantorovich(mu, nu, c);
        check_solution(r, mu.weights(), nu.weights(), c);
        const double tv = total_variation(mu, nu);
        CHECK_THAT(r.cost, WithinAbs(tv, 1e-10));
        CHECK(tv >= 0.0);
        CHECK(tv <= 2.0 + 1e-15);
        // the indicator cost goes through the generic path too
        const auto s = MetricSpaceFinite::from_matrix([] {
            std::vector<std::vector<double>> d(10, std::vector<double>(10, 1.0));
            for (std::size_t i = 0; i < 10; ++i) d[i][i] = 0.0;
            return d;
        }());
        auto dist = [&](std::size_t i, std::size_t j) { return s(i, j); };
        CHECK_THAT(solve_kantorovich(mu, nu, CostFunction::tv_indicator(), dist).cost, WithinAbs(tv, 1e-10));
    }
}

TEST_CASE("phi-TV bound", "[ot_lp][tv]") {
    const LineMeasure mu({0, 1}, {0.5, 0.5});
    const auto d0 = LineMeasure::dirac(0.0);
    const auto r = phi_tv_bound([](double x) { return x; }, mu, d0);
    CHECK(r.lhs == 0.5);
    CHECK(r.tv == 1.0);
    CHECK(r.l_phi == 1.0);
    CHECK(r.rhs == 1.0);
    CHECK(r.holds);

    const auto same = phi_tv_bound([](double x) { return x * x; }, mu, mu);
    CHECK(same.lhs == 0.0);
    CHECK(same.rhs == 0.0);
    CHECK(same.holds);

    const auto k = phi_tv_bound([](double) { return 4.0; }, mu, d0);
    CHECK(k.lhs == 0.0);
    CHECK(k.holds);

    CHECK_THROWS_AS(phi_tv_bound([](double) { return infinity; }, mu, d0), EvaluationError);
}

TEST_CASE("phi-TV bound holds on random instances", "[ot_lp][tv][property]") {
    std::mt19937_64 rng(40);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const LineMeasure mu(random_points(rng, 5, 4.0), random_weights(rng, 5));
        const LineMeasure nu(random_points(rng, 4, 4.0), random_weights(rng, 4));
        const double a = u(rng), b = u(rng);
        CHECK(phi_tv_bound([&](double x) { return std::sin(a * x) + b; }, mu, nu).holds);
    }
}
