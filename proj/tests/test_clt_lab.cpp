#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "kantor/clt_lab.hpp"

using namespace kantor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance(const std::vector<double>& v) {
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / (v.size() - 1);
}

ExperimentConfig config(SequenceModel model, std::vector<std::size_t> ns, std::size_t m, std::uint64_t seed) {
    ExperimentConfig c;
    c.model = model;
    c.ns = std::move(ns);
    c.m = m;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("streams are keyed and reproducible", "[clt][random]") {
    Stream a(1, 2, 3, 0), b(1, 2, 3, 0), c(1, 2, 4, 0), d(1, 2, 3, 1);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
        CHECK(x != d.next_u64());
    }
    Stream u(9, 0, 0, 0);
    double lo = 1.0, hi = 0.0, sum = 0.0, sq = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double v = u.uniform();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        const double z = u.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / 200000) < 4.0 / std::sqrt(200000.0));
    CHECK(std::abs(sq / 200000 - 1.0) < 4.0 * std::sqrt(2.0 / 200000));
}

TEST_CASE("sequence model moments", "[clt]") {
    CHECK(SequenceModel::rademacher(2).variance() == 4.0);
    CHECK(SequenceModel::rademacher(2).abs_moment(3) == 8.0);
    CHECK_THAT(SequenceModel::uniform(0, 2).variance(), WithinRel(1.0 / 3.0, 1e-15));
    CHECK_THAT(SequenceModel::uniform(0, 2).abs_moment(4), WithinRel(0.2, 1e-15));
    CHECK_THAT(SequenceModel::gaussian().abs_moment(3), WithinRel(1.5957691216057308, 1e-14));
    CHECK_THAT(SequenceModel::gaussian(2).abs_moment(4), WithinRel(48.0, 1e-14));
    CHECK_THAT(SequenceModel::ar1(0.5).abs_moment(2), WithinRel(1.0, 1e-14));
    CHECK(SequenceModel::ar1(0.5).associated());
    CHECK(SequenceModel::ar1(0.5).mixing());
    CHECK_FALSE(SequenceModel::ar1(0.5).iid());

    CHECK_THROWS_AS(SequenceModel::ar1(1.0), DomainError);
    CHECK_THROWS_AS(SequenceModel::ar1(0.0), DomainError);
    CHECK_THROWS_AS(SequenceModel::ar1(-0.3), DomainError);
    CHECK_THROWS_AS(SequenceModel::uniform(1, 1), DomainError);
}

TEST_CASE("model specs parse", "[clt]") {
    CHECK(parse_model("iid:rademacher").kind() == SequenceModel::Kind::rademacher);
    CHECK(parse_model("iid:rademacher:3").variance() == 9.0);
    CHECK(parse_model("iid:uniform:-1:1").kind() == SequenceModel::Kind::uniform);
    CHECK(parse_model("iid:gaussian").kind() == SequenceModel::Kind::gaussian);
    CHECK(parse_model("ar1:0.5").phi() == 0.5);
    CHECK(parse_model(parse_model("ar1:0.25:2").name()).name() == "ar1:0.25:2");
    CHECK_THROWS_AS(parse_model("ar1:1.5"), ValidationError);
    CHECK_THROWS_AS(parse_model("ar1:x"), ValidationError);
    CHECK_THROWS_AS(parse_model("iid:cauchy"), ValidationError);
    CHECK_THROWS_AS(parse_model(""), ValidationError);
}

TEST_CASE("sigma_n closed form", "[clt]") {
    CHECK(sigma_n(SequenceModel::rademacher(), 100) == 10.0);
    CHECK_THAT(sigma_n(SequenceModel::ar1(0.5), 2), WithinRel(std::sqrt(3.0), 1e-15));
    CHECK_THAT(sigma_n(SequenceModel::ar1(0.5), 1), WithinRel(1.0, 1e-15));
    for (double phi : {0.1, 0.5, 0.9, 0.99})
        for (std::size_t n : {1, 2, 3, 10, 100, 1000}) {
            double s = static_cast<double>(n);
            for (std::size_t j = 1; j < n; ++j) s += 2.0 * (n - j) * std::pow(phi, j);
            CHECK_THAT(sigma_n(SequenceModel::ar1(phi, 1.5), n), WithinRel(1.5 * std::sqrt(s), 1e-12));
        }
    for (std::size_t n : {1, 5, 50}) CHECK_THAT(sigma_n(SequenceModel::ar1(1e-12), n), WithinRel(std::sqrt(n), 1e-9));
}

TEST_CASE("path sums match the paths", "[clt]") {
    for (const auto& model : {SequenceModel::rademacher(), SequenceModel::uniform(-2, 1), SequenceModel::gaussian(3),
                              SequenceModel::ar1(0.7)}) {
        Stream a(5, 17, 0, 0), b(5, 17, 0, 0);
        std::vector<double> path(17);
        model.fill_path(a, path);
        CHECK_THAT(model.path_sum(b, 17), WithinAbs(std::accumulate(path.begin(), path.end(), 0.0), 1e-12));
    }
}

TEST_CASE("ar1 paths are stationary with positive covariances", "[clt]") {
    const auto model = SequenceModel::ar1(0.5, 2.0);
    const std::size_t m = 20000, len = 40;
    std::vector<double> x0, x20, x39, prod1, prod5;
    std::vector<double> path(len);
    for (std::size_t r = 0; r < m; ++r) {
        Stream s(11, len, r, 0);
        model.fill_path(s, path);
        x0.push_back(path[0]);
        x20.push_back(path[20]);
        x39.push_back(path[39]);
        prod1.push_back(path[20] * path[21]);
        prod5.push_back(path[20] * path[25]);
    }
    const double tol = 4.0 * std::sqrt(2.0 / m);
    for (const auto* v : {&x0, &x20, &x39}) {
        CHECK(std::abs(mean(*v)) < 4.0 * 2.0 / std::sqrt(m));
        CHECK(std::abs(variance(*v) / 4.0 - 1.0) < tol);
    }
    CHECK(std::abs(mean(prod1) / 4.0 - 0.5) < 0.05);
    CHECK(std::abs(mean(prod5) / 4.0 - 0.03125) < 0.03);
    CHECK(mean(prod1) > 0.0);
}

TEST_CASE("normalized sums have unit variance", "[clt][property]") {
    const std::size_t m = 20000;
    for (const auto& model : {SequenceModel::rademacher(), SequenceModel::uniform(-1, 3), SequenceModel::gaussian(2),
                              SequenceModel::ar1(0.5), SequenceModel::ar1(0.9)}) {
        const auto sums = sample_normalized_sums(config(model, {1, 2, 8, 32}, m, 3));
        REQUIRE(sums.size() == 4);
        for (const auto& s : sums) {
            INFO(model.name() << " n=" << s.n);
            CHECK(s.y.size() == m);
            CHECK(std::abs(variance(s.y) - 1.0) < 4.0 / std::sqrt(static_cast<double>(m)));
        }
    }
}

TEST_CASE("single Rademacher summand takes two values", "[clt]") {
    const auto s = sample_normalized_sums(config(SequenceModel::rademacher(), {1}, 10000, 8))[0];
    std::size_t plus = 0;
    for (double y : s.y) {
        CHECK((y == 1.0 || y == -1.0));
        plus += y > 0;
    }
    CHECK(std::abs(plus / 10000.0 - 0.5) < 4.0 * 0.5 / 100.0);
}

TEST_CASE("ar1 two-step variance", "[clt]") {
    auto c = config(SequenceModel::ar1(0.5), {2}, 50000, 21);
    const auto s = sample_sums(c, 2);
    CHECK(std::abs(variance(s) / 3.0 - 1.0) < 4.0 * std::sqrt(2.0 / 50000));
}

TEST_CASE("samples do not depend on the thread count", "[clt]") {
    auto c = config(SequenceModel::ar1(0.3), {1, 7, 64}, 3000, 99);
    const auto one = sample_normalized_sums(c);
    for (unsigned t : {2u, 3u, 8u}) {
        c.threads = t;
        const auto many = sample_normalized_sums(c);
        for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].y == many[i].y);
    }
    c.seed = 100;
    CHECK(sample_normalized_sums(c)[1].y != one[1].y);
}

TEST_CASE("experiment config validation", "[clt]") {
    auto c = config(SequenceModel::rademacher(), {4}, 999, 1);
    CHECK_THROWS_AS(sample_normalized_sums(c), ValidationError);
    c.m = 1000;
    CHECK_NOTHROW(c.validate());
    c.ns = {};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.ns = {0};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.ns = {1};
    c.threads = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("distance curves", "[clt][curve]") {
    SECTION("one Rademacher summand against gamma in W_1") {
        auto c = config(SequenceModel::rademacher(), {1}, 100000, 4);
        c.cost = CostFunction::power(1);
        const auto curve = clt_distance_curve(c);
        // int_0^1 |sign(t - 1/2) - Phi^{-1}(t)| dt
        CHECK_THAT(curve.points[0].dist, WithinAbs(0.535377321547880, 5e-3));
    }
    SECTION("Gaussian summands sit at the Monte Carlo floor") {
        const auto curve = clt_distance_curve(config(SequenceModel::gaussian(), {1, 4, 16}, 20000, 5));
        for (const auto& p : curve.points) {
            INFO("n=" << p.n);
            CHECK(std::abs(p.excess()) <= 3.0 * std::hypot(p.std_error, p.floor_stderr));
        }
    }
    SECTION("Rademacher curve decreases") {
        const auto curve = clt_distance_curve(config(SequenceModel::rademacher(), {2, 8, 32}, 20000, 6));
        CHECK(curve.points[0].dist > curve.points[1].dist);
        CHECK(curve.points[1].dist > curve.points[2].dist);
        CHECK(curve.points[0].excess() > 3.0 * curve.points[2].excess());
    }
    SECTION("total-cost mode reports T_c") {
        auto c = config(SequenceModel::rademacher(), {1}, 1000, 4);
        c.mode = DistanceMode::total_cost;
        const auto w = clt_distance_curve(c).points[0].dist;
        c.mode = DistanceMode::wasserstein;
        CHECK_THAT(clt_distance_curve(c).points[0].dist, WithinRel(std::sqrt(w), 1e-12));
    }
    SECTION("cost admissibility") {
        auto c = config(SequenceModel::rademacher(), {1}, 1000, 4);
        c.cost = CostFunction::exp_minus_one();
        CHECK_THROWS_AS(clt_distance_curve(c), PreconditionError);
        c.mode = DistanceMode::total_cost;
        CHECK(std::isfinite(clt_distance_curve(c).points[0].dist));
        c.cost = CostFunction::table({{0, 0}, {1, 2}, {2, 3}});
        CHECK_THROWS_AS(clt_distance_curve(c), PreconditionError);
    }
}

TEST_CASE("Rosenthal bounds", "[clt][moments]") {
    const auto rad = SequenceModel::rademacher();
    // E S_n^2 = n sigma^2 sits below any bound with K(2) >= 1
    CHECK(rosenthal_constant(2) >= 1.0);
    for (std::size_t n : {1, 5, 50}) CHECK(rosenthal_check_exact(rad, n, 2, n, RosenthalMode::generic).holds());

    const double bound = rosenthal_bound(rad, 10, 4, RosenthalMode::explicit_);
    CHECK_THAT(bound, WithinRel(256.0 * 10 + 4.0 * 64.0 / 16.0 * std::exp(4.0) * 100.0, 1e-14));
    const auto exact = rosenthal_check_exact(rad, 10, 4, 3.0 * 100 - 2.0 * 10, RosenthalMode::explicit_);
    CHECK(exact.holds());
    CHECK(exact.records[0].empirical == 280.0);
    CHECK(rosenthal_bound(rad, 10, 4, RosenthalMode::generic) >= bound);

    auto c = config(rad, {10}, 100000, 12);
    const auto sums = sample_sums(c, 10);
    const auto mc = rosenthal_check(rad, 10, 4, sums, RosenthalMode::explicit_);
    CHECK(std::abs(mc.records[0].empirical - 280.0) < 3.0 * mc.records[0].std_error);
    CHECK(mc.holds());
    CHECK(mc.records[0].normalized_empirical <= mc.records[0].normalized_bound);

    for (const auto& model : {SequenceModel::rademacher(2), SequenceModel::uniform(-1, 1), SequenceModel::gaussian()}) {
        auto cm = config(model, {16}, 40000, 13);
        const auto s = sample_sums(cm, 16);
        const auto r = rosenthal_check(model, 16, 2, s, RosenthalMode::generic);
        CHECK(std::abs(r.records[0].empirical / (16.0 * model.variance()) - 1.0) < 5.0 / std::sqrt(40000.0));
        CHECK(r.holds());
    }

    CHECK_THROWS_AS(rosenthal_bound(SequenceModel::ar1(0.5), 10, 4, RosenthalMode::generic), PreconditionError);
    CHECK_THROWS_AS(rosenthal_bound(rad, 10, 2.5, RosenthalMode::explicit_), DomainError);
    CHECK_THROWS_AS(rosenthal_bound(rad, 10, 1.0, RosenthalMode::generic), DomainError);
    CHECK_NOTHROW(rosenthal_bound(rad, 10, 2.5, RosenthalMode::generic));
}

TEST_CASE("Mann-Kendall statistic", "[clt][moments]") {
    const std::vector<double> up{1, 2, 3, 4, 5, 6, 7};
    const auto mk = mann_kendall(up);
    CHECK(mk.s == 21.0);
    CHECK_THAT(mk.variance, WithinRel(7.0 * 6.0 * 19.0 / 18.0, 1e-15));
    CHECK_THAT(mk.z, WithinRel(20.0 / std::sqrt(7.0 * 6.0 * 19.0 / 18.0), 1e-15));
    CHECK(mk.upward(mann_kendall_z_crit));

    const std::vector<double> down{7, 6, 5, 4, 3, 2, 1};
    CHECK(mann_kendall(down).z < 0);
    const std::vector<double> flat{2, 2, 2, 2};
    CHECK(mann_kendall(flat).z == 0.0);
    CHECK(mann_kendall(flat).variance == 0.0);

    const std::vector<double> ties{1, 2, 2, 3};
    const auto t = mann_kendall(ties);
    CHECK(t.s == 5.0);
    CHECK_THAT(t.variance, WithinRel((4.0 * 3 * 13 - 2.0 * 1 * 9) / 18.0, 1e-15));

    const std::vector<double> zigzag{1, 3, 2, 4, 3, 5, 4};
    CHECK(mann_kendall(zigzag).s == 13.0);
}

TEST_CASE("dependent moment ratios", "[clt][moments]") {
    const auto model = SequenceModel::ar1(0.5);
    const std::vector<std::size_t> ns{8, 32, 128};
    auto c = config(model, ns, 40000, 17);
    std::vector<std::vector<double>> sums;
    for (std::size_t n : ns) sums.push_back(sample_sums(c, n));

    // p = 2: ratio = Var(S_n)/n -> (1 + phi)/(1 - phi) = 3
    const auto r2 = dependent_moment_check(model, ns, sums, 2.0);
    for (const auto& r : r2.records) {
        const double exact = std::pow(sigma_n(model, r.n), 2) / r.n;
        CHECK(std::abs(r.ratio / exact - 1.0) < 4.0 * std::sqrt(2.0 / 40000));
        CHECK(r.ratio < 3.0 * 1.03);
    }
    const auto r3 = dependent_moment_check(model, ns, sums, 3.0, 100.0);
    CHECK(r3.k_hat > 0.0);
    CHECK(r3.k_hat == std::max({r3.records[0].ratio, r3.records[1].ratio, r3.records[2].ratio}));
    CHECK(r3.k_hat <= 100.0);
    CHECK(dependent_moment_check(model, ns, sums, 3.0, 1.0).k_override == 1.0);
    CHECK_FALSE(dependent_moment_check(model, ns, sums, 3.0, 1.0).holds());

    // iid reduces to the Rosenthal form
    const auto rad = SequenceModel::rademacher();
    auto ci = config(rad, ns, 40000, 18);
    std::vector<std::vector<double>> isums;
    for (std::size_t n : ns) isums.push_back(sample_sums(ci, n));
    for (const auto& r : dependent_moment_check(rad, ns, isums, 3.0).records)
        CHECK(r.ratio <= rosenthal_constant(3) * (std::pow(r.n, -0.5) + 1.0));

    CHECK_THROWS_AS(dependent_moment_check(model, ns, sums, 1.5), DomainError);
    CHECK_THROWS_AS(dependent_moment_check(model, {8}, sums, 3.0), ValidationError);
}

TEST_CASE("Yokoyama series", "[clt][mixing]") {
    const auto a = yokoyama_condition(AlphaEnvelope::geometric(1.0, std::exp(-1.0)), 4, 1, 100);
    CHECK(a.converged);
    CHECK_THAT(a.ratio_limit, WithinRel(std::exp(-0.2), 1e-14));

    const auto b = yokoyama_condition(AlphaEnvelope::power_law(1.0, 1.0), 3, 1, 1000);
    CHECK_FALSE(b.converged);
    CHECK_FALSE(b.terms_vanish);
    CHECK_THAT(b.exponent, WithinRel(0.25, 1e-14));

    const auto c = yokoyama_condition(AlphaEnvelope::geometric(2.0, 0.5), 3, 2, 200);
    CHECK(c.converged);
    CHECK(c.tail_bound < 1e-6);
    const auto longer = yokoyama_condition(AlphaEnvelope::geometric(2.0, 0.5), 3, 2, 5000);
    CHECK(longer.partial_sum >= c.partial_sum);
    CHECK(longer.partial_sum <= c.partial_sum + c.tail_bound);

    for (auto [p, d] : {std::pair{3.0, 1.0}, {4.0, 1.0}, {6.0, 2.0}}) {
        const auto g = yokoyama_condition(AlphaEnvelope::geometric(1.0, 0.5), p, d, 2000);
        CHECK(g.converged);
        CHECK(g.ratio_limit < 1.0);
        CHECK(g.tail_bound < 1e-12);
    }

    const auto conv = yokoyama_condition(AlphaEnvelope::power_law(1.0, 20.0), 3, 1, 1000);
    CHECK(conv.converged);
    const auto conv_long = yokoyama_condition(AlphaEnvelope::power_law(1.0, 20.0), 3, 1, 100000);
    CHECK(conv_long.partial_sum <= conv.partial_sum + conv.tail_bound);

    CHECK_THROWS_AS(yokoyama_condition(AlphaEnvelope::geometric(1.0, 1.0), 3, 1, 10), DomainError);
    CHECK_THROWS_AS(yokoyama_condition(AlphaEnvelope::geometric(1.0, 1.5), 3, 1, 10), DomainError);
    CHECK_THROWS_AS(yokoyama_condition(AlphaEnvelope::geometric(1.0, 0.5), 2, 1, 10), DomainError);
    CHECK_THROWS_AS(yokoyama_condition(AlphaEnvelope::geometric(1.0, 0.5), 3, 0, 10), DomainError);
}

TEST_CASE("Cox-Grimmett coefficient", "[clt][mixing]") {
    CHECK_THAT(cox_grimmett(SequenceModel::ar1(0.5), 1), WithinRel(2.0, 1e-15));
    CHECK(cox_grimmett(SequenceModel::gaussian(), 3) == 0.0);
    CHECK(cox_grimmett(SequenceModel::ar1(1e-9), 1) < 1e-8);
    for (double phi : {0.2, 0.5, 0.9}) {
        const auto model = SequenceModel::ar1(phi, 1.7);
        for (std::size_t n = 1; n < 40; ++n) {
            CHECK_THAT(cox_grimmett(model, n + 1) / cox_grimmett(model, n), WithinRel(phi, 1e-12));
            double tail = 0.0;  // 2 sum_{k > n} Cov(X_1, X_k), Cov = Var phi^{k-1}
            for (std::size_t k = 2000; k > n; --k) tail += 1.7 * 1.7 * std::pow(phi, k - 1);
            CHECK_THAT(cox_grimmett(model, n), WithinRel(2.0 * tail, 1e-12));
        }
    }

    const auto model = SequenceModel::ar1(0.5);
    const auto v = cox_grimmett_condition(model, 4, 1, 1e6);
    CHECK_THAT(v.exponent, WithinRel(5.0, 1e-15));
    double sup = 0.0;
    for (std::size_t n = 1; n < 2000; ++n) sup = std::max(sup, cox_grimmett(model, n) * std::pow(n, 5.0));
    CHECK_THAT(v.b_min, WithinRel(sup, 1e-12));
    CHECK(v.holds);
    CHECK_FALSE(cox_grimmett_condition(model, 4, 1, 0.5 * sup).holds);
}

TEST_CASE("even-moment series", "[clt][series]") {
    const auto rad = series_condition(rademacher_even_moments(), 40);
    CHECK(rad.verdict == SeriesVerdict::diverged_by_terms);
    for (std::size_t k = 1; k <= 40; ++k) CHECK_THAT(rad.log_terms[k - 1], WithinAbs(k * std::log(k), 1e-12));

    const auto gau = series_condition(gaussian_even_moments(), 60);
    CHECK(gau.verdict == SeriesVerdict::diverged_by_terms);
    double log_dfact = 0.0;  // log (2k-1)!!
    for (std::size_t k = 1; k <= 60; ++k) {
        log_dfact += std::log(2.0 * k - 1.0);
        CHECK_THAT(gau.log_terms[k - 1], WithinRel(k * std::log(k) + log_dfact, 1e-12));
    }
    CHECK(std::isinf(series_condition(gaussian_even_moments(), 200).partial_sums.back()));

    const auto zero = series_condition(zero_even_moments(), 20);
    CHECK(zero.verdict == SeriesVerdict::converged_by_ratio);
    for (double t : zero.terms) CHECK(t == 0.0);
    CHECK(zero.partial_sums.back() == 0.0);

    // t_k = 2^{-k}
    const auto geo = series_condition(
        [](std::size_t k) { return -static_cast<double>(k) * (std::log(k) + std::log(2.0)); }, 40);
    CHECK(geo.verdict == SeriesVerdict::converged_by_ratio);
    CHECK_THAT(geo.partial_sums.back(), WithinRel(1.0 - std::pow(2.0, -40), 1e-12));

    // t_k = 1/k^2: terms vanish, ratios tend to 1
    const auto slow = series_condition([](std::size_t k) { return -(k + 2.0) * std::log(k); }, 40);
    CHECK(slow.verdict == SeriesVerdict::inconclusive);

    CHECK_THROWS_AS(series_condition(zero_even_moments(), 3), DomainError);
}

TEST_CASE("exponential square moment", "[clt][series]") {
    const std::vector<double> zeros(1000, 0.0);
    const auto z = exp_moment_check(zeros);
    CHECK(z.mean == 1.0);
    CHECK(z.std_error == 0.0);

    std::vector<double> signs;
    for (int i = 0; i < 1000; ++i) signs.push_back(i % 3 ? 1.0 : -1.0);
    CHECK_THAT(exp_moment_check(signs).mean, WithinRel(std::exp(1.0 / 16.0), 1e-15));
    CHECK_THAT(std::exp(1.0 / 16.0), WithinRel(1.064494458917859, 1e-15));

    auto c = config(SequenceModel::gaussian(), {1}, 100000, 23);
    const auto g = exp_moment_check(sample_floor(c, 1));
    CHECK(g.finite);
    CHECK_THAT(g.target, WithinRel(1.0690449676496976, 1e-15));
    CHECK(std::abs(g.mean - g.target) <= 3.0 * g.std_error);

    const std::vector<double> huge{0.0, 200.0};
    CHECK_FALSE(exp_moment_check(huge).finite);
    CHECK_THROWS_AS(exp_moment_check(std::vector<double>{}), ValidationError);
}

TEST_CASE("model moment oracles and mixing envelopes") {
    // E U^2 = 1/3, E U^4 = 1/5 on [-1, 1]; scaled by h^{2k}.
    const auto u = model_even_moments(SequenceModel::uniform(-2.0, 2.0));
    CHECK_THAT(std::exp(u(1)), WithinRel(4.0 / 3.0, 1e-14));
    CHECK_THAT(std::exp(u(2)), WithinRel(16.0 / 5.0, 1e-14));
    CHECK_THAT(std::exp(model_even_moments(SequenceModel::rademacher(3.0))(2)), WithinRel(81.0, 1e-14));
    CHECK_THAT(std::exp(model_even_moments(SequenceModel::ar1(0.5, 2.0))(2)), WithinRel(3.0 * 16.0, 1e-13));
    CHECK(series_condition(model_even_moments(SequenceModel::uniform(-1.0, 1.0)), 64).verdict ==
          SeriesVerdict::diverged_by_terms);

    CHECK_FALSE(alpha_envelope(SequenceModel::gaussian()).has_value());
    const auto env = alpha_envelope(SequenceModel::ar1(0.5));
    REQUIRE(env.has_value());
    CHECK(env->kind == AlphaEnvelope::Kind::geometric);
    CHECK((*env)(3) == 0.25 * 0.125);
}
