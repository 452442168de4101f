// Transport between two discrete measures on the line, solved twice: through the
// quantile coupling and as a certified LP. Reads the two atom files given on the
// command line, or falls back to samples/data/{mu,nu}.json.

#include <cstdio>
#include <string>

#include "kantor/io.hpp"
#include "kantor/kantor.hpp"

int main(int argc, char** argv) {
    using namespace kantor;
    const std::string dir = KANTOR_SAMPLE_DATA;
    const auto mu_file = io::read_measure(argc > 1 ? argv[1] : dir + "/mu.json");
    const auto nu_file = io::read_measure(argc > 2 ? argv[2] : dir + "/nu.json");
    if (!mu_file.on_line() || !nu_file.on_line()) {
        std::fprintf(stderr, "both inputs must be measures on the line\n");
        return 1;
    }
    const auto mu = mu_file.line->to_measure(), nu = nu_file.line->to_measure();

    for (const auto& C : {CostFunction::power(1), CostFunction::power(2), CostFunction::exp_minus_one()}) {
        const double closed = transport_cost_convex(*mu_file.line, *nu_file.line, C);
        const auto lp = solve_kantorovich(mu, nu, make_cost_matrix(mu, nu, C));
        std::printf("%-10s quantile %.12g   lp %.12g   certified %s\n", C.name().c_str(), closed, lp.cost,
                    lp.certificate.certified ? "yes" : "no");
    }

    const auto lp = solve_kantorovich(mu, nu, make_cost_matrix(mu, nu, CostFunction::power(2)));
    std::printf("\noptimal plan for power:2\n");
    for (std::size_t i = 0; i < lp.coupling.rows; ++i) {
        for (std::size_t j = 0; j < lp.coupling.cols; ++j) std::printf("  %8.4f", lp.coupling(i, j));
        std::printf("\n");
    }
}
