// Monte Carlo W2 distance of normalized Rademacher sums to the standard Gaussian,
// with the distance measured for exact Gaussian draws of the same size subtracted off.

#include <cstdio>

#include "kantor/kantor.hpp"

int main() {
    using namespace kantor;
    ExperimentConfig cfg;
    cfg.model = SequenceModel::rademacher();
    cfg.ns = {2, 8, 32, 128};
    cfg.m = 20000;
    cfg.seed = 7;

    const auto curve = clt_distance_curve(cfg);
    std::printf("%6s %10s %10s %10s\n", "n", "dist", "floor", "excess");
    for (const auto& p : curve.points)
        std::printf("%6zu %10.5f %10.5f %10.5f\n", p.n, p.dist, p.floor, p.excess());
}
