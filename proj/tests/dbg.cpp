#include <elldimer/gibbs.hpp>
#include "fixtures.hpp"
#include <cstdio>
#include <cmath>
using namespace elldimer;
int main() {
    auto sys = fixtures::hexagonal();
    PhasePoint liq = PhasePoint::classify(*sys.ws, cx(0.9, 0.38));
    for (auto dir : {std::pair{2,1}, {1,0}, {3,1}}) {
        std::printf("direction (%d,%d):\n", dir.first, dir.second);
        for (int k = 3; k <= 14; k += 1) {
            int dx = dir.first * k, dy = dir.second * k;
            auto r = liquid_asymptotics(*sys.ws, liq, cover_vertex(1), cover_vertex(0, {dx, dy}));
            KernelFunction kf = g_factorized(*sys.ws, cover_vertex(1), cover_vertex(0, {dx, dy}));
            double gmag = std::abs(kf.eval(liq.u0));
            std::printf("  N=%3d dev/|g|=%.4e  |pred|/|g|=%.4e  dev*N^1.5/|g|=%.4f\n",
                        r.distance, r.abs_deviation / gmag, std::abs(r.predicted) / gmag,
                        r.abs_deviation / gmag * std::pow((double)r.distance, 1.5));
        }
    }
    return 0;
}
