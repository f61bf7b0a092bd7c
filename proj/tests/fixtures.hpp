// Shared test fixtures: the builtin graphs with their standard half-angle
// maps and parameters.

#ifndef ELLDIMER_TEST_FIXTURES_HPP
#define ELLDIMER_TEST_FIXTURES_HPP

#include <elldimer/kasteleyn.hpp>

#include <cmath>
#include <memory>
#include <random>

namespace fixtures {

using namespace elldimer;

struct System {
    std::shared_ptr<BipartiteGraph> graph;
    std::shared_ptr<EllipticParams> params;
    HalfAngleMap angles;
    std::shared_ptr<WeightSystem> ws;
};

inline HalfAngleMap angles_by_class(const BipartiteGraph& g,
                                    const std::vector<std::pair<Offset, double>>& table) {
    HalfAngleMap am;
    am.alpha.assign(g.tracks().size(), 0);
    for (const auto& t : g.tracks())
        for (const auto& [cls, a] : table)
            if (t.homology == cls) am.alpha[t.id] = a;
    return am;
}

// Hexagonal lattice, one hexagon per fundamental domain.
inline System hexagonal(double q = 0.2, double t_real = 0.3) {
    System s;
    s.graph = std::make_shared<BipartiteGraph>(GraphSpec::builtin("hexagonal"));
    s.params = std::make_shared<EllipticParams>(q);
    s.angles = angles_by_class(*s.graph, {{{1, -1}, 0.2}, {{0, 1}, 1.2}, {{-1, 0}, 2.2}});
    s.ws = std::make_shared<WeightSystem>(*s.graph, *s.params, s.angles, t_real);
    return s;
}

// Hexagonal lattice with the five-hexagon fundamental domain of the amoeba
// figure; the fixture angles make the Kasteleyn operator periodic.
inline System hex13(double q = 0.2, double t_real = 0.4) {
    System s;
    s.graph = std::make_shared<BipartiteGraph>(GraphSpec::builtin("hex_1_3"));
    s.params = std::make_shared<EllipticParams>(q);
    s.angles = angles_by_class(
        *s.graph, {{{1, -3}, -kPi / 5}, {{1, 2}, 0.0}, {{-2, 1}, 2 * kPi / 5}});
    s.ws = std::make_shared<WeightSystem>(*s.graph, *s.params, s.angles, t_real);
    return s;
}

// Z^2 with the t-embedding figure's four angles (quasiperiodic Abel map).
inline System square(double q = 0.1, double t_real = 0.0) {
    System s;
    s.graph = std::make_shared<BipartiteGraph>(GraphSpec::builtin("square"));
    s.params = std::make_shared<EllipticParams>(q);
    s.angles = angles_by_class(*s.graph, {{{1, 0}, 0.0},
                                          {{0, 1}, kPi / 6},
                                          {{-1, 0}, std::exp(1.0) / 2},
                                          {{0, -1}, 2.5}});
    s.ws = std::make_shared<WeightSystem>(*s.graph, *s.params, s.angles, t_real);
    return s;
}

// Square-octagon lattice (quad faces with trivalent whites; spider host).
inline System square_octagon(double q = 0.25, double t_real = 0.5) {
    System s;
    s.graph = std::make_shared<BipartiteGraph>(GraphSpec::builtin("square_octagon"));
    s.params = std::make_shared<EllipticParams>(q);
    s.angles = angles_by_class(*s.graph, {{{1, 1}, 0.3},
                                          {{-1, 1}, 1.1},
                                          {{-1, -1}, 1.9},
                                          {{1, -1}, 2.7}});
    s.ws = std::make_shared<WeightSystem>(*s.graph, *s.params, s.angles, t_real);
    return s;
}

inline std::mt19937& rng() {
    static std::mt19937 gen(20260810);
    return gen;
}

inline cx random_point(const EllipticParams& p, double margin = 0.05) {
    std::uniform_real_distribution<double> ux(0.0, kPi);
    std::uniform_real_distribution<double> uy(-p.half_height() * (1 - margin),
                                              p.half_height() * (1 - margin));
    return cx(ux(rng()), uy(rng()));
}

} // namespace fixtures

#endif
