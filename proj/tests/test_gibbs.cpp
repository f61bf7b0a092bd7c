#include <doctest.h>

#include <elldimer/gibbs.hpp>

#include "fixtures.hpp"

using namespace elldimer;

namespace {

std::vector<PhasePoint> three_phases(const WeightSystem& ws) {
    return {PhasePoint::gaseous_point(ws), PhasePoint::classify(ws, cx(0.62, 0.45)),
            PhasePoint::solid_point(ws, 1)};
}

} // namespace

TEST_CASE("empty edge set has probability one") {
    auto sys = fixtures::hexagonal();
    auto u0 = PhasePoint::gaseous_point(*sys.ws);
    CHECK(correlation(*sys.ws, u0, {}).raw == 1.0);
}

TEST_CASE("single-edge closed forms match the determinantal values") {
    auto sys = fixtures::hexagonal();
    const auto& g = *sys.graph;
    for (const auto& u0 : three_phases(*sys.ws)) {
        for (int e = 0; e < g.num_edges(); ++e) {
            for (Offset at : {Offset{0, 0}, Offset{1, -1}}) {
                CoverEdge ce{e, at};
                auto det = correlation(*sys.ws, u0, {ce});
                double cf = single_edge_closed_form(*sys.ws, u0, ce);
                CHECK(std::abs(det.raw - cf) < 1e-8);
                CHECK(std::abs(det.imag) < 1e-9); // probabilities are real
                CHECK(det.raw > -1e-8);
                CHECK(det.raw < 1 + 1e-8);
            }
        }
    }
}

TEST_CASE("solid phase: indicator of the rhombus arc") {
    auto sys = fixtures::hexagonal();
    PhasePoint sol = PhasePoint::solid_point(*sys.ws, 0);
    const auto& g = *sys.graph;
    for (int e = 0; e < g.num_edges(); ++e) {
        CoverEdge ce{e, {0, 0}};
        double p = correlation(*sys.ws, sol, {ce}).raw;
        double a = std::fmod(sys.ws->alpha(e) + kPi, kPi);
        double b = std::fmod(sys.ws->beta(e) + kPi, kPi);
        double span = std::fmod(b - a + kPi, kPi);
        double x = std::fmod(sol.u0.real() - a + kPi, kPi);
        double expect = (x > 0 && x < span) ? 1.0 : 0.0;
        CHECK(p == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("probabilities around each vertex sum to one") {
    auto sys = fixtures::hex13();
    const auto& g = *sys.graph;
    for (const auto& u0 : three_phases(*sys.ws)) {
        // black vertex 1 and white vertex 0
        double total_b = 0;
        for (int e = 0; e < g.num_edges(); ++e)
            if (g.edge(e).b == 1)
                total_b += correlation(*sys.ws, u0, {{e, Offset{0, 0} - g.edge(e).off}}).raw;
        CHECK(total_b == doctest::Approx(1.0).epsilon(1e-8));
        double total_w = 0;
        for (int e = 0; e < g.num_edges(); ++e)
            if (g.edge(e).w == 0) total_w += correlation(*sys.ws, u0, {{e, {0, 0}}}).raw;
        CHECK(total_w == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("adjacent edges sharing a vertex cannot both be dimers") {
    auto sys = fixtures::hexagonal();
    PhasePoint liq = PhasePoint::classify(*sys.ws, cx(0.62, 0.45));
    auto both = correlation(*sys.ws, liq, {{0, {0, 0}}, {1, {0, 0}}});
    CHECK(std::abs(both.raw) < 1e-8);
    // determinantal bound for adjacent-edge fixtures
    auto p0 = correlation(*sys.ws, liq, {{0, {0, 0}}});
    auto p1 = correlation(*sys.ws, liq, {{1, {0, 0}}});
    auto pair = correlation(*sys.ws, liq, {{0, {0, 0}}, {1, {1, 1}}});
    CHECK(pair.raw <= std::min(p0.raw, p1.raw) + 1e-8);
}

TEST_CASE("gaseous asymptotics") {
    auto sys = fixtures::hexagonal();
    PhasePoint gas = PhasePoint::gaseous_point(*sys.ws);
    auto rep = gaseous_asymptotics(*sys.ws, gas, cover_vertex(1), cover_vertex(0, {11, 5}));
    CHECK(rep.distance >= 20);
    CHECK(rep.F_v0 < 0);
    CHECK(rep.F_pp > 0);
    CHECK(rep.ratio > 0.9);
    CHECK(rep.ratio < 1.1);
    // log|A| decreases linearly with slope F(v0): regression over N
    std::vector<double> xs, ys;
    for (int d = 8; d <= 22; d += 2) {
        auto r = gaseous_asymptotics(*sys.ws, gas, cover_vertex(1), cover_vertex(0, {d, d / 2}));
        xs.push_back(r.distance);
        ys.push_back(std::log(std::abs(r.measured)));
    }
    double n = xs.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    auto rmid = gaseous_asymptotics(*sys.ws, gas, cover_vertex(1), cover_vertex(0, {15, 7}));
    CHECK(std::abs(slope - rmid.F_v0) < 0.05 * std::abs(rmid.F_v0));
    // F real on the sampled circle
    KernelFunction kf = g_factorized(*sys.ws, cover_vertex(1), cover_vertex(0, {11, 5}));
    for (int i = 0; i < 32; ++i) {
        double v = kPi * i / 32.0;
        bool near = false;
        for (auto& f : kf.angle_factors())
            if (std::abs(std::remainder(v - f.angle, kPi)) < 0.05) near = true;
        if (near) continue;
        cx val = 0;
        for (auto& f : kf.angle_factors())
            val += (double)f.exponent * std::log(sys.params->theta_n(4, cx(v - f.angle, 0)));
        CHECK(std::abs(val.imag()) < 1e-10);
    }
}

TEST_CASE("liquid asymptotics") {
    auto sys = fixtures::hexagonal();
    PhasePoint liq = PhasePoint::classify(*sys.ws, cx(0.9, 0.38));
    auto rep = liquid_asymptotics(*sys.ws, liq, cover_vertex(1), cover_vertex(0, {14, 7}));
    CHECK(std::abs(std::abs(rep.zeta) - 1.0) < 1e-14);
    // deviation from the leading term is controlled by |g| N^{-3/2}: the
    // normalized deviation stays bounded and the binned envelope decays at
    // least that fast
    std::vector<std::pair<double, double>> data; // (N, dev/|g|)
    for (auto dir : {std::pair{2, 1}, {1, 0}, {3, 1}})
        for (int k = 4; k <= 12; k += 2) {
            Offset off{dir.first * k, dir.second * k};
            auto r = liquid_asymptotics(*sys.ws, liq, cover_vertex(1), cover_vertex(0, off));
            KernelFunction kf = g_factorized(*sys.ws, cover_vertex(1), cover_vertex(0, off));
            double gmag = std::abs(kf.eval(liq.u0));
            data.push_back({(double)r.distance, r.abs_deviation / gmag});
            CHECK(r.abs_deviation / gmag * std::pow((double)r.distance, 1.5) < 1.0);
        }
    // envelope fit over three log-spaced bins
    std::vector<double> binx, biny;
    for (double lo : {10.0, 22.0, 48.0}) {
        double hi = lo * 2.2, best = 0, cnt = 0, nsum = 0;
        for (auto& [N, dev] : data)
            if (N >= lo && N < hi) {
                best = std::max(best, dev);
                nsum += N;
                cnt++;
            }
        if (cnt > 0 && best > 0) {
            binx.push_back(std::log(nsum / cnt));
            biny.push_back(std::log(best));
        }
    }
    REQUIRE(binx.size() >= 3);
    double n = binx.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < binx.size(); ++i) {
        sx += binx[i];
        sy += biny[i];
        sxx += binx[i] * binx[i];
        sxy += binx[i] * biny[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope < -1.3); // at least as fast as the N^{-3/2} bound allows
    // the predicted coefficient itself decays like 1/N after factoring |g|
    std::vector<double> xs2, ys2;
    for (int d = 8; d <= 24; d += 4) {
        auto r = liquid_asymptotics(*sys.ws, liq, cover_vertex(1), cover_vertex(0, {d, d / 2}));
        xs2.push_back(std::log((double)r.distance));
        ys2.push_back(std::log(std::abs(r.displacement)));
    }
    double n2 = xs2.size(), sx2 = 0, sy2 = 0, sxx2 = 0, sxy2 = 0;
    for (size_t i = 0; i < xs2.size(); ++i) {
        sx2 += xs2[i];
        sy2 += ys2[i];
        sxx2 += xs2[i] * xs2[i];
        sxy2 += xs2[i] * ys2[i];
    }
    double slope2 = (n2 * sxy2 - sx2 * sy2) / (n2 * sxx2 - sx2 * sx2);
    CHECK(std::abs(slope2 - 1.0) < 0.1); // |Psi(b)-Psi(w)| grows linearly
}
