#include <doctest.h>

#include <elldimer/periodic.hpp>

#include "fixtures.hpp"

#include <set>

using namespace elldimer;

TEST_CASE("phi map on hex_1_3") {
    auto sys = fixtures::hex13();
    auto phi = phi_map(*sys.graph, sys.angles);
    CHECK(phi.periodic);
    // topmost interior lattice point of the Newton polygon
    auto np = newton_polygon(*sys.graph, sys.angles);
    auto interior = np.interior_points();
    REQUIRE(!interior.empty());
    Offset top = interior[0];
    for (Offset pt : interior)
        if (pt.y > top.y) top = pt;
    CHECK(std::lround(phi.x) == top.x);
    CHECK(std::lround(phi.y) == top.y);
    // any map in X_G lands strictly inside the polygon
    CHECK(np.contains_strictly(phi.x, phi.y));
    // perturbing one angle moves phi off the lattice
    HalfAngleMap nudged = sys.angles;
    nudged.alpha[0] += 0.01;
    auto phi2 = phi_map(*sys.graph, nudged);
    CHECK(!phi2.periodic);
    CHECK(std::hypot(phi2.x - phi.x, phi2.y - phi.y) < 0.2);
    CHECK(np.contains_strictly(phi2.x, phi2.y));
}

TEST_CASE("square lattice polygon has no interior point") {
    // Four track orbits give the unit square: positive area, no interior
    // lattice point, so no angle map makes the operator periodic.
    auto sq = fixtures::square();
    auto np = newton_polygon(*sq.graph, sq.angles);
    CHECK(np.interior_points().empty());
    auto phi = phi_map(*sq.graph, sq.angles);
    CHECK(!phi.periodic);
    CHECK(np.contains_strictly(phi.x, phi.y));
}

TEST_CASE("magnetic matrix and characteristic polynomial") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    const auto& g = *sys.graph;
    // K(1,1) equals the plain fundamental-domain matrix
    Eigen::MatrixXcd K11 = sd.magnetic_matrix(1.0, 1.0);
    std::vector<int> whites, blacks;
    for (int v = 0; v < g.num_vertices(); ++v)
        (g.color(v) == 'w' ? whites : blacks).push_back(v);
    Eigen::MatrixXcd plain = Eigen::MatrixXcd::Zero(whites.size(), blacks.size());
    for (int e = 0; e < g.num_edges(); ++e) {
        int r = (int)(std::find(whites.begin(), whites.end(), g.edge(e).w) - whites.begin());
        int c = (int)(std::find(blacks.begin(), blacks.end(), g.edge(e).b) - blacks.begin());
        plain(r, c) += sys.ws->coefficient(e);
    }
    CHECK((K11 - plain).norm() < 1e-12 * plain.norm());

    // monomial support is a lattice translate of the geometric polygon
    auto hull = sd.support_hull();
    auto np = newton_polygon(*sys.graph, sys.angles);
    REQUIRE(hull.size() == np.boundary.size());
    // find the translate via the lexicographically smallest points
    auto lex_min = [](std::vector<Offset> v) {
        Offset best = v[0];
        for (auto p : v)
            if (std::pair(p.x, p.y) < std::pair(best.x, best.y)) best = p;
        return best;
    };
    Offset shift = lex_min(hull) - lex_min(np.boundary);
    std::set<std::pair<int, int>> hs, ns;
    for (auto p : hull) hs.insert({p.x, p.y});
    for (auto p : np.boundary) ns.insert({p.x + shift.x, p.y + shift.y});
    CHECK(hs == ns);
}

TEST_CASE("spectral parameterization") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    double worstP = 0, worstT = 0;
    for (int i = 0; i < 200; ++i) {
        cx u = fixtures::random_point(*sys.params);
        if (std::abs(u.imag()) < 0.02) continue;
        cx z = sd.z_of(u), w = sd.w_of(u);
        // residual relative to the evaluated monomial scale
        double scale = 0;
        for (const auto& [off, c] : sd.charpoly())
            scale += std::abs(c) * std::pow(std::abs(z), off.x) * std::pow(std::abs(w), off.y);
        worstP = std::max(worstP, std::abs(sd.P(z, w)) / scale);
        worstT = std::max(worstT, std::abs(z - sd.z_transfer(u)) / std::abs(z));
        worstT = std::max(worstT, std::abs(w - sd.w_transfer(u)) / std::abs(w));
        // conjugation equivariance
        CHECK(std::abs(sd.z_of(std::conj(u)) - std::conj(z)) <= 1e-12 * std::abs(z));
        CHECK(std::abs(sd.w_of(std::conj(u)) - std::conj(w)) <= 1e-12 * std::abs(w));
    }
    CHECK(worstP < 1e-10);
    CHECK(worstT < 1e-11);
    // C1 maps to the bounded real oval
    for (int i = 0; i < 16; ++i) {
        cx u(kPi * i / 16.0, sys.params->half_height());
        CHECK(std::abs(sd.z_of(u).imag()) < 1e-10 * std::abs(sd.z_of(u)));
        CHECK(std::abs(sd.w_of(u).imag()) < 1e-10 * std::abs(sd.w_of(u)));
    }
}

TEST_CASE("quasi-periodic eigenfunction of the magnetic matrix") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    const auto& g = *sys.graph;
    for (cx u : {cx(0.9, 0.3), cx(2.2, -0.2), cx(1.5, 0.5)}) {
        Eigen::MatrixXcd K = sd.magnetic_matrix(sd.z_of(u), sd.w_of(u));
        Eigen::VectorXcd gv(K.cols());
        int ci = 0;
        for (int v = 0; v < g.num_vertices(); ++v)
            if (g.color(v) == 'b') gv(ci++) = g_eval(*sys.ws, cover_vertex(v), cover_vertex(0), u);
        CHECK((K * gv).norm() < 1e-10 * K.norm() * gv.norm());
    }
}

TEST_CASE("rank-one adjugate and the holomorphic-form constant") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    const auto& g = *sys.graph;
    std::vector<int> whites, blacks;
    for (int v = 0; v < g.num_vertices(); ++v)
        (g.color(v) == 'w' ? whites : blacks).push_back(v);
    int n = (int)whites.size();
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        cx u = fixtures::random_point(*sys.params);
        if (std::abs(u.imag()) < 0.05) continue;
        Eigen::MatrixXcd K = sd.magnetic_matrix(sd.z_of(u), sd.w_of(u));
        // adjugate by cofactors
        Eigen::MatrixXcd Q(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Eigen::MatrixXcd minor(n - 1, n - 1);
                for (int r = 0, rr = 0; r < n; ++r) {
                    if (r == j) continue;
                    for (int c = 0, cc = 0; c < n; ++c) {
                        if (c == i) continue;
                        minor(rr, cc++) = K(r, c);
                    }
                    rr++;
                }
                Q(i, j) = (((i + j) % 2) ? -1.0 : 1.0) * minor.determinant();
            }
        // Q_{b,w} = f(u) g_{b,w}(u): extract f from entry (0,0)
        cx g00 = g_eval(*sys.ws, cover_vertex(blacks[0]), cover_vertex(whites[0]), u);
        cx f = Q(0, 0) / g00;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cx gij =
                    g_eval(*sys.ws, cover_vertex(blacks[i]), cover_vertex(whites[j]), u);
                CHECK(std::abs(Q(i, j) - f * gij) <= 1e-8 * std::max(1.0, std::abs(Q(i, j))));
            }
        // point 2: f z' / (z w dP/dw) = -theta'(0)
        cx z = sd.z_of(u), w = sd.w_of(u);
        cx zprime = z * sd.dlog_z(u);
        cx lhs = f * zprime / (z * w * sd.dP_dw(z, w));
        worst = std::max(worst, std::abs(lhs + sys.params->theta_prime0()));
    }
    CHECK(worst < 1e-8 * sys.params->theta_prime0());
}

TEST_CASE("KOS inverse matches the local formula (gaseous)") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    PhasePoint gas = PhasePoint::gaseous_point(*sys.ws);
    for (auto [m, n] : {std::pair{0, 0}, {1, 0}, {0, 1}, {-1, 1}}) {
        CoverNode b = cover_vertex(1, {m, n});
        CoverNode w = cover_vertex(0);
        auto kos = kos_inverse(sd, 0.0, 0.0, b, w, 1e-9);
        auto loc = inverse_coeff(*sys.ws, gas, b, w);
        CHECK(std::abs(kos.value - loc.value) < 1e-6);
    }
}

TEST_CASE("KOS inverse matches the residue formula (solid)") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    // B deep in the unbounded component of a support-hull vertex: the
    // dominant-monomial direction.
    auto hull = sd.support_hull();
    Offset q0 = hull[0];
    // outward direction: q0 relative to the support centroid
    double cxm = 0, cym = 0;
    for (auto& [off, c] : sd.charpoly()) {
        cxm += off.x;
        cym += off.y;
    }
    cxm /= sd.charpoly().size();
    cym /= sd.charpoly().size();
    double dx = q0.x - cxm, dy = q0.y - cym;
    double norm = std::hypot(dx, dy);
    double R = 6.0;
    // (By, -Bx) = R * d
    double By = R * dx / norm, Bx = -R * dy / norm;
    // match against one of the solid local operators
    int ncomp = (int)sys.graph->tracks().size();
    CoverNode b = cover_vertex(1, {1, 0});
    CoverNode w = cover_vertex(0);
    auto kos = kos_inverse(sd, Bx, By, b, w, 1e-9);
    int matches = 0;
    for (int k = 0; k < ncomp; ++k) {
        PhasePoint sol = PhasePoint::solid_point(*sys.ws, k);
        cx loc = inverse_coeff(*sys.ws, sol, b, w).value;
        if (std::abs(kos.value - loc) < 1e-6) matches++;
    }
    CHECK(matches >= 1);
}

TEST_CASE("KOS translation covariance") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    PhasePoint gas = PhasePoint::gaseous_point(*sys.ws);
    // coefficient for (b+(m,n), w+(m,n)) equals that for (b,w): realized by
    // comparing the local operator at translated pairs
    cx a1 = inverse_coeff(*sys.ws, gas, cover_vertex(1, {1, 0}), cover_vertex(0)).value;
    cx a2 = inverse_coeff(*sys.ws, gas, cover_vertex(1, {2, 1}), cover_vertex(0, {1, 1})).value;
    CHECK(std::abs(a1 - a2) < 1e-10);
}

TEST_CASE("slopes") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    PhasePoint sol0 = PhasePoint::solid_point(*sys.ws, 0);
    double u1 = sol0.u0.real();
    // u0 = u1: zero slope
    Slope z = slope(sd, sol0, u1);
    CHECK(std::abs(z.s) < 1e-10);
    CHECK(std::abs(z.t) < 1e-10);
    // solid slopes are integers matching the closed form, and (t,-s)
    // enumerates the boundary points of the polygon anchored at u1
    auto np = newton_polygon(*sys.graph, sys.angles, u1);
    std::set<std::pair<long, long>> boundary, observed;
    for (auto p : np.boundary) boundary.insert({p.x, p.y});
    for (int k = 0; k < (int)sys.graph->tracks().size(); ++k) {
        PhasePoint sol = PhasePoint::solid_point(*sys.ws, k);
        Slope s = slope(sd, sol, u1);
        Slope cf = slope_solid_closed_form(*sys.graph, sys.angles, sol.u0.real(), u1);
        CHECK(std::abs(s.s - cf.s) < 1e-9);
        CHECK(std::abs(s.t - cf.t) < 1e-9);
        CHECK(std::abs(s.s - std::lround(s.s)) < 1e-9);
        CHECK(std::abs(s.t - std::lround(s.t)) < 1e-9);
        observed.insert({std::lround(s.t), -std::lround(s.s)});
    }
    CHECK(observed == boundary);
    // gaseous slope: (t, -s) = phi(alpha) anchored at u1
    PhasePoint gas = PhasePoint::gaseous_point(*sys.ws);
    Slope sg = slope(sd, gas, u1);
    auto phi = phi_map(*sys.graph, sys.angles, u1);
    CHECK(sg.t == doctest::Approx(phi.x).epsilon(1e-8));
    CHECK(-sg.s == doctest::Approx(phi.y).epsilon(1e-8));
}

TEST_CASE("amoeba samples") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    auto am = amoeba_sample(sd, 24);
    CHECK(!am.cloud.empty());
    CHECK(!am.oval.empty());
    CHECK(am.tentacles.size() == 3);
    // the oval is a bounded closed loop
    double span = 0;
    for (auto& pt : am.oval) span = std::max(span, std::hypot(pt.x, pt.y));
    CHECK(span < 50);
    CHECK(std::hypot(am.oval.front().x - am.oval.back().x,
                     am.oval.front().y - am.oval.back().y) < 1e-9);
    // tentacle ends diverge along directions parallel to the polygon sides
    for (auto& arc : am.tentacles) {
        double r = std::hypot(arc.front().x, arc.front().y);
        CHECK(r > 3.0); // near the angles, |log| blows up
    }
}

TEST_CASE("det K(z(u), w(u)) vanishes identically") {
    auto sys = fixtures::hex13();
    SpectralData sd(*sys.ws);
    for (int i = 0; i < 30; ++i) {
        cx u = fixtures::random_point(*sys.params);
        if (std::abs(u.imag()) < 0.03) continue;
        cx det = sd.magnetic_matrix(sd.z_of(u), sd.w_of(u)).determinant();
        CHECK(std::abs(det) < 1e-10 * sd.coeff_scale());
    }
}

TEST_CASE("non-periodic weight systems are rejected") {
    auto sys = fixtures::hexagonal();
    CHECK_THROWS_AS(SpectralData(*sys.ws), std::domain_error);
}
