#include <doctest.h>

#include <elldimer/moves.hpp>

#include <set>

#include "fixtures.hpp"

using namespace elldimer;

namespace {

// Small balanced square-octagon sub-patch hosting a spider gadget:
// both cells at the origin plus the two vertices completing E1's star.
FinitePatch spider_host(const fixtures::System& sys) {
    std::vector<std::pair<int, Offset>> verts = {
        {0, {0, 0}}, {1, {0, 0}}, {2, {0, 0}}, {3, {0, 0}},
        {4, {0, 0}}, {5, {0, 0}}, {6, {0, 0}}, {7, {0, 0}},
        {2, {1, -1}}, {3, {1, -1}},
    };
    return FinitePatch::from_cover_subset(*sys.ws, verts);
}

int central_quad(const FinitePatch& patch) {
    const auto& pg = patch.graph();
    for (int f = 0; f < pg.num_faces(); ++f) {
        if (pg.face(f).outer || pg.face(f).boundary.size() != 4) continue;
        int trivalent_whites = 0;
        for (int h : pg.face(f).boundary) {
            int v = pg.head(h);
            if (patch.spec.color[v] != 'w') continue;
            int d = 0;
            for (const auto& e : patch.spec.edges)
                if (e.w == v) d++;
            if (d == 3) trivalent_whites++;
        }
        if (trivalent_whites == 2) return f;
    }
    return -1;
}

std::vector<int> face_whites(const FinitePatch& patch, int f) {
    std::vector<int> out;
    for (int h : patch.graph().face(f).boundary)
        if (patch.spec.color[patch.graph().head(h)] == 'w')
            out.push_back(patch.graph().head(h));
    return out;
}

} // namespace

TEST_CASE("brute-force oracle: Z equals |det K| and marginals agree") {
    auto sys = fixtures::square_octagon();
    FinitePatch patch = spider_host(sys);
    REQUIRE(patch.spec.edges.size() <= 12);
    double ze = patch.z_enumeration();
    double zd = patch.z_determinant();
    CHECK(ze > 0);
    CHECK(std::abs(ze - zd) < 1e-10 * ze);
    for (int e = 0; e < (int)patch.spec.edges.size(); ++e) {
        double pe = patch.edge_probability_enumeration(e);
        double pd = patch.edge_probability_determinant(e);
        CHECK(std::abs(pe - pd) < 1e-10);
    }
}

TEST_CASE("hexagonal patch oracle") {
    auto sys = fixtures::hexagonal();
    FinitePatch patch = FinitePatch::from_cover(*sys.ws, 1);
    REQUIRE(patch.num_white() == patch.num_black());
    double ze = patch.z_enumeration();
    double zd = patch.z_determinant();
    CHECK(std::abs(ze - zd) < 1e-10 * ze);
}

TEST_CASE("expand then shrink a 2-valent vertex is the identity") {
    auto sys = fixtures::square_octagon();
    FinitePatch patch = spider_host(sys);
    // expand a black vertex of degree 3
    int black = -1;
    for (int v = 0; v < (int)patch.spec.color.size(); ++v) {
        if (patch.spec.color[v] != 'b') continue;
        int d = 0;
        for (const auto& e : patch.spec.edges)
            if (e.b == v) d++;
        if (d == 3) black = v;
    }
    REQUIRE(black >= 0);
    auto [expanded, rec1] = expand_2valent(patch, black, 0, 1);
    // the new white is 2-valent with K1 + K2 = 0
    int wstar = (int)expanded.spec.color.size() - 1;
    std::vector<cx> kk;
    for (int e = 0; e < (int)expanded.spec.edges.size(); ++e)
        if (expanded.spec.edges[e].w == wstar) kk.push_back(expanded.weight(e));
    REQUIRE(kk.size() == 2);
    CHECK(std::abs(kk[0] + kk[1]) < 1e-12);
    // partition functions: Z' = Z (new edge weights are +-1)
    auto inv = partition_invariance(patch, expanded, rec1);
    CHECK(inv.relative_gap < 1e-10);
    // face weights preserved on matched faces
    for (auto& [key, val] : rec1.faces_before)
        for (auto& [key2, val2] : rec1.faces_after)
            if (key == key2 && !key.empty())
                CHECK(std::abs(val - val2) < 1e-10 * std::abs(val));
    // shrink back
    auto [shrunk, rec2] = shrink_2valent(expanded, wstar);
    CHECK(shrunk.spec.edges.size() == patch.spec.edges.size());
    CHECK(std::abs(shrunk.z_enumeration() - patch.z_enumeration()) <
          1e-10 * patch.z_enumeration());
    for (auto& [key, val] : rec2.faces_after)
        for (auto& [key2, val2] : rec1.faces_before)
            if (key == key2 && !key.empty())
                CHECK(std::abs(val - val2) < 1e-10 * std::abs(val));
}

TEST_CASE("shrink requires the antisymmetry precondition") {
    auto sys = fixtures::square_octagon();
    FinitePatch patch = spider_host(sys);
    int black = -1;
    for (int v = 0; v < (int)patch.spec.color.size(); ++v) {
        if (patch.spec.color[v] != 'b') continue;
        int d = 0;
        for (const auto& e : patch.spec.edges)
            if (e.b == v) d++;
        if (d >= 2) black = v;
    }
    REQUIRE(black >= 0);
    auto [expanded, rec] = expand_2valent(patch, black, 0, 1);
    int wstar = (int)expanded.spec.color.size() - 1;
    // corrupt one of the two weights
    std::vector<cx> w = expanded.weights();
    for (int e = 0; e < (int)expanded.spec.edges.size(); ++e)
        if (expanded.spec.edges[e].w == wstar) {
            w[e] *= 1.5;
            break;
        }
    FinitePatch bad(expanded.spec, w);
    CHECK_THROWS_AS(shrink_2valent(bad, wstar), std::domain_error);
}

TEST_CASE("fock weights on a 2-valent vertex satisfy K1 + K2 = 0") {
    // Subdivide an edge of the hexagonal lattice: the 2-valent white's two
    // coefficients are automatically opposite.
    GraphSpec s = GraphSpec::builtin("hexagonal");
    // vertices: w0=0, b0=1; add b1=2, w1=3 subdividing edge 0 (w0-b0)
    s.color.push_back('b');
    s.color.push_back('w');
    s.edges[0] = {0, 2, {0, 0}};           // w0 - b1
    s.edges.push_back({3, 2, {0, 0}});     // w1 - b1 (e3)
    s.edges.push_back({3, 1, {0, 0}});     // w1 - b0 (e4)
    s.rotation = {{0, 1, 2}, {2, 4, 1}, {0, 3}, {3, 4}};
    BipartiteGraph g(s);
    CHECK(g.check_minimal().minimal);
    EllipticParams p(0.2);
    HalfAngleMap am;
    am.alpha.assign(g.tracks().size(), 0.0);
    // assign angles by class as in the hexagonal fixture
    for (const auto& t : g.tracks()) {
        if (t.homology == Offset{1, -1}) am.alpha[t.id] = 0.2;
        if (t.homology == Offset{0, 1}) am.alpha[t.id] = 1.2;
        if (t.homology == Offset{-1, 0}) am.alpha[t.id] = 2.2;
    }
    WeightSystem ws(g, p, am, 0.3);
    cx k1 = ws.coefficient(CoverEdge{3, {0, 0}});
    cx k2 = ws.coefficient(CoverEdge{4, {0, 0}});
    CHECK(std::abs(k1 + k2) < 1e-12 * std::abs(k1));
}

TEST_CASE("spider move: relations, partition function, kernel") {
    auto sys = fixtures::square_octagon();
    FinitePatch patch = spider_host(sys);
    int face = central_quad(patch);
    REQUIRE(face >= 0);
    auto whites = face_whites(patch, face);
    double gauge = 1;
    FinitePatch normal = gauge_spider_normal_form(patch, whites, &gauge);
    // gauged Fock weights are exactly the antisymmetric normal form
    auto [moved, rec] = spider_move(normal, face);
    CHECK(rec.residual < 1e-10);

    // central face weight relation W' = W^{-1} (records store the dimer
    // weights, Kasteleyn sign included)
    cx W = 0, Wp = 0;
    for (auto& [key, val] : rec.faces_before)
        if (key.empty()) W = val;
    for (auto& [key, val] : rec.faces_after)
        if (key.empty()) Wp = val;
    CHECK(std::abs(W * Wp - 1.0) < 1e-10);
    // faces untouched by the move keep their weights
    for (auto& [key, val] : rec.faces_before) {
        if (key.empty()) continue;
        for (auto& [key2, val2] : rec.faces_after)
            if (key == key2 && key.size() * 2 >= 8)
                CHECK(std::abs(val2 - val) < 1e-10 * std::abs(val));
    }

    // partition-function invariance in the face-weight (reference-normalized)
    // form, and the Kasteleyn property on both sides
    auto inv = partition_invariance(normal, moved, rec);
    CHECK(inv.det_gap_before < 1e-10);
    CHECK(inv.det_gap_after < 1e-10);
    CHECK(inv.hf_gap < 1e-10);
    CHECK(inv.hf_det_gap < 1e-10);

    // repeat the move: face weights return to the originals
    const auto& mg = moved.graph();
    int face2 = -1;
    for (int f = 0; f < mg.num_faces(); ++f) {
        if (mg.face(f).outer || mg.face(f).boundary.size() != 4) continue;
        auto fw = face_whites(moved, f);
        if (fw.size() == 2 && std::set<int>(fw.begin(), fw.end()) ==
                                  std::set<int>(whites.begin(), whites.end()))
            face2 = f;
    }
    REQUIRE(face2 >= 0);
    auto [back, rec2] = spider_move(moved, face2);
    for (auto& [key, val] : rec.faces_before)
        for (auto& [key2, val2] : rec2.faces_after)
            if (key == key2) CHECK(std::abs(val - val2) < 1e-10 * std::max(1.0, std::abs(val)));
}

TEST_CASE("corrupted normal form is rejected") {
    auto sys = fixtures::square_octagon();
    FinitePatch patch = spider_host(sys);
    int face = central_quad(patch);
    auto whites = face_whites(patch, face);
    FinitePatch normal = gauge_spider_normal_form(patch, whites, nullptr);
    std::vector<cx> w = normal.weights();
    // corrupt one gadget weight (breaks the Fay structure)
    for (int h : normal.graph().face(face).boundary) {
        w[h / 2] *= 1.01;
        break;
    }
    FinitePatch bad(normal.spec, w);
    bad.copy_metadata(normal);
    CHECK_THROWS_AS(spider_move(bad, face), std::domain_error);
}

TEST_CASE("spider kernel invariance: the local systems share null vectors") {
    // The 2x4 systems M and M' of the move annihilate the same two vectors
    // g1, g2 built from the Fay blocks.
    EllipticParams p(0.25);
    cx s(0.77, p.half_height());
    double a = 0.3, b = 1.1, c = 1.9, d = 2.7;
    auto F = [&](double x, double y) { return p.theta(x - y) * p.theta(s - x - y); };
    cx M[2][4] = {{F(b, d), F(a, b), F(d, a), 0}, {F(c, b), 0, F(a, c), F(b, a)}};
    cx Mp[2][4] = {{F(c, d), F(a, c), 0, F(d, a)}, {0, F(c, b), F(d, c), F(b, d)}};
    cx g1[4] = {F(c, a), F(c, d), F(c, b), 0};
    cx g2[4] = {0, F(a, d), F(a, b), F(a, c)};
    for (auto* mat : {M, Mp})
        for (int r = 0; r < 2; ++r) {
            cx d1 = 0, d2 = 0;
            double scale = 0;
            for (int k = 0; k < 4; ++k) {
                d1 += mat[r][k] * g1[k];
                d2 += mat[r][k] * g2[k];
                scale = std::max(scale, std::abs(mat[r][k]));
            }
            CHECK(std::abs(d1) < 1e-11 * scale);
            CHECK(std::abs(d2) < 1e-11 * scale);
        }
}

TEST_CASE("moves preserve minimality on the periodic host") {
    // Applying the track-level criterion to the rewired patch: the spider
    // move keeps the patch planar and its strips bigon-free.
    auto sys = fixtures::square_octagon();
    FinitePatch patch = spider_host(sys);
    int face = central_quad(patch);
    auto whites = face_whites(patch, face);
    FinitePatch normal = gauge_spider_normal_form(patch, whites, nullptr);
    auto [moved, rec] = spider_move(normal, face);
    auto cert = moved.graph().check_minimal();
    CHECK(cert.minimal);
}

TEST_CASE("spider move: the five face-weight relations") {
    // A radius-2 host keeps the four side faces of an interior gadget
    // bounded, so all five relations are observable.
    auto sys = fixtures::square_octagon();
    FinitePatch patch = FinitePatch::from_cover(*sys.ws, 2);
    const auto& pg = patch.graph();
    int face = -1;
    for (int f = 0; f < pg.num_faces() && face < 0; ++f) {
        if (pg.face(f).outer || pg.face(f).boundary.size() != 4) continue;
        bool ok = true;
        int tv = 0;
        for (int h : pg.face(f).boundary) {
            int v = pg.head(h);
            if (patch.spec.color[v] != 'w') continue;
            int d = 0;
            for (const auto& e : patch.spec.edges)
                if (e.w == v) d++;
            if (d == 3) tv++;
            for (const auto& vc : pg.corners_at(v))
                if (pg.face(vc.face).outer) ok = false;
        }
        if (ok && tv == 2) face = f;
    }
    REQUIRE(face >= 0);
    auto whites = face_whites(patch, face);
    FinitePatch normal = gauge_spider_normal_form(patch, whites, nullptr);
    auto [moved, rec] = spider_move(normal, face);
    CHECK(rec.residual < 1e-9);
    cx W = 0, Wp = 0;
    for (auto& [key, val] : rec.faces_before)
        if (key.empty()) W = val;
    for (auto& [key, val] : rec.faces_after)
        if (key.empty()) Wp = val;
    CHECK(std::abs(W * Wp - 1.0) < 1e-10);
    // classify matched faces: adjacent side faces obey the (1+W) relations,
    // untouched faces keep their weights
    int side = 0, untouched = 0;
    for (auto& [key, val] : rec.faces_before) {
        if (key.empty()) continue;
        for (auto& [key2, val2] : rec.faces_after) {
            if (key != key2) continue;
            // a side face lost two touched edges from its key
            bool adjacent = false;
            for (int f2 = 0; f2 < moved.graph().num_faces(); ++f2) {
                if (moved.face_key(f2, rec.touched) != key2 ||
                    moved.graph().face(f2).outer)
                    continue;
                adjacent = moved.graph().face(f2).boundary.size() > 2 * key2.size() ||
                           moved.face_key(f2, {}) != key2;
            }
            if (adjacent) {
                side++;
                double r1 = std::abs(val2 - val * (1.0 + W));
                double r2 = std::abs(val2 - val / (1.0 + 1.0 / W));
                CHECK(std::min(r1, r2) < 1e-10 * std::abs(val2));
            } else {
                untouched++;
                CHECK(std::abs(val2 - val) < 1e-10 * std::abs(val));
            }
        }
    }
    CHECK(side >= 4);
    CHECK(untouched >= 4);
}
