#include "elldimer/moves.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace elldimer {

namespace {

double lift_angle(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    return r;
}

bool same_mod_pi(double a, double b) {
    double d = lift_angle(a - b);
    return d < 1e-9 || d > kPi - 1e-9;
}

} // namespace

FinitePatch::FinitePatch(GraphSpec s, std::vector<cx> weights)
    : spec(std::move(s)), weights_(std::move(weights)) {
    spec.periodic = false;
    graph_ = std::make_shared<BipartiteGraph>(spec);
    if ((int)weights_.size() != graph_->num_edges())
        throw std::invalid_argument("FinitePatch: one weight per edge required");
}

FinitePatch FinitePatch::from_cover(const WeightSystem& ws, int radius) {
    std::vector<std::pair<int, Offset>> verts;
    for (int mx = -radius; mx <= radius; ++mx)
        for (int my = -radius; my <= radius; ++my)
            for (int v = 0; v < ws.graph().num_vertices(); ++v)
                verts.push_back({v, Offset{mx, my}});
    return from_cover_subset(ws, verts);
}

FinitePatch FinitePatch::from_cover_subset(const WeightSystem& ws,
                                           const std::vector<std::pair<int, Offset>>& verts) {
    const auto& g = ws.graph();
    GraphSpec s;
    s.name = ws.graph().spec().name + "_patch";
    s.periodic = false;
    std::map<std::pair<int, Offset>, int> vid;
    for (const auto& [v, at] : verts)
        if (!vid.count({v, at})) {
            vid[{v, at}] = (int)s.color.size();
            s.color.push_back(g.color(v));
        }
    std::vector<cx> weights;
    std::vector<EdgeAngles> angles;
    std::map<std::pair<int, Offset>, int> eid; // cover edge -> new id
    for (const auto& [kv, wi_id] : vid) {
        auto [v, at] = kv;
        if (g.color(v) != 'w') continue;
        for (int e = 0; e < g.num_edges(); ++e) {
            if (g.edge(e).w != v) continue;
            auto itb = vid.find({g.edge(e).b, at + g.edge(e).off});
            if (itb == vid.end()) continue;
            eid[{e, at}] = (int)s.edges.size();
            s.edges.push_back({wi_id, itb->second, {0, 0}});
            weights.push_back(ws.coefficient(CoverEdge{e, at}));
            angles.push_back({ws.alpha(e), ws.beta(e)});
        }
    }
    // Rotations inherited from the cover (drop missing edges).
    s.rotation.assign(s.color.size(), {});
    for (auto& [key, id] : vid) {
        auto [v, at] = key;
        for (int e : g.edge_rotation(v)) {
            Offset wat = (g.edge(e).w == v) ? at : at - g.edge(e).off;
            auto it = eid.find({e, wat});
            if (it != eid.end()) s.rotation[id].push_back(it->second);
        }
    }
    FinitePatch patch(std::move(s), std::move(weights));
    patch.edge_angles = std::move(angles);
    patch.params = &ws.params();
    patch.t = ws.t();
    patch.vertex_eta.assign(patch.spec.color.size(), 0);
    for (auto& [key, id] : vid)
        patch.vertex_eta[id] = ws.abel().value(cover_vertex(key.first, key.second));
    // Cover Abel values of the two faces of every edge, and the full face
    // list around each white vertex (from the cover, so patches whose faces
    // are cut open still carry the gauge data).
    patch.edge_face_eta.assign(patch.spec.edges.size(), {0.0, 0.0});
    for (auto& [ckey, ne] : eid) {
        auto [e, wat] = ckey;
        patch.edge_face_eta[ne] = {
            ws.abel().value(cover_face(g.face_left(e), wat + g.face_left_base(e))),
            ws.abel().value(cover_face(g.face_right(e), wat + g.face_right_base(e)))};
    }
    for (auto& [key, id] : vid) {
        auto [v, at] = key;
        if (g.color(v) != 'w') continue;
        std::vector<double> etas;
        for (const auto& vc : g.corners_at(v)) {
            // Each face at the vertex appears at two corners; keep one copy.
            double val = ws.abel().value(cover_face(vc.face, at + vc.face_base));
            bool seen = false;
            for (double x : etas)
                if (std::abs(x - val) < 1e-12) seen = true;
            if (!seen) etas.push_back(val);
        }
        patch.white_faces_eta[id] = std::move(etas);
    }
    return patch;
}

int FinitePatch::num_white() const {
    int n = 0;
    for (char c : spec.color) n += (c == 'w');
    return n;
}

int FinitePatch::num_black() const { return (int)spec.color.size() - num_white(); }

double FinitePatch::z_enumeration() const {
    int nw = 0;
    std::vector<int> whites;
    for (int v = 0; v < (int)spec.color.size(); ++v)
        if (spec.color[v] == 'w') {
            whites.push_back(v);
            nw++;
        }
    if (num_white() != num_black()) return 0;
    std::vector<std::vector<std::pair<int, int>>> adj(whites.size()); // (edge, black)
    std::map<int, int> white_index;
    for (size_t i = 0; i < whites.size(); ++i) white_index[whites[i]] = (int)i;
    for (int e = 0; e < (int)spec.edges.size(); ++e)
        adj[white_index[spec.edges[e].w]].push_back({e, spec.edges[e].b});
    std::vector<bool> black_used(spec.color.size(), false);
    double total = 0;
    // Recursive inclusion over whites in order.
    std::function<void(size_t, double)> rec = [&](size_t i, double prod) {
        if (i == whites.size()) {
            total += prod;
            return;
        }
        for (auto [e, b] : adj[i]) {
            if (black_used[b]) continue;
            black_used[b] = true;
            rec(i + 1, prod * std::abs(weights_[e]));
            black_used[b] = false;
        }
    };
    rec(0, 1.0);
    return total;
}

namespace {

Eigen::MatrixXcd weight_matrix(const FinitePatch& p, std::vector<int>* wlist = nullptr,
                               std::vector<int>* blist = nullptr) {
    std::vector<int> whites, blacks;
    for (int v = 0; v < (int)p.spec.color.size(); ++v)
        (p.spec.color[v] == 'w' ? whites : blacks).push_back(v);
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(whites.size(), blacks.size());
    std::map<int, int> wi, bi;
    for (size_t i = 0; i < whites.size(); ++i) wi[whites[i]] = (int)i;
    for (size_t i = 0; i < blacks.size(); ++i) bi[blacks[i]] = (int)i;
    for (int e = 0; e < (int)p.spec.edges.size(); ++e)
        K(wi[p.spec.edges[e].w], bi[p.spec.edges[e].b]) += p.weight(e);
    if (wlist) *wlist = whites;
    if (blist) *blist = blacks;
    return K;
}

} // namespace

cx FinitePatch::z_phased_enumeration() const {
    std::vector<int> whites;
    for (int v = 0; v < (int)spec.color.size(); ++v)
        if (spec.color[v] == 'w') whites.push_back(v);
    if (num_white() != num_black()) return 0;
    std::vector<std::vector<std::pair<int, int>>> adj(whites.size());
    std::map<int, int> white_index;
    for (size_t i = 0; i < whites.size(); ++i) white_index[whites[i]] = (int)i;
    for (int e = 0; e < (int)spec.edges.size(); ++e)
        adj[white_index[spec.edges[e].w]].push_back({e, spec.edges[e].b});
    std::vector<bool> black_used(spec.color.size(), false);
    cx total = 0;
    std::function<void(size_t, cx)> rec = [&](size_t i, cx prod) {
        if (i == whites.size()) {
            total += prod;
            return;
        }
        for (auto [e, b] : adj[i]) {
            if (black_used[b]) continue;
            black_used[b] = true;
            rec(i + 1, prod * weights_[e]);
            black_used[b] = false;
        }
    };
    rec(0, 1.0);
    return total;
}

std::vector<int> FinitePatch::reference_matching() const {
    std::vector<int> whites;
    for (int v = 0; v < (int)spec.color.size(); ++v)
        if (spec.color[v] == 'w') whites.push_back(v);
    std::vector<std::vector<std::pair<int, int>>> adj(whites.size());
    std::map<int, int> white_index;
    for (size_t i = 0; i < whites.size(); ++i) white_index[whites[i]] = (int)i;
    for (int e = 0; e < (int)spec.edges.size(); ++e)
        adj[white_index[spec.edges[e].w]].push_back({e, spec.edges[e].b});
    std::vector<bool> black_used(spec.color.size(), false);
    std::vector<int> chosen;
    std::function<bool(size_t)> rec = [&](size_t i) {
        if (i == whites.size()) return true;
        for (auto [e, b] : adj[i]) {
            if (black_used[b]) continue;
            black_used[b] = true;
            chosen.push_back(e);
            if (rec(i + 1)) return true;
            chosen.pop_back();
            black_used[b] = false;
        }
        return false;
    };
    if (!rec(0)) return {};
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

double FinitePatch::z_determinant() const {
    if (num_white() != num_black())
        throw std::domain_error("z_determinant: unbalanced patch");
    return std::abs(weight_matrix(*this).determinant());
}

double FinitePatch::edge_probability_enumeration(int e) const {
    // Z restricted to matchings containing e, over Z.
    double z = z_enumeration();
    if (z == 0) return 0;
    FinitePatch forced = *this;
    // Force edge e: drop all other edges at its endpoints.
    double we = std::abs(weights_[e]);
    GraphSpec s = spec;
    std::vector<cx> ww = weights_;
    int w0 = spec.edges[e].w, b0 = spec.edges[e].b;
    double restricted = 0;
    // enumeration with e forced: remove w0,b0 and their edges, multiply by |w_e|
    {
        std::vector<int> keep;
        for (int i = 0; i < (int)s.edges.size(); ++i)
            if (i != e && s.edges[i].w != w0 && s.edges[i].b != b0) keep.push_back(i);
        GraphSpec s2;
        s2.periodic = false;
        std::map<int, int> vmap;
        for (int v = 0; v < (int)s.color.size(); ++v) {
            if (v == w0 || v == b0) continue;
            vmap[v] = (int)s2.color.size();
            s2.color.push_back(s.color[v]);
        }
        std::vector<cx> w2;
        for (int i : keep) {
            s2.edges.push_back({vmap[s.edges[i].w], vmap[s.edges[i].b], {0, 0}});
            w2.push_back(ww[i]);
        }
        // Enumeration does not need rotations; bypass FinitePatch tracing.
        std::vector<std::vector<std::pair<int, int>>> adj;
        std::vector<int> whites;
        std::map<int, int> white_index;
        for (int v = 0; v < (int)s2.color.size(); ++v)
            if (s2.color[v] == 'w') {
                white_index[v] = (int)whites.size();
                whites.push_back(v);
            }
        adj.resize(whites.size());
        for (int i = 0; i < (int)s2.edges.size(); ++i)
            adj[white_index[s2.edges[i].w]].push_back({i, s2.edges[i].b});
        std::vector<bool> used(s2.color.size(), false);
        std::function<void(size_t, double)> rec = [&](size_t i, double prod) {
            if (i == whites.size()) {
                restricted += prod;
                return;
            }
            for (auto [ei, b] : adj[i]) {
                if (used[b]) continue;
                used[b] = true;
                rec(i + 1, prod * std::abs(w2[ei]));
                used[b] = false;
            }
        };
        rec(0, 1.0);
    }
    return we * restricted / z;
}

double FinitePatch::edge_probability_determinant(int e) const {
    std::vector<int> whites, blacks;
    Eigen::MatrixXcd K = weight_matrix(*this, &whites, &blacks);
    Eigen::MatrixXcd Kinv = K.partialPivLu().inverse();
    int wi = (int)(std::find(whites.begin(), whites.end(), spec.edges[e].w) - whites.begin());
    int bi = (int)(std::find(blacks.begin(), blacks.end(), spec.edges[e].b) - blacks.begin());
    return std::abs(weights_[e] * Kinv(bi, wi));
}

cx FinitePatch::face_weight(int f) const {
    const auto& face = graph_->face(f);
    cx w = 1;
    for (int h : face.boundary) {
        cx kc = weights_[h / 2];
        if (h % 2 == 0)
            w *= kc;
        else
            w /= kc;
    }
    return w;
}

std::vector<int> FinitePatch::face_key(int f, const std::vector<int>& touched) const {
    std::vector<int> key;
    for (int h : graph_->face(f).boundary) {
        int e = h / 2;
        if (std::find(touched.begin(), touched.end(), e) == touched.end()) key.push_back(e);
    }
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    return key;
}

namespace {

void record_faces(const FinitePatch& p, const std::vector<int>& touched,
                  std::vector<std::pair<std::vector<int>, cx>>& out) {
    for (int f = 0; f < p.graph().num_faces(); ++f) {
        if (p.graph().face(f).outer) continue;
        // Dimer face weight: the alternating product times the Kasteleyn
        // sign (-1)^{n+1} of the degree-2n face.
        int n = (int)p.graph().face(f).boundary.size() / 2;
        double sign = (n % 2 == 0) ? -1.0 : 1.0;
        out.push_back({p.face_key(f, touched), sign * p.face_weight(f)});
    }
}

} // namespace

std::pair<FinitePatch, MoveRecord> shrink_2valent(const FinitePatch& patch, int v) {
    const auto& s = patch.spec;
    MoveRecord rec;
    rec.type = "shrink_2valent";
    std::vector<int> incident;
    for (int e = 0; e < (int)s.edges.size(); ++e)
        if (s.edges[e].w == v || s.edges[e].b == v) incident.push_back(e);
    if (incident.size() != 2) throw std::invalid_argument("shrink_2valent: vertex degree != 2");
    int e1 = incident[0], e2 = incident[1];
    cx K1 = patch.weight(e1), K2 = patch.weight(e2);
    rec.touched = {e1, e2};
    rec.residual = std::abs(K1 + K2) / std::max(std::abs(K1), std::abs(K2));
    if (rec.residual > 1e-10)
        throw std::domain_error("shrink_2valent: K1 + K2 != 0 (invariance violated)");
    bool white = s.color[v] == 'w';
    int n1 = white ? s.edges[e1].b : s.edges[e1].w; // neighbors to merge
    int n2 = white ? s.edges[e2].b : s.edges[e2].w;
    if (n1 == n2) throw std::invalid_argument("shrink_2valent: doubled edge");

    record_faces(patch, {e1, e2}, rec.faces_before);
    rec.z_factor = 1.0 / std::abs(K1);

    // Merge n2 into n1, drop v and both edges.
    GraphSpec out;
    out.periodic = false;
    std::map<int, int> vmap;
    for (int u = 0; u < (int)s.color.size(); ++u) {
        if (u == v || u == n2) continue;
        vmap[u] = (int)out.color.size();
        out.color.push_back(s.color[u]);
    }
    vmap[n2] = vmap[n1];
    std::vector<cx> weights;
    std::map<int, int> emap;
    for (int e = 0; e < (int)s.edges.size(); ++e) {
        if (e == e1 || e == e2) continue;
        emap[e] = (int)out.edges.size();
        out.edges.push_back({vmap[s.edges[e].w], vmap[s.edges[e].b], {0, 0}});
        weights.push_back(patch.weight(e));
    }
    out.rotation.assign(out.color.size(), {});
    for (int u = 0; u < (int)s.color.size(); ++u) {
        if (u == v || u == n1 || u == n2) continue;
        for (int e : s.rotation[u]) out.rotation[vmap[u]].push_back(emap[e]);
    }
    // Merged rotation: splice n2's edges (minus e2) into n1's at e1's slot.
    {
        std::vector<int> merged;
        const auto& r1 = s.rotation[n1];
        int pos1 = (int)(std::find(r1.begin(), r1.end(), e1) - r1.begin());
        const auto& r2 = s.rotation[n2];
        int pos2 = (int)(std::find(r2.begin(), r2.end(), e2) - r2.begin());
        for (int i = 1; i < (int)r1.size(); ++i) merged.push_back(r1[(pos1 + i) % r1.size()]);
        for (int i = 1; i < (int)r2.size(); ++i) merged.push_back(r2[(pos2 + i) % r2.size()]);
        out.rotation[vmap[n1]].clear();
        for (int e : merged) out.rotation[vmap[n1]].push_back(emap[e]);
    }
    FinitePatch result(std::move(out), std::move(weights));
    record_faces(result, {}, rec.faces_after);
    return {std::move(result), std::move(rec)};
}

std::pair<FinitePatch, MoveRecord> expand_2valent(const FinitePatch& patch, int b, int k1,
                                                  int k2) {
    const auto& s = patch.spec;
    if (s.color[b] != 'b') throw std::invalid_argument("expand_2valent: expects a black vertex");
    MoveRecord rec;
    rec.type = "expand_2valent";
    record_faces(patch, {}, rec.faces_before);
    // touched filled with the new edge ids below
    rec.z_factor = 1.0;

    const auto& rot = s.rotation[b];
    int d = (int)rot.size();
    GraphSpec out = s;
    std::vector<cx> weights = patch.weights();
    int b2 = (int)out.color.size();
    out.color.push_back('b');
    int wstar = (int)out.color.size();
    out.color.push_back('w');
    // Arc (k1, k2] stays at b; arc (k2, k1] moves to b2.
    std::vector<int> arc_b, arc_b2;
    for (int i = 1; i <= d; ++i) {
        int idx = (k1 + i) % d;
        arc_b.push_back(rot[idx]);
        if (idx == k2 % d) break;
    }
    for (int i = 1; i <= d; ++i) {
        int idx = (k2 + i) % d;
        if (std::find(arc_b.begin(), arc_b.end(), rot[idx]) != arc_b.end()) break;
        arc_b2.push_back(rot[idx]);
    }
    for (int e : arc_b2) {
        if (out.edges[e].b == b)
            out.edges[e].b = b2;
        else
            out.edges[e].w = b2;
    }
    int enew1 = (int)out.edges.size();
    out.edges.push_back({wstar, b, {0, 0}});
    weights.push_back(1.0);
    int enew2 = (int)out.edges.size();
    out.edges.push_back({wstar, b2, {0, 0}});
    weights.push_back(-1.0);
    out.rotation[b] = arc_b;
    out.rotation[b].push_back(enew1);
    out.rotation.push_back(arc_b2); // b2
    out.rotation[b2].push_back(enew2);
    out.rotation.push_back({enew1, enew2}); // wstar
    rec.touched = {enew1, enew2};
    FinitePatch result(std::move(out), std::move(weights));
    record_faces(result, {enew1, enew2}, rec.faces_after);
    return {std::move(result), std::move(rec)};
}

FinitePatch gauge_spider_normal_form(const FinitePatch& patch, const std::vector<int>& whites,
                                     double* gauge_abs) {
    if (!patch.params) throw std::domain_error("gauge: Fock metadata required");
    std::vector<cx> weights = patch.weights();
    double total = 1;
    for (int w : whites) {
        auto it = patch.white_faces_eta.find(w);
        if (it == patch.white_faces_eta.end() || it->second.size() != 3)
            throw std::domain_error("gauge: trivalent white with cover face data required");
        cx sigma = 1;
        for (double eta : it->second) sigma *= patch.params->theta(patch.t + eta);
        for (int e = 0; e < (int)patch.spec.edges.size(); ++e)
            if (patch.spec.edges[e].w == w) weights[e] *= sigma;
        total *= std::abs(sigma);
    }
    if (gauge_abs) *gauge_abs = total;
    FinitePatch out(patch.spec, std::move(weights));
    out.copy_metadata(patch);
    return out;
}

std::pair<FinitePatch, MoveRecord> spider_move(const FinitePatch& patch, int face) {
    if (patch.edge_angles.empty() || !patch.params)
        throw std::domain_error("spider_move: angle metadata required");
    const auto& g = patch.graph();
    const auto& p = *patch.params;
    const auto& bnd = g.face(face).boundary;
    if ((int)bnd.size() != 4 || g.face(face).outer)
        throw std::invalid_argument("spider_move: face is not a quad");
    int w1 = -1, w2 = -1;
    for (int h : bnd) {
        int v = g.head(h);
        if (patch.spec.color[v] == 'w') (w1 < 0 ? w1 : w2) = v;
    }
    auto degree = [&](int v) {
        int d = 0;
        for (const auto& e : patch.spec.edges)
            if (e.w == v || e.b == v) d++;
        return d;
    };
    if (degree(w1) != 3 || degree(w2) != 3)
        throw std::invalid_argument("spider_move: white vertices must be trivalent");
    auto edge_between = [&](int w, int b) {
        for (int e = 0; e < (int)patch.spec.edges.size(); ++e)
            if (patch.spec.edges[e].w == w && patch.spec.edges[e].b == b) return e;
        return -1;
    };
    // Blacks of the face and the two legs.
    std::vector<int> face_blacks;
    for (int h : bnd) {
        int v = g.head(h);
        if (patch.spec.color[v] == 'b') face_blacks.push_back(v);
    }
    auto third_black = [&](int w) {
        for (const auto& e : patch.spec.edges)
            if (e.w == w && e.b != face_blacks[0] && e.b != face_blacks[1]) return e.b;
        return -1;
    };
    int b2 = third_black(w1), b4 = third_black(w2);
    if (b2 < 0 || b4 < 0) throw std::invalid_argument("spider_move: gadget legs missing");
    // b1 = the face black preceding b2 in w1's rotation, b3 the one after:
    // counterclockwise order (b1, b2, b3) around w1.
    int b1 = -1, b3 = -1;
    {
        const auto& rot = patch.spec.rotation[w1];
        int pos = -1;
        for (size_t i = 0; i < rot.size(); ++i)
            if (patch.spec.edges[rot[i]].b == b2) pos = (int)i;
        b1 = patch.spec.edges[rot[(pos + 2) % 3]].b; // predecessor
        b3 = patch.spec.edges[rot[(pos + 1) % 3]].b; // successor
    }
    int e_w1b1 = edge_between(w1, b1), e_w1b2 = edge_between(w1, b2),
        e_w1b3 = edge_between(w1, b3), e_w2b1 = edge_between(w2, b1),
        e_w2b3 = edge_between(w2, b3), e_w2b4 = edge_between(w2, b4);
    if (e_w1b1 < 0 || e_w2b1 < 0 || e_w1b3 < 0 || e_w2b3 < 0)
        throw std::invalid_argument("spider_move: not a gadget face");

    // Track labels: (a,b,c,d) with K_{w1,b1} = F(b,d), K_{w1,b2} = F(a,b),
    // K_{w1,b3} = F(d,a), K_{w2,b1} = F(c,b), K_{w2,b3} = F(a,c),
    // K_{w2,b4} = F(b,a); each label is the track shared by consecutive
    // edges around a white vertex.
    auto common_angle = [&](int e1, int e2) -> double {
        const auto& p1 = patch.edge_angles[e1];
        const auto& p2 = patch.edge_angles[e2];
        for (double x : {p1.alpha, p1.beta})
            for (double y : {p2.alpha, p2.beta})
                if (same_mod_pi(x, y)) return lift_angle(x);
        throw std::invalid_argument("spider_move: edges share no track");
    };
    double lb = common_angle(e_w1b1, e_w1b2);
    double la = common_angle(e_w1b2, e_w1b3);
    double ld = common_angle(e_w1b3, e_w1b1);
    double lc = common_angle(e_w2b1, e_w2b3);

    // Normal-form parameter s: t + eta(f3) + alpha + beta for any gadget
    // edge, f3 being the third face at its white vertex.
    cx s_param;
    if (patch.normal_form_s) {
        s_param = *patch.normal_form_s;
    } else {
        auto it = patch.white_faces_eta.find(w1);
        if (it == patch.white_faces_eta.end() || patch.edge_face_eta.empty())
            throw std::domain_error("spider_move: cover face data required");
        double el = patch.edge_face_eta[e_w1b1][0], er = patch.edge_face_eta[e_w1b1][1];
        double eta3 = 0;
        for (double x : it->second)
            if (std::abs(x - el) > 1e-9 && std::abs(x - er) > 1e-9) eta3 = x;
        s_param = patch.t + eta3 + patch.edge_angles[e_w1b1].alpha +
                  patch.edge_angles[e_w1b1].beta;
    }
    auto F = [&](double x, double y) { return p.theta(x - y) * p.theta(s_param - x - y); };

    MoveRecord rec;
    rec.type = "spider";
    std::vector<int> touched = {e_w1b1, e_w1b2, e_w1b3, e_w2b1, e_w2b3, e_w2b4};
    rec.touched = touched;
    // Verify normal form edge by edge from each edge's own slots.
    {
        double worst = 0;
        for (int e : touched) {
            cx expect = F(patch.edge_angles[e].beta, patch.edge_angles[e].alpha);
            worst = std::max(worst, std::abs(patch.weight(e) - expect) / std::abs(expect));
        }
        rec.residual = worst;
        if (worst > 1e-8)
            throw std::domain_error("spider_move: weights are not in the normal form");
    }
    record_faces(patch, touched, rec.faces_before);
    rec.z_factor = 1.0;

    // Rewire per the spider pattern: w1' ~ b1, b2, b4 with weights
    // F(c,d), F(a,c), F(d,a); w2' ~ b2, b3, b4 with F(c,b), F(d,c), F(b,d).
    GraphSpec out = patch.spec;
    std::vector<cx> weights = patch.weights();
    std::vector<FinitePatch::EdgeAngles> new_angles = patch.edge_angles;
    auto set_edge = [&](int e, int w, int b, cx weight, double alpha_slot, double beta_slot) {
        out.edges[e] = {w, b, {0, 0}};
        weights[e] = weight;
        new_angles[e] = {alpha_slot, beta_slot};
    };
    int n_w1b1 = e_w1b1, n_w1b2 = e_w1b2, n_w1b4 = e_w1b3;
    int n_w2b2 = e_w2b1, n_w2b3 = e_w2b3, n_w2b4 = e_w2b4;
    set_edge(n_w1b1, w1, b1, F(lc, ld), ld, lc);
    set_edge(n_w1b2, w1, b2, F(la, lc), lc, la);
    set_edge(n_w1b4, w1, b4, F(ld, la), la, ld);
    set_edge(n_w2b2, w2, b2, F(lc, lb), lb, lc);
    set_edge(n_w2b3, w2, b3, F(ld, lc), lc, ld);
    set_edge(n_w2b4, w2, b4, F(lb, ld), ld, lb);

    // Rotations: w1' at the top (b1, b2, b4 counterclockwise), w2' at the
    // bottom (b4, b2, b3).
    out.rotation[w1] = {n_w1b1, n_w1b2, n_w1b4};
    out.rotation[w2] = {n_w2b4, n_w2b2, n_w2b3};
    auto replace_with = [&](int b, int ea, int eb, std::vector<int> repl) {
        auto& rot = out.rotation[b];
        std::vector<int> nr;
        for (size_t i = 0; i < rot.size(); ++i) {
            if (rot[i] == ea) {
                for (int r : repl) nr.push_back(r);
            } else if (rot[i] == eb) {
                continue;
            } else {
                nr.push_back(rot[i]);
            }
        }
        rot = nr;
    };
    replace_with(b1, e_w1b1, e_w2b1, {n_w1b1});
    replace_with(b3, e_w2b3, e_w1b3, {n_w2b3});
    replace_with(b2, e_w1b2, -1, {n_w2b2, n_w1b2});
    replace_with(b4, e_w2b4, -1, {n_w1b4, n_w2b4});

    FinitePatch result(std::move(out), std::move(weights));
    result.copy_metadata(patch);
    result.edge_angles = std::move(new_angles);
    result.normal_form_s = s_param;
    record_faces(result, touched, rec.faces_after);
    return {std::move(result), std::move(rec)};
}

namespace {

cx reference_weight(const FinitePatch& p, const std::vector<int>& edges) {
    cx w = 1;
    for (int e : edges) w *= p.weight(e);
    return w;
}

// All matchings agreeing with `fixed_ext` outside the touched edge set.
std::vector<std::vector<int>> matchings_extending(const FinitePatch& p,
                                                  const std::set<int>& fixed_ext,
                                                  const std::vector<int>& touched,
                                                  size_t limit = 16) {
    std::vector<int> whites;
    for (int v = 0; v < (int)p.spec.color.size(); ++v)
        if (p.spec.color[v] == 'w') whites.push_back(v);
    std::vector<std::vector<std::pair<int, int>>> adj(whites.size());
    std::map<int, int> white_index;
    for (size_t i = 0; i < whites.size(); ++i) white_index[whites[i]] = (int)i;
    for (int e = 0; e < (int)p.spec.edges.size(); ++e)
        adj[white_index[p.spec.edges[e].w]].push_back({e, p.spec.edges[e].b});
    std::vector<bool> black_used(p.spec.color.size(), false);
    std::vector<int> chosen;
    std::vector<std::vector<int>> found;
    auto is_touched = [&](int e) {
        return std::find(touched.begin(), touched.end(), e) != touched.end();
    };
    std::function<void(size_t)> rec = [&](size_t i) {
        if (found.size() >= limit) return;
        if (i == whites.size()) {
            auto m = chosen;
            std::sort(m.begin(), m.end());
            found.push_back(m);
            return;
        }
        for (auto [e, b] : adj[i]) {
            if (black_used[b]) continue;
            if (!is_touched(e) && !fixed_ext.count(e)) continue;
            black_used[b] = true;
            chosen.push_back(e);
            rec(i + 1);
            chosen.pop_back();
            black_used[b] = false;
        }
    };
    rec(0);
    return found;
}

} // namespace

PartitionInvariance partition_invariance(const FinitePatch& before, const FinitePatch& after,
                                         const MoveRecord& record) {
    PartitionInvariance out;
    out.z_before = before.z_enumeration();
    out.z_after = after.z_enumeration();
    out.relative_gap =
        std::abs(out.z_after - record.z_factor * out.z_before) / std::max(out.z_after, 1e-300);
    out.det_gap_before =
        std::abs(out.z_before - before.z_determinant()) / std::max(out.z_before, 1e-300);
    out.det_gap_after =
        std::abs(out.z_after - after.z_determinant()) / std::max(out.z_after, 1e-300);

    // Height-function form: Z / nu(M1) with corresponding references.  The
    // reference must determine its gadget completion uniquely on both sides,
    // so scan reference candidates until the correspondence is 1-1.
    std::vector<int> all_edges(before.spec.edges.size());
    std::iota(all_edges.begin(), all_edges.end(), 0);
    auto candidates = matchings_extending(before, {}, all_edges, 64);
    for (const auto& m1 : candidates) {
        std::set<int> ext(m1.begin(), m1.end());
        for (int e : record.touched) ext.erase(e);
        auto exts_before = matchings_extending(before, ext, record.touched, 4);
        auto exts_after = matchings_extending(after, ext, record.touched, 4);
        if (exts_before.size() != 1 || exts_after.size() != 1) continue;
        double nb = std::abs(reference_weight(before, exts_before[0]));
        double na = std::abs(reference_weight(after, exts_after[0]));
        // Brute-force partition functions, normalized by the corresponding
        // reference matchings (the face-weight form).
        out.hf_before = out.z_before / nb;
        out.hf_after = out.z_after / na;
        out.hf_gap = std::abs(out.hf_after - out.hf_before) / std::max(out.hf_before, 1e-300);
        // Determinant route with the same normalization.
        out.hf_det_before = before.z_determinant() / nb;
        out.hf_det_after = after.z_determinant() / na;
        out.hf_det_gap =
            std::abs(out.hf_det_after - out.hf_det_before) / std::max(out.hf_det_before, 1e-300);
        break;
    }
    return out;
}

} // namespace elldimer
