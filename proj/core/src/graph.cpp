#include "elldimer/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace elldimer {

using nlohmann::json;

// ---------------------------------------------------------------------------
// GraphSpec

namespace {

GraphSpec make_square() {
    // Z^2 with a one-white one-black fundamental domain; periods are the
    // color-preserving diagonals (1,1) and (-1,1) of the original lattice
    // (a positively oriented basis).
    GraphSpec s;
    s.name = "square";
    s.color = {'w', 'b'};
    s.edges = {
        {0, 1, {0, 0}},  // east
        {0, 1, {-1, 1}}, // west
        {0, 1, {0, 1}},  // north
        {0, 1, {-1, 0}}, // south
    };
    s.rotation = {
        {0, 2, 1, 3}, // at w: E, N, W, S counterclockwise
        {1, 3, 0, 2}, // at b
    };
    return s;
}

GraphSpec make_hexagonal() {
    GraphSpec s;
    s.name = "hexagonal";
    s.color = {'w', 'b'};
    s.edges = {
        {0, 1, {0, 0}},
        {0, 1, {-1, 0}},
        {0, 1, {0, -1}},
    };
    s.rotation = {
        {0, 1, 2},
        {2, 0, 1},
    };
    return s;
}

GraphSpec make_square_octagon() {
    // Each vertex of Z^2 blown up into a 4-cycle; cell colors alternate with
    // the parity of the cell.  Fundamental domain: cells (0,0) and (1,0);
    // periods (1,1) and (-1,1) in cell coordinates.
    GraphSpec s;
    s.name = "square_octagon";
    // even cell: E0=0 (b), N0=1 (w), W0=2 (b), S0=3 (w)
    // odd cell:  E1=4 (w), N1=5 (b), W1=6 (w), S1=7 (b)
    s.color = {'b', 'w', 'b', 'w', 'w', 'b', 'w', 'b'};
    s.edges = {
        {1, 0, {0, 0}},  // 0: N0-E0
        {1, 2, {0, 0}},  // 1: N0-W0
        {3, 0, {0, 0}},  // 2: S0-E0
        {3, 2, {0, 0}},  // 3: S0-W0
        {4, 5, {0, 0}},  // 4: E1-N1
        {6, 5, {0, 0}},  // 5: W1-N1
        {4, 7, {0, 0}},  // 6: E1-S1
        {6, 7, {0, 0}},  // 7: W1-S1
        {6, 0, {0, 0}},  // 8: W1-E0 connector
        {4, 2, {1, -1}}, // 9: E1-W0 connector
        {1, 7, {0, 1}},  // 10: N0-S1 connector
        {3, 5, {-1, 0}}, // 11: S0-N1 connector
    };
    s.rotation = {
        /* E0 */ {8, 0, 2},
        /* N0 */ {10, 1, 0},
        /* W0 */ {1, 9, 3},
        /* S0 */ {2, 3, 11},
        /* E1 */ {9, 4, 6},
        /* N1 */ {11, 5, 4},
        /* W1 */ {5, 8, 7},
        /* S1 */ {6, 7, 10},
    };
    return s;
}

GraphSpec make_fig_nonminimal();

} // namespace

GraphSpec GraphSpec::builtin(const std::string& name) {
    if (name == "square") return make_square();
    if (name == "hexagonal") return make_hexagonal();
    if (name == "hex_1_3") {
        GraphSpec s = make_hexagonal().relattice({2, 1}, {-1, 2});
        s.name = "hex_1_3";
        return s;
    }
    if (name == "square_octagon") return make_square_octagon();
    if (name == "fig_graph_nonminimal") return make_fig_nonminimal();
    throw std::invalid_argument("unknown builtin graph: " + name);
}

GraphSpec GraphSpec::from_json_text(const std::string& text) {
    json j = json::parse(text);
    GraphSpec s;
    s.name = j.value("name", "");
    s.periodic = j.value("periodic", true);
    std::map<int, char> colors;
    for (const auto& v : j.at("vertices"))
        colors[v.at("id").get<int>()] = v.at("color").get<std::string>().at(0);
    s.color.resize(colors.size());
    for (auto& [id, c] : colors) {
        if (id < 0 || id >= (int)colors.size())
            throw std::invalid_argument("vertex ids must be 0..n-1");
        if (c != 'w' && c != 'b')
            throw std::invalid_argument("vertex color must be 'w' or 'b'");
        s.color[id] = c;
    }
    for (const auto& e : j.at("edges")) {
        GraphSpec::Edge edge;
        edge.w = e.at("w").get<int>();
        edge.b = e.at("b").get<int>();
        edge.off = {e.value("dx", 0), e.value("dy", 0)};
        if (edge.w < 0 || edge.w >= (int)s.color.size() || edge.b < 0 ||
            edge.b >= (int)s.color.size())
            throw std::invalid_argument("edge endpoint out of range");
        if (s.color[edge.w] != 'w' || s.color[edge.b] != 'b')
            throw std::invalid_argument("edges must join a white to a black vertex");
        s.edges.push_back(edge);
    }
    if (j.contains("rotation")) {
        s.rotation.resize(s.color.size());
        for (auto it = j.at("rotation").begin(); it != j.at("rotation").end(); ++it)
            s.rotation[std::stoi(it.key())] = it.value().get<std::vector<int>>();
    }
    if (j.contains("outer_half_edge")) {
        auto arr = j.at("outer_half_edge");
        s.outer_half_edge = std::make_pair(arr.at(0).get<int>(), arr.at(1).get<int>());
    }
    return s;
}

std::string GraphSpec::to_json_text() const {
    json j;
    j["name"] = name;
    j["periodic"] = periodic;
    j["vertices"] = json::array();
    for (size_t i = 0; i < color.size(); ++i)
        j["vertices"].push_back({{"id", (int)i}, {"color", std::string(1, color[i])}});
    j["edges"] = json::array();
    for (const auto& e : edges)
        j["edges"].push_back({{"w", e.w}, {"b", e.b}, {"dx", e.off.x}, {"dy", e.off.y}});
    if (!rotation.empty()) {
        json r = json::object();
        for (size_t v = 0; v < rotation.size(); ++v) r[std::to_string(v)] = rotation[v];
        j["rotation"] = r;
    }
    if (outer_half_edge)
        j["outer_half_edge"] = {outer_half_edge->first, outer_half_edge->second};
    return j.dump(2);
}

GraphSpec GraphSpec::relattice(Offset v1, Offset v2) const {
    long det = (long)v1.x * v2.y - (long)v1.y * v2.x;
    if (det <= 0) throw std::invalid_argument("relattice: determinant must be positive");
    std::vector<Offset> reps;
    std::map<Offset, int> rep_index;
    auto decompose = [&](Offset c) -> std::pair<int, Offset> {
        double da = (double)((long)c.x * v2.y - (long)c.y * v2.x) / (double)det;
        double db = (double)((long)v1.x * c.y - (long)v1.y * c.x) / (double)det;
        for (int a = (int)std::floor(da) - 1; a <= (int)std::floor(da) + 2; ++a)
            for (int b = (int)std::floor(db) - 1; b <= (int)std::floor(db) + 2; ++b) {
                Offset r{c.x - a * v1.x - b * v2.x, c.y - a * v1.y - b * v2.y};
                auto it = rep_index.find(r);
                if (it != rep_index.end()) return {it->second, {a, b}};
            }
        return {-1, {}};
    };
    std::deque<Offset> todo{{0, 0}};
    std::set<Offset> seen{Offset{0, 0}};
    while (!todo.empty() && (long)reps.size() < det) {
        Offset c = todo.front();
        todo.pop_front();
        if (decompose(c).first < 0) {
            rep_index[c] = (int)reps.size();
            reps.push_back(c);
        }
        for (Offset d : {Offset{1, 0}, Offset{-1, 0}, Offset{0, 1}, Offset{0, -1}}) {
            Offset n = c + d;
            if (seen.insert(n).second) todo.push_back(n);
        }
    }
    if ((long)reps.size() != det) throw std::runtime_error("relattice: rep enumeration failed");

    GraphSpec out;
    out.name = name + "_relattice";
    out.periodic = true;
    int nv = (int)color.size();
    out.color.resize(nv * det);
    for (int r = 0; r < det; ++r)
        for (int v = 0; v < nv; ++v) out.color[r * nv + v] = color[v];
    std::vector<int> edge_id(det * edges.size(), -1);
    for (int r = 0; r < det; ++r) {
        for (size_t e = 0; e < edges.size(); ++e) {
            auto [r2, ab] = decompose(reps[r] + edges[e].off);
            GraphSpec::Edge ne;
            ne.w = r * nv + edges[e].w;
            ne.b = r2 * nv + edges[e].b;
            ne.off = ab;
            edge_id[r * edges.size() + e] = (int)out.edges.size();
            out.edges.push_back(ne);
        }
    }
    const std::vector<std::vector<int>>* rot = &rotation;
    std::vector<std::vector<int>> derived;
    if (rotation.empty()) {
        derived.resize(nv);
        for (size_t e = 0; e < edges.size(); ++e) {
            derived[edges[e].w].push_back((int)e);
            derived[edges[e].b].push_back((int)e);
        }
        rot = &derived;
    }
    out.rotation.assign(nv * det, {});
    for (int r = 0; r < det; ++r) {
        for (int v = 0; v < nv; ++v) {
            std::vector<int> order;
            for (int e : (*rot)[v]) {
                if (edges[e].w == v) {
                    order.push_back(edge_id[r * edges.size() + e]);
                } else {
                    // The copy of e whose black end lands at rep r is anchored
                    // at the white rep of (rep r - off).
                    auto [r1, ab] = decompose(reps[r] - edges[e].off);
                    (void)ab;
                    order.push_back(edge_id[r1 * edges.size() + e]);
                }
            }
            out.rotation[r * nv + v] = order;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// BipartiteGraph

BipartiteGraph::BipartiteGraph(GraphSpec spec) : spec_(std::move(spec)) {
    int nv = num_vertices();
    if (!spec_.rotation.empty()) {
        rotation_ = spec_.rotation;
        if ((int)rotation_.size() != nv)
            throw std::invalid_argument("rotation size mismatch");
    } else {
        rotation_.assign(nv, {});
        for (int e = 0; e < num_edges(); ++e) {
            rotation_[spec_.edges[e].w].push_back(e);
            rotation_[spec_.edges[e].b].push_back(e);
        }
    }
    rot_index_.assign(nv, {});
    for (int v = 0; v < nv; ++v) {
        int expected = 0;
        for (const auto& e : spec_.edges)
            if (e.w == v || e.b == v) expected++;
        if ((int)rotation_[v].size() != expected)
            throw std::invalid_argument("rotation at vertex " + std::to_string(v) +
                                        " does not list each incident edge once");
        rot_index_[v].assign(num_edges(), -1);
        for (size_t k = 0; k < rotation_[v].size(); ++k) {
            int e = rotation_[v][k];
            if (e < 0 || e >= num_edges() ||
                (spec_.edges[e].w != v && spec_.edges[e].b != v) || rot_index_[v][e] >= 0)
                throw std::invalid_argument("inconsistent rotation at vertex " +
                                            std::to_string(v));
            rot_index_[v][e] = (int)k;
        }
    }
    trace_faces();
    walk_tracks();
}

int BipartiteGraph::tail(int h) const {
    const auto& e = spec_.edges[h / 2];
    return (h % 2 == 0) ? e.w : e.b;
}

int BipartiteGraph::head(int h) const {
    const auto& e = spec_.edges[h / 2];
    return (h % 2 == 0) ? e.b : e.w;
}

Offset BipartiteGraph::half_edge_offset(int h) const {
    Offset o = spec_.edges[h / 2].off;
    return (h % 2 == 0) ? o : Offset{-o.x, -o.y};
}

void BipartiteGraph::trace_faces() {
    int H = half_edges();
    face_of_.assign(H, -1);
    pos_in_face_.assign(H, -1);

    auto next_half_edge = [&](int h) {
        int v = head(h);
        int e = h / 2;
        const auto& rot = rotation_[v];
        int idx = rot_index_[v][e];
        int e2 = rot[(idx - 1 + (int)rot.size()) % rot.size()];
        int d2 = (spec_.edges[e2].w == v) ? 0 : 1;
        return 2 * e2 + d2;
    };

    for (int h0 = 0; h0 < H; ++h0) {
        if (face_of_[h0] >= 0) continue;
        Face f;
        int h = h0;
        Offset acc{0, 0};
        do {
            face_of_[h] = (int)faces_.size();
            pos_in_face_[h] = (int)f.boundary.size();
            f.boundary.push_back(h);
            acc = acc + half_edge_offset(h);
            f.head_offset.push_back(acc);
            h = next_half_edge(h);
        } while (h != h0);
        if (spec_.periodic && !(acc == Offset{0, 0}))
            throw std::invalid_argument("face is not a topological disc");
        faces_.push_back(std::move(f));
    }

    int V = num_vertices(), E = num_edges(), F = (int)faces_.size();
    if (spec_.periodic) {
        if (V - E + F != 0)
            throw std::invalid_argument("Euler relation V-E+F=0 fails on the torus");
    } else {
        if (V - E + F != 2)
            throw std::invalid_argument("finite spec is not planar (V-E+F != 2)");
        int outer = -1;
        if (spec_.outer_half_edge) {
            auto [e, d] = *spec_.outer_half_edge;
            outer = face_of_[2 * e + d];
        } else {
            size_t best = 0;
            for (int f = 0; f < F; ++f)
                if (faces_[f].boundary.size() > best) {
                    best = faces_[f].boundary.size();
                    outer = f;
                }
        }
        faces_[outer].outer = true;
    }

    corners_at_.assign(num_vertices(), {});
    for (int f = 0; f < (int)faces_.size(); ++f) {
        for (int k = 0; k < (int)faces_[f].boundary.size(); ++k) {
            Corner c{f, k};
            int v = corner_vertex(c);
            corners_at_[v].push_back({c, f, Offset{0, 0} - faces_[f].head_offset[k]});
        }
    }
}

Offset BipartiteGraph::face_left_base(int e) const {
    int h = 2 * e;
    int p = pos_in_face_[h];
    const Face& f = faces_[face_of_[h]];
    Offset tail_off = (p == 0) ? Offset{0, 0} : f.head_offset[p - 1];
    return Offset{0, 0} - tail_off;
}

Offset BipartiteGraph::face_right_base(int e) const {
    int h = 2 * e + 1;
    int p = pos_in_face_[h];
    const Face& f = faces_[face_of_[h]];
    Offset tail_off = (p == 0) ? Offset{0, 0} : f.head_offset[p - 1];
    return spec_.edges[e].off - tail_off;
}

int BipartiteGraph::corner_vertex(const Corner& c) const {
    return head(faces_[c.face].boundary[c.pos]);
}

std::array<int, 2> BipartiteGraph::corner_edges(const Corner& c) const {
    const auto& b = faces_[c.face].boundary;
    return {b[c.pos] / 2, b[(c.pos + 1) % b.size()] / 2};
}

Offset BipartiteGraph::corner_vertex_offset(const Corner& c) const {
    return faces_[c.face].head_offset[c.pos];
}

namespace {
int wrap(int k, int n) { return ((k % n) + n) % n; }
long det2(Offset a, Offset b) { return (long)a.x * b.y - (long)a.y * b.x; }
} // namespace

Corner BipartiteGraph::side_wf(int e) const {
    int h = 2 * e;
    const Face& f = faces_[face_of_[h]];
    return {face_of_[h], wrap(pos_in_face_[h] - 1, (int)f.boundary.size())};
}

Corner BipartiteGraph::side_fb(int e) const { return {face_of_[2 * e], pos_in_face_[2 * e]}; }

Corner BipartiteGraph::side_bfp(int e) const {
    int h = 2 * e + 1;
    const Face& f = faces_[face_of_[h]];
    return {face_of_[h], wrap(pos_in_face_[h] - 1, (int)f.boundary.size())};
}

Corner BipartiteGraph::side_wfp(int e) const {
    return {face_of_[2 * e + 1], pos_in_face_[2 * e + 1]};
}

int BipartiteGraph::corner_track(const Corner& c) const {
    for (int e : corner_edges(c)) {
        if (side_wf(e) == c || side_bfp(e) == c) return quad_track_[e][0];
        if (side_fb(e) == c || side_wfp(e) == c) return quad_track_[e][1];
    }
    throw std::logic_error("corner_track: corner not matched");
}

int BipartiteGraph::corner_pair_for(const Corner& c, int e) const {
    if (side_wf(e) == c || side_bfp(e) == c) return 0;
    if (side_fb(e) == c || side_wfp(e) == c) return 1;
    throw std::logic_error("corner_pair_for: corner is not a side of this quad");
}

void BipartiteGraph::walk_tracks() {
    int E = num_edges();
    quad_track_.assign(E, {-1, -1});
    tracks_.clear();
    bool finite = !spec_.periodic;

    struct State {
        int e = -1, pair = -1;
        Offset at; // offset of the white endpoint of e
    };
    auto exit_corner = [&](const State& s) {
        return s.pair == 0 ? side_wf(s.e) : side_fb(s.e);
    };
    auto entry_corner_of = [&](int e, int pair) {
        return pair == 0 ? side_bfp(e) : side_wfp(e);
    };
    auto step = [&](const State& s) -> std::optional<State> {
        Corner c = exit_corner(s);
        if (finite && faces_[c.face].outer) return std::nullopt;
        auto [a, b] = corner_edges(c);
        int e2 = (a == s.e) ? b : a;
        Offset vpos = (s.pair == 0) ? s.at : s.at + spec_.edges[s.e].off;
        State n;
        n.e = e2;
        if (entry_corner_of(e2, 0) == c) {
            n.pair = 0;
            n.at = vpos - spec_.edges[e2].off; // corner vertex is the black end
        } else if (entry_corner_of(e2, 1) == c) {
            n.pair = 1;
            n.at = vpos; // corner vertex is the white end
        } else {
            throw std::logic_error("track step: entry corner mismatch");
        }
        return n;
    };

    std::vector<std::array<bool, 2>> visited((size_t)E, {false, false});

    auto record_walk = [&](State start, bool closed) {
        TrainTrack t;
        t.id = (int)tracks_.size();
        t.closed = closed;
        State s = start;
        while (true) {
            visited[s.e][s.pair] = true;
            quad_track_[s.e][s.pair] = t.id;
            t.steps.push_back({s.e, s.pair, s.at});
            auto n = step(s);
            if (!n) {
                t.closed = false;
                break;
            }
            if (n->e == start.e && n->pair == start.pair) {
                t.homology = n->at - start.at;
                break;
            }
            s = *n;
        }
        tracks_.push_back(std::move(t));
    };

    if (finite) {
        for (int e = 0; e < E; ++e)
            for (int pair = 0; pair < 2; ++pair) {
                if (visited[e][pair]) continue;
                if (faces_[entry_corner_of(e, pair).face].outer)
                    record_walk({e, pair, {0, 0}}, false);
            }
    }
    for (int e = 0; e < E; ++e)
        for (int pair = 0; pair < 2; ++pair)
            if (!visited[e][pair]) record_walk({e, pair, {0, 0}}, spec_.periodic);
}

// ---------------------------------------------------------------------------
// Minimality

namespace {

// A lifted strand: positions along a bi-infinite track lift restricted to a
// window of the plane.  Key: cover quad; value: linear position along the lift.
struct Strand {
    int track = -1;
    std::map<std::pair<int, Offset>, long> positions; // (edge, offset) -> position
};

} // namespace

MinimalityCertificate BipartiteGraph::check_minimal() const {
    MinimalityCertificate cert;
    auto add = [&](std::string reason, int ta, int tb, std::vector<int> quads) {
        cert.minimal = false;
        cert.violations.push_back({std::move(reason), ta, tb, std::move(quads)});
    };
    if (spec_.periodic) {
        for (const auto& t : tracks_) {
            long g = std::gcd((long)std::abs(t.homology.x), (long)std::abs(t.homology.y));
            if (g != 1)
                add(g == 0 ? "track is null-homotopic" : "track homology is not primitive",
                    t.id, t.id, {});
        }
        // Lift every track to the plane and scan a window: a lift meeting a
        // cover quad twice is a self-intersection; two lifts whose common
        // quads ever appear in the same order along both form a parallel
        // bigon.  Anti-parallel bigons (opposite orders) are allowed.
        int n = 3 * (int)tracks_.size();
        cert.scan_window = n;
        std::vector<Strand> strands;
        std::set<int> self_reported;
        for (const auto& t : tracks_) {
            long len = (long)t.steps.size();
            Offset gamma = t.homology;
            std::set<Offset> reduced;
            for (int dx = -n; dx <= n; ++dx) {
                for (int dy = -n; dy <= n; ++dy) {
                    Offset d{dx, dy};
                    long g2 = (long)gamma.x * gamma.x + (long)gamma.y * gamma.y;
                    long m = (g2 == 0)
                                 ? 0
                                 : (long)std::floor((double)((long)d.x * gamma.x +
                                                             (long)d.y * gamma.y) /
                                                        (double)g2 +
                                                    0.5);
                    reduced.insert(Offset{d.x - (int)(m * gamma.x), d.y - (int)(m * gamma.y)});
                }
            }
            for (Offset d : reduced) {
                Strand s;
                s.track = t.id;
                bool touches = false;
                for (long m = -n - 1; m <= n + 1; ++m) {
                    for (long k = 0; k < len; ++k) {
                        Offset at = t.steps[k].at + d +
                                    Offset{(int)(m * gamma.x), (int)(m * gamma.y)};
                        if (std::abs(at.x) > n || std::abs(at.y) > n) continue;
                        touches = true;
                        auto key = std::make_pair(t.steps[k].edge, at);
                        auto [it, fresh] = s.positions.insert({key, m * len + k});
                        if (!fresh && self_reported.insert(t.id).second)
                            add("track self-intersects", t.id, t.id, {t.steps[k].edge});
                    }
                }
                if (touches) strands.push_back(std::move(s));
            }
        }
        std::set<std::pair<int, int>> bigon_reported;
        for (size_t i = 0; i < strands.size(); ++i) {
            for (size_t j = i + 1; j < strands.size(); ++j) {
                std::vector<std::pair<long, long>> common;
                std::map<long, int> quad_by_pos;
                for (const auto& [quad, pos] : strands[i].positions) {
                    auto it = strands[j].positions.find(quad);
                    if (it != strands[j].positions.end()) {
                        common.push_back({pos, it->second});
                        quad_by_pos[pos] = quad.first;
                    }
                }
                std::sort(common.begin(), common.end());
                for (size_t k = 0; k + 1 < common.size(); ++k) {
                    if (common[k + 1].second > common[k].second) {
                        auto key = std::minmax(strands[i].track, strands[j].track);
                        if (bigon_reported.insert({key.first, key.second}).second)
                            add("parallel bigon", strands[i].track, strands[j].track,
                                {quad_by_pos[common[k].first], quad_by_pos[common[k + 1].first]});
                        break;
                    }
                }
            }
        }
        return cert;
    }

    // Finite graphs: scan the strips directly.
    for (const auto& t : tracks_) {
        std::set<int> seen;
        std::vector<int> dup;
        for (const auto& s : t.steps)
            if (!seen.insert(s.edge).second) dup.push_back(s.edge);
        if (!dup.empty()) add("track self-intersects", t.id, t.id, dup);
    }
    for (size_t i = 0; i < tracks_.size(); ++i) {
        std::map<int, int> pos_i;
        for (size_t k = 0; k < tracks_[i].steps.size(); ++k)
            pos_i[tracks_[i].steps[k].edge] = (int)k;
        for (size_t j = i + 1; j < tracks_.size(); ++j) {
            std::vector<std::pair<int, int>> common;
            for (size_t k = 0; k < tracks_[j].steps.size(); ++k) {
                auto it = pos_i.find(tracks_[j].steps[k].edge);
                if (it != pos_i.end()) common.push_back({it->second, (int)k});
            }
            std::sort(common.begin(), common.end());
            for (size_t k = 0; k + 1 < common.size(); ++k) {
                if (common[k + 1].second > common[k].second) {
                    add("parallel bigon", (int)i, (int)j,
                        {tracks_[i].steps[common[k].first].edge,
                         tracks_[i].steps[common[k + 1].first].edge});
                    break;
                }
            }
        }
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Quad-graph on the cover

std::vector<QuadEdge> quad_neighbors(const BipartiteGraph& g, const CoverNode& n) {
    std::vector<QuadEdge> out;
    if (!n.is_face) {
        for (const auto& vc : g.corners_at(n.id)) {
            QuadEdge qe;
            qe.to = cover_face(vc.face, n.at + vc.face_base);
            qe.track = g.corner_track(vc.corner);
            qe.quad = g.corner_edges(vc.corner)[0];
            qe.sign = (g.color(n.id) == 'w') ? +1 : -1;
            out.push_back(qe);
        }
    } else {
        const auto& face = g.face(n.id);
        for (int k = 0; k < (int)face.boundary.size(); ++k) {
            Corner c{n.id, k};
            int v = g.corner_vertex(c);
            QuadEdge qe;
            qe.to = cover_vertex(v, n.at + face.head_offset[k]);
            qe.track = g.corner_track(c);
            qe.quad = g.corner_edges(c)[0];
            qe.sign = (g.color(v) == 'w') ? -1 : +1;
            out.push_back(qe);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Half-angle map checks

namespace {

double lift_mod_pi(double x) {
    double r = std::fmod(x, 3.14159265358979323846);
    if (r < 0) r += 3.14159265358979323846;
    return r;
}

double mod_pi_distance(double x) {
    double r = lift_mod_pi(x);
    return std::min(r, 3.14159265358979323846 - r);
}

} // namespace

AngleMapCheck check_half_angle_map(const BipartiteGraph& g, const HalfAngleMap& alpha) {
    const double pi = 3.14159265358979323846;
    AngleMapCheck out;
    if (!g.periodic()) {
        out.ok = false;
        out.violation = "cyclic-order check implemented for periodic graphs only";
        return out;
    }
    const auto& tracks = g.tracks();
    if ((int)alpha.alpha.size() != (int)tracks.size()) {
        out.ok = false;
        out.violation = "angle count does not match track count";
        return out;
    }
    for (size_t i = 0; i < tracks.size(); ++i)
        for (size_t j = i + 1; j < tracks.size(); ++j) {
            Offset hi = tracks[i].homology, hj = tracks[j].homology;
            bool anti = (hi.x == -hj.x && hi.y == -hj.y);
            bool inter = det2(hi, hj) != 0;
            if ((anti || inter) && mod_pi_distance(alpha.alpha[i] - alpha.alpha[j]) < 1e-12) {
                out.ok = false;
                out.violation = anti ? "anti-parallel tracks share an angle"
                                     : "intersecting tracks share an angle";
                out.track_a = (int)i;
                out.track_b = (int)j;
                return out;
            }
        }
    std::vector<int> order(tracks.size());
    std::iota(order.begin(), order.end(), 0);
    auto dir = [&](int t) {
        return std::atan2((double)tracks[t].homology.y, (double)tracks[t].homology.x);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dir(a) < dir(b); });
    std::vector<int> arranged;
    size_t i = 0;
    double prev = alpha.alpha[order.back()];
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && dir(order[j]) == dir(order[i])) j++;
        std::vector<int> group(order.begin() + i, order.begin() + j);
        std::sort(group.begin(), group.end(), [&](int a, int b) {
            return lift_mod_pi(alpha.alpha[a] - prev) < lift_mod_pi(alpha.alpha[b] - prev);
        });
        for (int t : group) arranged.push_back(t);
        prev = alpha.alpha[arranged.back()];
        i = j;
    }
    double total = 0;
    for (size_t k = 0; k < arranged.size(); ++k) {
        int a = arranged[k];
        int b = arranged[(k + 1) % arranged.size()];
        total += lift_mod_pi(alpha.alpha[b] - alpha.alpha[a]);
    }
    if (std::abs(total - pi) > 1e-9) {
        out.ok = false;
        out.violation = "angles are not monotone w.r.t. the cyclic order of tracks";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Abel map

AbelMap::AbelMap(const BipartiteGraph& g, const HalfAngleMap& alpha, CoverNode base)
    : g_(g), alpha_(alpha), base_(base) {
    values_[base_] = Value{};
    frontier_.push_back(base_);
}

void AbelMap::grow_to(const CoverNode& n) const {
    size_t guard = 0;
    while (values_.find(n) == values_.end()) {
        if (frontier_.empty() || ++guard > 100000)
            throw std::runtime_error("AbelMap: node unreachable");
        std::vector<CoverNode> next;
        for (const auto& x : frontier_) {
            const Value vx = values_.at(x);
            for (const auto& qe : quad_neighbors(g_, x)) {
                if (values_.count(qe.to)) continue;
                Value vy = vx;
                vy.formal[qe.track] += qe.sign;
                if (vy.formal[qe.track] == 0) vy.formal.erase(qe.track);
                vy.value = vx.value + qe.sign * alpha_.angle(qe.track);
                values_[qe.to] = std::move(vy);
                next.push_back(qe.to);
            }
        }
        frontier_ = std::move(next);
    }
}

const AbelMap::Value& AbelMap::at(const CoverNode& n) const {
    grow_to(n);
    return values_.at(n);
}

// ---------------------------------------------------------------------------
// Quad-graph BFS

std::vector<CoverNode> quad_path(const BipartiteGraph& g, CoverNode from, CoverNode to) {
    if (from == to) return {from};
    std::unordered_map<CoverNode, CoverNode, CoverNodeHash> parent;
    parent[from] = from;
    std::deque<CoverNode> queue{from};
    while (!queue.empty()) {
        CoverNode x = queue.front();
        queue.pop_front();
        auto nbrs = quad_neighbors(g, x);
        std::sort(nbrs.begin(), nbrs.end(), [](const QuadEdge& a, const QuadEdge& b) {
            return std::tuple(a.to.is_face, a.to.id, a.to.at.x, a.to.at.y) <
                   std::tuple(b.to.is_face, b.to.id, b.to.at.x, b.to.at.y);
        });
        for (const auto& qe : nbrs) {
            if (parent.count(qe.to)) continue;
            parent[qe.to] = x;
            if (qe.to == to) {
                std::vector<CoverNode> path{to};
                CoverNode c = to;
                while (!(c == from)) {
                    c = parent.at(c);
                    path.push_back(c);
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            queue.push_back(qe.to);
        }
    }
    throw std::runtime_error("quad_path: no path found");
}

int quad_distance(const BipartiteGraph& g, CoverNode from, CoverNode to) {
    return (int)quad_path(g, from, to).size() - 1;
}

// ---------------------------------------------------------------------------
// Non-minimal test fixture

namespace {

GraphSpec make_fig_nonminimal() {
    // A finite planar bipartite graph whose train-tracks exhibit both
    // forbidden patterns: the first and last tracks each cross themselves
    // once, and there are two parallel bigons.  Two color-swapped copies of a
    // 7-vertex spiral gadget joined by single corridors.
    GraphSpec s;
    s.name = "fig_graph_nonminimal";
    s.periodic = false;
    //           0    1    2    3    4    5    6    7    8    9   10   11   12   13
    s.color = {'w', 'w', 'w', 'b', 'b', 'b', 'b', 'b', 'b', 'b', 'w', 'w', 'w', 'w'};
    s.edges = {
        {0, 6, {0, 0}},   // e0
        {0, 5, {0, 0}},   // e1
        {2, 5, {0, 0}},   // e2
        {0, 4, {0, 0}},   // e3
        {1, 5, {0, 0}},   // e4
        {1, 6, {0, 0}},   // e5
        {2, 4, {0, 0}},   // e6
        {1, 3, {0, 0}},   // e7
        {0, 3, {0, 0}},   // e8
        {2, 3, {0, 0}},   // e9
        {0, 7, {0, 0}},   // e10 corridor
        {1, 8, {0, 0}},   // e11 corridor
        {13, 7, {0, 0}},  // e12
        {12, 7, {0, 0}},  // e13
        {12, 9, {0, 0}},  // e14
        {11, 7, {0, 0}},  // e15
        {12, 8, {0, 0}},  // e16
        {13, 8, {0, 0}},  // e17
        {11, 9, {0, 0}},  // e18
        {10, 8, {0, 0}},  // e19
        {10, 7, {0, 0}},  // e20
        {10, 9, {0, 0}},  // e21
    };
    s.rotation = {
        /* 0 */ {1, 3, 8, 0, 10},
        /* 1 */ {5, 7, 4, 11},
        /* 2 */ {9, 6, 2},
        /* 3 */ {9, 7, 8},
        /* 4 */ {6, 3},
        /* 5 */ {2, 1, 4},
        /* 6 */ {5, 0},
        /* 7 */ {13, 15, 20, 12, 10},
        /* 8 */ {17, 19, 16, 11},
        /* 9 */ {21, 18, 14},
        /* 10 */ {21, 19, 20},
        /* 11 */ {18, 15},
        /* 12 */ {14, 13, 16},
        /* 13 */ {17, 12},
    };
    return s;
}

} // namespace

} // namespace elldimer
