#include "elldimer/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace elldimer {

namespace {

bool in_window(const CoverNode& n, int radius) {
    return std::abs(n.at.x) <= radius && std::abs(n.at.y) <= radius;
}

} // namespace

Immersion t_immersion(const WeightSystem& ws, cx u, XiChoice xi, int radius) {
    const auto& g = ws.graph();
    const auto& p = ws.params();
    Immersion imm;
    imm.u = u;
    imm.xi = xi;

    // Dual-edge increments, integrated over a BFS spanning tree of the dual
    // cover from the pinned base face.
    auto increment = [&](int e, Offset at) {
        CoverNode b = cover_vertex(g.edge(e).b, at + g.edge(e).off);
        CoverNode w = cover_vertex(g.edge(e).w, at);
        cx gv = g_factorized(ws, b, w).eval(u);
        return p.theta_prime0() * gv * ws.coefficient(CoverEdge{e, at});
    };

    CoverNode base = cover_face(0, {0, 0});
    imm.position[base] = 0;
    std::deque<CoverNode> queue{base};
    while (!queue.empty()) {
        CoverNode f = queue.front();
        queue.pop_front();
        cx here = imm.position.at(f);
        // Neighboring faces across each primal edge bounding f.
        for (int h : g.face(f.id).boundary) {
            int e = h / 2;
            // Offset of the edge's white endpoint relative to the face base.
            Offset white_at;
            {
                int pos = g.pos_in_face(h);
                const auto& face = g.face(f.id);
                Offset tail =
                    (pos == 0) ? Offset{0, 0} : face.head_offset[pos - 1];
                white_at = (h % 2 == 0) ? f.at + tail
                                        : f.at + face.head_offset[pos];
            }
            CoverNode fl = cover_face(g.face_left(e), white_at + g.face_left_base(e));
            CoverNode fr = cover_face(g.face_right(e), white_at + g.face_right_base(e));
            CoverNode other = (fl == f) ? fr : fl;
            if (!in_window(other, radius) || imm.position.count(other)) continue;
            cx inc = increment(e, white_at); // Psi(f_left) - Psi(f_right)
            imm.position[other] = (fl == f) ? here - inc : here + inc;
            queue.push_back(other);
        }
    }
    // Record dual edges between placed faces.
    for (const auto& [node, pos] : imm.position) {
        if (!node.is_face) continue;
        for (int h : g.face(node.id).boundary) {
            if (h % 2 != 0) continue; // one orientation per primal edge
            int e = h / 2;
            int posk = g.pos_in_face(h);
            const auto& face = g.face(node.id);
            Offset tail = (posk == 0) ? Offset{0, 0} : face.head_offset[posk - 1];
            Offset white_at = node.at + tail;
            CoverNode fl = cover_face(g.face_left(e), white_at + g.face_left_base(e));
            CoverNode fr = cover_face(g.face_right(e), white_at + g.face_right_base(e));
            if (imm.position.count(fl) && imm.position.count(fr) && fl == node)
                imm.segments.push_back({fl, fr, g.track_alpha(e)});
        }
    }

    // Extension to primal vertices through any placed neighboring face.
    for (int mx = -radius; mx <= radius; ++mx)
        for (int my = -radius; my <= radius; ++my)
            for (int v = 0; v < g.num_vertices(); ++v) {
                CoverNode vn = cover_vertex(v, {mx, my});
                for (const auto& qe : quad_neighbors(g, vn)) {
                    auto it = imm.position.find(qe.to);
                    if (it == imm.position.end()) continue;
                    double eta_f = ws.abel().value(qe.to);
                    double eta_v = ws.abel().value(vn);
                    double a = ws.angles().angle(qe.track);
                    // The log-g gauge: Xi(b) = (theta'/theta)(u-t-eta(b)),
                    // Xi(w) = -(theta'/theta)(u+t+eta(w)); the white sign is
                    // forced by Psi(b)-Psi(w) = (log g_{b,w})'(u).
                    cx xi_v = 0;
                    if (xi == XiChoice::log_g)
                        xi_v = (g.color(v) == 'b')
                                   ? p.theta_log_deriv(u - ws.t() - eta_v)
                                   : -p.theta_log_deriv(u + ws.t() + eta_v);
                    cx inc = xi_v + p.theta_log_deriv(ws.t() + eta_f);
                    inc += (g.color(v) == 'b' ? -1.0 : 1.0) * p.theta_log_deriv(u - a);
                    imm.position[vn] = it->second + inc;
                    break;
                }
            }
    return imm;
}

Immersion minimal_immersion(const BipartiteGraph& g, const HalfAngleMap& alpha, int radius) {
    Immersion imm;
    CoverNode base = cover_vertex(0, {0, 0});
    imm.position[base] = 0;
    std::deque<CoverNode> queue{base};
    while (!queue.empty()) {
        CoverNode x = queue.front();
        queue.pop_front();
        cx here = imm.position.at(x);
        for (const auto& qe : quad_neighbors(g, x)) {
            if (!in_window(qe.to, radius)) continue;
            cx inc = -(double)qe.sign * std::exp(cx(0, 2 * alpha.angle(qe.track)));
            if (!imm.position.count(qe.to)) {
                imm.position[qe.to] = here + inc;
                queue.push_back(qe.to);
            }
            if (!x.is_face)
                imm.segments.push_back({x, qe.to, qe.track});
        }
    }
    // Deduplicate segments (each quad edge seen from its vertex side once).
    std::sort(imm.segments.begin(), imm.segments.end(), [](const auto& a, const auto& b) {
        auto key = [](const Immersion::Segment& s) {
            return std::tuple(s.from.is_face, s.from.id, s.from.at, s.to.is_face, s.to.id,
                              s.to.at);
        };
        return key(a) < key(b);
    });
    imm.segments.erase(std::unique(imm.segments.begin(), imm.segments.end(),
                                   [](const auto& a, const auto& b) {
                                       return a.from == b.from && a.to == b.to;
                                   }),
                       imm.segments.end());
    return imm;
}

double rhombus_angle_defect(const BipartiteGraph& g, const HalfAngleMap& alpha,
                            const Immersion& imm) {
    (void)alpha;
    // Around a primal vertex v, the rhombus of each incident edge contributes
    // the interior angle between its two face corners: from the f' side to
    // the f side at white vertices, the other way around at black ones, each
    // lifted to (0, 2 pi).
    double worst = 0;
    for (const auto& [node, pos] : imm.position) {
        if (node.is_face) continue;
        double total = 0;
        bool interior = true;
        for (int e = 0; e < g.num_edges() && interior; ++e) {
            const auto& ge = g.edge(e);
            Offset white_at;
            if (ge.w == node.id)
                white_at = node.at;
            else if (ge.b == node.id)
                white_at = node.at - ge.off;
            else
                continue;
            CoverNode fl = cover_face(g.face_left(e), white_at + g.face_left_base(e));
            CoverNode fr = cover_face(g.face_right(e), white_at + g.face_right_base(e));
            auto il = imm.position.find(fl);
            auto ir = imm.position.find(fr);
            if (il == imm.position.end() || ir == imm.position.end()) {
                interior = false;
                break;
            }
            cx dl = il->second - pos, dr = ir->second - pos;
            double ang = (g.color(node.id) == 'w') ? std::arg(dl / dr) : std::arg(dr / dl);
            if (ang <= 1e-12) ang += 2 * kPi;
            total += ang;
        }
        if (!interior) continue;
        worst = std::max(worst, std::abs(total - 2 * kPi));
    }
    return worst;
}

std::string to_svg(const Immersion& imm, double scale, bool color_tracks) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    struct Line {
        double x1, y1, x2, y2;
        int track;
    };
    std::vector<Line> lines;
    double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
    for (const auto& s : imm.segments) {
        auto i1 = imm.position.find(s.from);
        auto i2 = imm.position.find(s.to);
        if (i1 == imm.position.end() || i2 == imm.position.end()) continue;
        Line l{i1->second.real() * scale, -i1->second.imag() * scale,
               i2->second.real() * scale, -i2->second.imag() * scale, s.track};
        lines.push_back(l);
        minx = std::min({minx, l.x1, l.x2});
        maxx = std::max({maxx, l.x1, l.x2});
        miny = std::min({miny, l.y1, l.y2});
        maxy = std::max({maxy, l.y1, l.y2});
    }
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return std::tuple(a.track, a.x1, a.y1, a.x2, a.y2) <
               std::tuple(b.track, b.x1, b.y1, b.x2, b.y2);
    });
    char buf[256];
    std::ostringstream svg;
    if (lines.empty()) {
        minx = miny = 0;
        maxx = maxy = 1;
    }
    double pad = 4;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.6f %.6f %.6f %.6f\">\n",
                  minx - pad, miny - pad, maxx - minx + 2 * pad, maxy - miny + 2 * pad);
    svg << buf;
    for (const auto& l : lines) {
        const char* color = color_tracks ? palette[((l.track % 8) + 8) % 8] : "#000000";
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.6f\" y1=\"%.6f\" x2=\"%.6f\" y2=\"%.6f\" "
                      "stroke=\"%s\" stroke-width=\"0.8\"/>\n",
                      l.x1, l.y1, l.x2, l.y2, color);
        svg << buf;
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace elldimer
