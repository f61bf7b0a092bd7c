// t-immersions of the dual graph and their extension to the quad-graph,
// minimal (rhombic) immersions, and deterministic SVG export.

#ifndef ELLDIMER_GEOMETRY_HPP
#define ELLDIMER_GEOMETRY_HPP

#include <string>

#include "elldimer/kernel.hpp"

namespace elldimer {

enum class XiChoice { zero, log_g };

struct Immersion {
    // Drawn positions of cover nodes (dual faces and, when extended, primal
    // vertices), as complex coordinates.
    std::unordered_map<CoverNode, cx, CoverNodeHash> position;
    // Edges to draw: endpoints plus the crossing track (for coloring).
    struct Segment {
        CoverNode from, to;
        int track = -1;
    };
    std::vector<Segment> segments;
    cx u = 0;
    XiChoice xi = XiChoice::zero;
};

// t-immersion of the dual graph over a window of `radius` fundamental
// domains, extended to primal vertices; the base face is pinned at the
// origin.  Increments across a dual edge (f, f') of a primal edge (w,b) are
// theta'(0) g_{b,w}(u) K_{w,b}.
Immersion t_immersion(const WeightSystem& ws, cx u, XiChoice xi, int radius = 2);

// Rhombic immersion of the quad-graph: every quad edge crossed left-to-right
// by track T is drawn as the unit vector e^{2 i alpha_T}.
Immersion minimal_immersion(const BipartiteGraph& g, const HalfAngleMap& alpha,
                            int radius = 2);

// Largest deviation of angle sums around interior quad-graph vertices from
// 2 pi (zero for maps in X_G).
double rhombus_angle_defect(const BipartiteGraph& g, const HalfAngleMap& alpha,
                            const Immersion& imm);

// Deterministic SVG: elements sorted, 6-decimal coordinates, optional
// per-track stroke colors.
std::string to_svg(const Immersion& imm, double scale = 40.0, bool color_tracks = true);

} // namespace elldimer

#endif
