// Fock's elliptic Kasteleyn operator: edge coefficients
//
//   K_{w,b} = theta(beta - alpha) / (theta(t + eta(b) - beta) theta(t + eta(b) - alpha)),
//
// face weights, the Kasteleyn phase condition and the q -> 0 degeneration to
// critical weights.  Coefficients live on edges of the cover; they are
// Z^2-periodic exactly when the half-angle map makes the Abel map periodic.

#ifndef ELLDIMER_KASTELEYN_HPP
#define ELLDIMER_KASTELEYN_HPP

#include <memory>

#include "elldimer/elliptic.hpp"
#include "elldimer/graph.hpp"

namespace elldimer {

// An edge of the cover: quotient edge id plus the translate of its white
// endpoint.
struct CoverEdge {
    int e = 0;
    Offset at;
};

class WeightSystem {
public:
    // t' = Re t; Im t is pinned to pi|tau|/2, the Kasteleyn locus.
    WeightSystem(const BipartiteGraph& g, const EllipticParams& params, HalfAngleMap alpha,
                 double t_real, CoverNode abel_base = cover_vertex(0));

    const BipartiteGraph& graph() const { return g_; }
    const EllipticParams& params() const { return params_; }
    const HalfAngleMap& angles() const { return alpha_; }
    const AbelMap& abel() const { return eta_; }
    cx t() const { return t_; }
    double t_real() const { return t_.real(); }

    // Half-angles of the two train-tracks crossing edge e, with the rhombus
    // convention: alpha on the (f,b) side, beta on the (w,f) side.
    double alpha(int e) const { return alpha_.angle(g_.track_alpha(e)); }
    double beta(int e) const { return alpha_.angle(g_.track_beta(e)); }

    cx coefficient(const CoverEdge& edge) const;
    cx coefficient(int e) const { return coefficient(CoverEdge{e, {0, 0}}); }

    // The three equivalent denominator forms (black, white, faces).
    cx denominator_black(const CoverEdge& edge) const;
    cx denominator_white(const CoverEdge& edge) const;
    cx denominator_faces(const CoverEdge& edge) const;

    // Kenyon's critical coefficient e^{2 i beta} - e^{2 i alpha}.
    cx critical_coefficient(int e) const;

    // Face weight of face f translated by `at`: the alternating product of
    // edge coefficients around the boundary, numerator on the half-edges
    // traversed white-to-black.
    cx face_weight(int f, Offset at = {}) const;
    cx critical_face_weight(int f) const;

private:
    const BipartiteGraph& g_;
    const EllipticParams& params_;
    HalfAngleMap alpha_;
    cx t_;
    mutable AbelMap eta_;
};

struct KasteleynCheck {
    bool ok = true;
    int offending_face = -1;
    double worst = 0; // largest phase deviation
};

// Verifies the Kasteleyn condition: on every bounded face of degree 2n the
// face weight times (-1)^{n+1} is a positive real, to 1e-10 in phase.
KasteleynCheck check_kasteleyn(const WeightSystem& ws);

struct RationalLimitReport {
    std::vector<double> q;
    std::vector<double> max_deviation; // max |W_f(q) - W_f^crit| over bounded faces
};

// Face-weight convergence to the critical weights as q -> 0.
RationalLimitReport rational_limit_face_weights(const BipartiteGraph& g,
                                                const HalfAngleMap& alpha, double t_real,
                                                const std::vector<double>& q_sequence);

} // namespace elldimer

#endif
