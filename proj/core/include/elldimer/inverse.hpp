// The two-parameter family of local inverses of the Kasteleyn operator:
// the phase domain D, angular sectors, the three contour families, the
// functions H^{u0}, and the coefficients
//
//   A^{u0}_{b,w} = (i theta'(0) / 2 pi) \int_{C^{u0}_{b,w}} g_{b,w}(u) du
//
// by adaptive contour quadrature, with the residue shortcut in the solid
// case and the pole-contour alternative form as a cross-check.

#ifndef ELLDIMER_INVERSE_HPP
#define ELLDIMER_INVERSE_HPP

#include "elldimer/kernel.hpp"
#include "elldimer/quadrature.hpp"

namespace elldimer {

enum class Phase { gaseous, liquid, solid };

struct PhasePoint {
    cx u0;
    Phase phase = Phase::liquid;
    // Solid case: the component of C0 minus the track angles containing u0,
    // as a right-open arc [component_start, component_end) mod pi.
    double component_start = 0, component_end = 0;

    static PhasePoint classify(const WeightSystem& ws, cx u0);
    // Midpoint of C1.
    static PhasePoint gaseous_point(const WeightSystem& ws);
    // Midpoint of the k-th component of C0 minus the angles (sorted lifts).
    static PhasePoint solid_point(const WeightSystem& ws, int k);
};

// Arc of C0 = R/piZ from `begin` to `end` in the positive direction,
// containing all poles of a kernel function and none of its zeros.
struct Sector {
    double begin = 0, end = 0;

    double length() const;
    bool contains(double angle) const;
    // Midpoint of the complementary arc; the canonical C0-crossing point.
    double complement_midpoint() const;
};

Sector sector(const WeightSystem& ws, const KernelFunction& g);
Sector sector(const WeightSystem& ws, CoverNode b, CoverNode w);

// Piecewise-linear contour on the torus, as points of the plane (theta
// evaluation reduces them); `closed` appends the closing segment.
struct Contour {
    std::vector<cx> points;
    bool closed = false;
    int c0_up_crossings = 0;   // C0 crossings bottom-to-top
    int c0_down_crossings = 0;
    int c1_crossings = 0;
};

Contour build_contour(const WeightSystem& ws, const PhasePoint& u0, const Sector& s);

// H^{u0}: the jump-function entering the alternative form of the inverse.
// The determination is continuous on the torus cut along the contour through
// u_star (the crossing point on C0).
cx H_function(const WeightSystem& ws, const PhasePoint& u0, double u_star, cx u);

struct InverseCoefficient {
    cx value = 0;
    double est_error = 0;
};

// A^{u0}_{b,w} by contour quadrature (Cases 1-2) or residues (Case 3).
InverseCoefficient inverse_coeff(const WeightSystem& ws, const PhasePoint& u0, CoverNode b,
                                 CoverNode w, double abs_tol = 1e-11);

// Case 3 by explicit rectangle quadrature (cross-check of the residue route).
InverseCoefficient inverse_coeff_solid_quadrature(const WeightSystem& ws,
                                                  const PhasePoint& u0, CoverNode b,
                                                  CoverNode w, double abs_tol = 1e-11);

// Alternative expression: contour around the poles weighted by H^{u0}
// (Cases 1-2; equals the main route).
InverseCoefficient inverse_coeff_alt(const WeightSystem& ws, const PhasePoint& u0,
                                     CoverNode b, CoverNode w);

struct IdentityResidual {
    double black = 0; // max |sum_w A_{b',w} K_{w,b} - delta|
    double white = 0; // max |sum_b K_{w,b} A_{b,w'} - delta|
};

// K A = Id over a window of `radius` fundamental domains.
IdentityResidual identity_check(const WeightSystem& ws, const PhasePoint& u0, int radius = 1);

} // namespace elldimer

#endif
