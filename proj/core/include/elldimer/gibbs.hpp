// Gibbs-measure probabilities through the determinantal formula, closed-form
// single-edge probabilities in the three phases, and the asymptotic regimes
// of the inverse coefficients.

#ifndef ELLDIMER_GIBBS_HPP
#define ELLDIMER_GIBBS_HPP

#include "elldimer/inverse.hpp"

namespace elldimer {

struct Probability {
    double raw = 0;     // real part of the determinantal value
    double imag = 0;    // imaginary residual (should be ~0)
    double clamped = 0; // raw clamped to [0,1]
};

// P(e_1,...,e_k) = prod_j K_{w_j b_j} * det A_{b_i, w_j}.
Probability correlation(const WeightSystem& ws, const PhasePoint& u0,
                        const std::vector<CoverEdge>& edges);

// Closed forms of Prop.-style single-edge probabilities per phase.
double single_edge_closed_form(const WeightSystem& ws, const PhasePoint& u0,
                               const CoverEdge& edge);

struct GaseousAsymptotics {
    double v0 = 0;         // minimizer of F on the real circle
    double F_v0 = 0;       // value at the minimum (negative)
    double F_pp = 0;       // second derivative at the minimum
    cx predicted = 0;      // leading-order A
    cx measured = 0;       // quadrature value
    double ratio = 0;      // |measured| / |predicted|
    int distance = 0;
};

GaseousAsymptotics gaseous_asymptotics(const WeightSystem& ws, const PhasePoint& u0,
                                       CoverNode b, CoverNode w);

struct LiquidAsymptotics {
    cx zeta = 0;           // unit phase e^{i(eta(b)+eta(w)+2 Re t)}
    cx displacement = 0;   // Psi(b) - Psi(w) = (log g)'(u0)
    cx predicted = 0;
    cx measured = 0;
    double abs_deviation = 0;
    int distance = 0;
};

LiquidAsymptotics liquid_asymptotics(const WeightSystem& ws, const PhasePoint& u0,
                                     CoverNode b, CoverNode w);

} // namespace elldimer

#endif
