// Z^2-periodic machinery: the periodicity criterion phi(alpha), the magnetic
// Kasteleyn matrix K(z,w), the characteristic polynomial P(z,w) recovered by
// DFT interpolation, the explicit parameterization (z(u), w(u)) of the
// spectral curve, Newton polygon, amoeba samples, slopes, and the
// Fourier-integral inverse used as an oracle.

#ifndef ELLDIMER_PERIODIC_HPP
#define ELLDIMER_PERIODIC_HPP

#include <Eigen/Dense>

#include "elldimer/inverse.hpp"

namespace elldimer {

struct NewtonPolygon {
    // Boundary integer points P_1..P_r, anchored with P_1 = (0,0); the
    // outgoing edge at P_j is the homology class of the j-th track in the
    // angle ordering cut at the anchor angle.
    std::vector<Offset> boundary;
    std::vector<int> track_order; // track id whose class is P_{j+1} - P_j

    std::vector<Offset> interior_points() const;
    std::vector<Offset> boundary_points() const { return boundary; }
    bool contains_strictly(double x, double y) const;
};

// Newton polygon of the graph with the track enumeration cut at C0-point
// `cut` (lifts of the angles taken in (cut, cut + pi)).
NewtonPolygon newton_polygon(const BipartiteGraph& g, const HalfAngleMap& alpha,
                             double cut = 0.0);

// phi(alpha) = sum_j lift(alpha_j - alpha_{j-1})/pi * P_j; K is periodic iff
// phi lands on the integer lattice.
struct PhiResult {
    double x = 0, y = 0;
    bool periodic = false; // within 1e-9 of a lattice point
};
PhiResult phi_map(const BipartiteGraph& g, const HalfAngleMap& alpha, double cut = 0.0);

class SpectralData {
public:
    SpectralData(const WeightSystem& ws);

    // Fundamental-domain Kasteleyn matrix with monomial edge factors
    // z^{dx} w^{dy}; rows = white vertices, columns = black.
    Eigen::MatrixXcd magnetic_matrix(cx z, cx w) const;

    // Characteristic polynomial as Laurent coefficients c[(a,b)] z^a w^b.
    const std::map<Offset, cx>& charpoly() const { return coeffs_; }
    cx P(cx z, cx w) const;
    cx dP_dw(cx z, cx w) const;
    double coeff_scale() const { return coeff_scale_; }

    // Convex hull vertices of the monomial support.
    std::vector<Offset> support_hull() const;

    // Explicit parameterization of the spectral curve.
    cx z_of(cx u) const;
    cx w_of(cx u) const;
    // Transfer-product route (independent of the closed form).
    cx z_transfer(cx u) const;
    cx w_transfer(cx u) const;
    // d/du log z(u), d/du log w(u).
    cx dlog_z(cx u) const;
    cx dlog_w(cx u) const;

    const WeightSystem& weights() const { return ws_; }

private:
    const WeightSystem& ws_;
    std::map<Offset, cx> coeffs_;
    double coeff_scale_ = 0;
    std::vector<int> row_white_, col_black_; // vertex id per index
    double sign_exp_z_ = 0, sign_exp_w_ = 0; // (1/pi) sum alpha_T v_T etc.
};

// Amoeba sample point (-log|w|, log|z|).
struct AmoebaPoint {
    double x = 0, y = 0;
};

struct AmoebaSamples {
    std::vector<AmoebaPoint> cloud;               // generic torus samples
    std::vector<AmoebaPoint> oval;                // image of C1 (closed curve)
    std::vector<std::vector<AmoebaPoint>> tentacles; // images of C0 arcs
};

AmoebaSamples amoeba_sample(const SpectralData& sd, int grid = 64);

// Fourier-integral inverse over the torus |z| = e^{By}, |w| = e^{-Bx}.
struct KosResult {
    cx value = 0;
    double est_error = 0;
    bool near_singular = false;
};
KosResult kos_inverse(const SpectralData& sd, double Bx, double By, CoverNode b, CoverNode w,
                      double tol = 1e-9);

// Slope (s,t) of the Gibbs measure at u0, with reference solid point u1.
struct Slope {
    double s = 0, t = 0;
};
Slope slope(const SpectralData& sd, const PhasePoint& u0, double u1);

// Closed-form solid slope: sum of (v_T, -h_T) over angles in the arc
// (u0, u1), for cross-checking.
Slope slope_solid_closed_form(const BipartiteGraph& g, const HalfAngleMap& alpha, double u0,
                              double u1);

} // namespace elldimer

#endif
