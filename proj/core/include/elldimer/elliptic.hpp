// Jacobi theta functions on the rectangular torus T(q) = C / (pi Z + pi tau Z),
// their logarithmic derivatives, elliptic constants, the Jacobi zeta function
// and the Fay/Weierstrass identities.
//
// The nome q lies in (0,1), so tau = log(q)/(i pi) is pure imaginary.  The
// first theta function is the series
//
//   theta1(z) = 2 SUM_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) z),
//
// antisymmetric, pi-antiperiodic, and quasiperiodic in the pi*tau direction:
// theta1(z + pi tau) = (-q e^{2iz})^{-1} theta1(z).  Arguments are reduced to
// the fundamental cell before summing, with the lattice factors applied in
// closed form, so evaluation is stable for any |Im z|.

#ifndef ELLDIMER_ELLIPTIC_HPP
#define ELLDIMER_ELLIPTIC_HPP

#include <complex>
#include <memory>
#include <stdexcept>

namespace elldimer {

using cx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Thrown when an evaluation point sits within the pole-proximity threshold of
// a lattice zero/pole.
struct pole_proximity_error : std::domain_error {
    using std::domain_error::domain_error;
};

class EllipticParams {
public:
    explicit EllipticParams(double q, double series_eps = 1e-16);

    double q() const { return q_; }
    // |tau|; the half-period ratio is tau = i * tau_im().
    double tau_im() const { return tau_im_; }
    double series_eps() const { return series_eps_; }

    // Elliptic modulus k = theta2^2(0)/theta3^2(0) and complement k'.
    double k() const { return k_; }
    double kprime() const { return kprime_; }
    // Quarter periods: K = (pi/2) theta3^2(0), K' = |tau| K.
    double bigK() const { return bigK_; }
    double bigKprime() const { return bigKprime_; }

    double theta_prime0() const { return theta_prime0_; }

    // Half the vertical period of the torus, pi |tau| / 2.
    double half_height() const { return kPi * tau_im_ / 2.0; }

    // theta_1(z).
    cx theta(cx z) const;
    // theta_ell(z) for ell in 1..4.
    cx theta_n(int ell, cx z) const;
    // d/dz theta_ell(z).
    cx theta_n_deriv(int ell, cx z) const;
    // theta_ell'(z) / theta_ell(z); throws pole_proximity_error within
    // 1e-10 of a zero of theta_ell.
    cx log_deriv(int ell, cx z) const;
    cx theta_log_deriv(cx z) const { return log_deriv(1, z); }

    // log theta_1(z) up to an integer multiple of 2 i pi (safe to exponentiate
    // after summing; do not difference two branches).
    cx log_theta(cx z) const;

    // Jacobi zeta, Ztilde(u) = (pi/2K) theta4'(u)/theta4(u); simple pole at
    // pi tau / 2 with residue pi/2K.
    cx jacobi_zeta(cx u) const;

    // Distance from z to the zero lattice of theta_1 (pi Z + pi tau Z).
    double dist_to_lattice(cx z) const;

private:
    struct Reduction {
        cx z0;      // representative with Re in [0,pi), Im in [-h, h)
        long m = 0; // z = z0 + m pi + n pi tau
        long n = 0;
    };
    Reduction reduce(cx z) const;
    // Cell evaluations: direct series for |tau| >= 1, Jacobi's imaginary
    // transformation through the dual nome e^{-pi/|tau|} otherwise (the
    // direct series loses digits to cancellation as q -> 1).
    cx theta_cell(int ell, cx z0) const;
    cx theta_cell_deriv(int ell, cx z0) const;
    cx theta1_series(cx z0) const;
    cx theta1_series_deriv(cx z0) const;
    cx theta_n_series(int ell, cx z0) const;
    cx theta_n_series_deriv(int ell, cx z0) const;

    double q_ = 0;
    double tau_im_ = 0;
    double series_eps_ = 1e-16;
    double k_ = 0, kprime_ = 0, bigK_ = 0, bigKprime_ = 0;
    double theta_prime0_ = 0;
    std::shared_ptr<const EllipticParams> dual_; // set when |tau| < 1
};

// Canonical representative of a point of the torus T(q).
struct TorusPoint {
    cx u;       // value as given
    cx reduced; // Re in [0,pi), Im in [-pi|tau|/2, pi|tau|/2)

    TorusPoint(cx value, const EllipticParams& p);
    bool close_to(const TorusPoint& other, double tol = 1e-14) const;

private:
    double height_ = 0; // vertical period pi |tau|
};

// F_t(a,b) = theta(a-b) theta(a+b-t), the antisymmetric building block of
// Fay's identity.
cx fay_block(const EllipticParams& p, cx t, cx a, cx b);

// Residual of the Fay identity
//   F_t(a,b)F_t(c,d) + F_t(a,c)F_t(d,b) + F_t(a,d)F_t(b,c);
// zero in exact arithmetic.
cx fay_residual(const EllipticParams& p, cx a, cx b, cx c, cx d, cx t);

// Relative magnitude of the residual (residual over the largest term).
double fay_residual_relative(const EllipticParams& p, cx a, cx b, cx c, cx d, cx t);

// Residue of f at z0 by a 64-point trapezoid rule on a circle of radius r.
template <typename F>
cx residue_at(F&& f, cx z0, double r = 1e-3) {
    const int n = 64;
    cx acc = 0;
    for (int j = 0; j < n; ++j) {
        double phi = 2.0 * kPi * j / n;
        cx w = std::polar(r, phi);
        acc += f(z0 + w) * w;
    }
    return acc / static_cast<double>(n);
}

} // namespace elldimer

#endif
