#include "elldimer/elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace elldimer {

namespace {

bool finite(cx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

} // namespace

EllipticParams::EllipticParams(double q, double series_eps)
    : q_(q), series_eps_(series_eps) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("EllipticParams: q must lie in (0,1)");
    tau_im_ = -std::log(q) / kPi;

    // Theta constants from the series at z = 0.
    double t2 = 0, t3 = 1, t4 = 1, tp = 0;
    for (int n = 0;; ++n) {
        double half = n + 0.5;
        double qh = std::pow(q, half * half);
        double qn = std::pow(q, double(n) * n);
        double sign = (n % 2 == 0) ? 1.0 : -1.0;
        t2 += 2.0 * qh;
        tp += 2.0 * sign * qh * (2 * n + 1);
        if (n > 0) {
            t3 += 2.0 * qn;
            t4 += 2.0 * sign * qn;
        }
        if (n > 0 && qh * (2 * n + 3) < series_eps_ && qn < series_eps_) break;
    }
    k_ = (t2 * t2) / (t3 * t3);
    kprime_ = (t4 * t4) / (t3 * t3);
    bigK_ = kPi / 2.0 * t3 * t3;
    bigKprime_ = tau_im_ * bigK_;
    theta_prime0_ = tp;
    if (tau_im_ < 1.0)
        dual_ = std::make_shared<EllipticParams>(std::exp(-kPi / tau_im_), series_eps);
}

EllipticParams::Reduction EllipticParams::reduce(cx z) const {
    if (!finite(z)) throw std::domain_error("theta: non-finite argument");
    Reduction r;
    double h = kPi * tau_im_;
    r.m = static_cast<long>(std::floor(z.real() / kPi));
    r.n = static_cast<long>(std::floor(z.imag() / h + 0.5));
    r.z0 = z - cx(r.m * kPi, r.n * h);
    return r;
}

// theta1(z0 + m pi + n pi tau) = (-1)^{m+n} q^{-n^2} e^{-2 i n z0} theta1(z0).
cx EllipticParams::theta(cx z) const {
    Reduction r = reduce(z);
    cx val = theta_cell(1, r.z0);
    if (r.m == 0 && r.n == 0) return val;
    cx factor = ((r.m + r.n) % 2 == 0) ? 1.0 : -1.0;
    if (r.n != 0) {
        factor *= std::pow(q_, -double(r.n) * r.n);
        factor *= std::exp(cx(0, -2.0 * r.n) * r.z0);
    }
    return factor * val;
}

cx EllipticParams::log_theta(cx z) const {
    Reduction r = reduce(z);
    cx val;
    if (!dual_) {
        val = std::log(theta1_series(r.z0));
    } else {
        // log of the imaginary transformation applied to the cell value
        double t = tau_im_;
        cx w = cx(0, 1) * r.z0 / t;
        val = std::log(cx(0, -1)) - 0.5 * std::log(t) - r.z0 * r.z0 / (kPi * t) +
              dual_->log_theta(w);
    }
    if (r.n != 0) {
        val += -double(r.n) * r.n * std::log(q_);
        val += cx(0, -2.0 * r.n) * r.z0;
    }
    if ((r.m + r.n) % 2 != 0) val += cx(0, kPi);
    return val;
}

// Jacobi's imaginary transformation on the reduced cell: for tau = i t with
// t < 1, pass to the dual torus with tau' = i / t:
//   theta1(z|it) = -i t^{-1/2} e^{-z^2/(pi t)} theta1(i z/t | i/t)
//   theta2(z|it) =    t^{-1/2} e^{-z^2/(pi t)} theta4(i z/t | i/t)
//   theta3(z|it) =    t^{-1/2} e^{-z^2/(pi t)} theta3(i z/t | i/t)
//   theta4(z|it) =    t^{-1/2} e^{-z^2/(pi t)} theta2(i z/t | i/t)
namespace {
constexpr int dual_index(int ell) { return ell == 2 ? 4 : ell == 4 ? 2 : ell; }
} // namespace

cx EllipticParams::theta_cell(int ell, cx z0) const {
    if (!dual_) return ell == 1 ? theta1_series(z0) : theta_n_series(ell, z0);
    double t = tau_im_;
    cx w = cx(0, 1) * z0 / t;
    cx pre = std::exp(-z0 * z0 / (kPi * t)) / std::sqrt(t);
    if (ell == 1) pre *= cx(0, -1);
    return pre * dual_->theta_n(dual_index(ell), w);
}

cx EllipticParams::theta_cell_deriv(int ell, cx z0) const {
    if (!dual_) return ell == 1 ? theta1_series_deriv(z0) : theta_n_series_deriv(ell, z0);
    double t = tau_im_;
    cx w = cx(0, 1) * z0 / t;
    cx pre = std::exp(-z0 * z0 / (kPi * t)) / std::sqrt(t);
    if (ell == 1) pre *= cx(0, -1);
    cx val = dual_->theta_n(dual_index(ell), w);
    cx dval = dual_->theta_n_deriv(dual_index(ell), w);
    return pre * (-2.0 * z0 / (kPi * t) * val + cx(0, 1) / t * dval);
}

cx EllipticParams::theta1_series(cx z0) const {
    cx acc = 0;
    double y = std::abs(z0.imag());
    for (int n = 0;; ++n) {
        double half = n + 0.5;
        double qh = std::pow(q_, half * half);
        double sign = (n % 2 == 0) ? 1.0 : -1.0;
        acc += 2.0 * sign * qh * std::sin(double(2 * n + 1) * z0);
        if (2.0 * qh * std::exp((2 * n + 1) * y) < series_eps_) break;
    }
    return acc;
}

cx EllipticParams::theta1_series_deriv(cx z0) const {
    cx acc = 0;
    double y = std::abs(z0.imag());
    for (int n = 0;; ++n) {
        double half = n + 0.5;
        double qh = std::pow(q_, half * half);
        double sign = (n % 2 == 0) ? 1.0 : -1.0;
        acc += 2.0 * sign * qh * double(2 * n + 1) * std::cos(double(2 * n + 1) * z0);
        if (2.0 * qh * (2 * n + 1) * std::exp((2 * n + 1) * y) < series_eps_) break;
    }
    return acc;
}

// theta2(z) = 2 SUM q^{(n+1/2)^2} cos((2n+1)z)
// theta3(z) = 1 + 2 SUM q^{n^2} cos(2nz)
// theta4(z) = 1 + 2 SUM (-1)^n q^{n^2} cos(2nz)
cx EllipticParams::theta_n_series(int ell, cx z0) const {
    cx acc = (ell >= 3) ? 1.0 : 0.0;
    double y = std::abs(z0.imag());
    for (int n = (ell >= 3) ? 1 : 0;; ++n) {
        double e = (ell == 2) ? (n + 0.5) * (n + 0.5) : double(n) * n;
        int freq = (ell == 2) ? 2 * n + 1 : 2 * n;
        double qe = std::pow(q_, e);
        double sign = (ell == 4 && n % 2 == 1) ? -1.0 : 1.0;
        acc += 2.0 * sign * qe * std::cos(double(freq) * z0);
        if (2.0 * qe * std::exp(freq * y) < series_eps_) break;
    }
    return acc;
}

cx EllipticParams::theta_n_series_deriv(int ell, cx z0) const {
    cx acc = 0;
    double y = std::abs(z0.imag());
    for (int n = (ell >= 3) ? 1 : 0;; ++n) {
        double e = (ell == 2) ? (n + 0.5) * (n + 0.5) : double(n) * n;
        int freq = (ell == 2) ? 2 * n + 1 : 2 * n;
        double qe = std::pow(q_, e);
        double sign = (ell == 4 && n % 2 == 1) ? -1.0 : 1.0;
        acc -= 2.0 * sign * qe * double(freq) * std::sin(double(freq) * z0);
        if (2.0 * qe * freq * std::exp(freq * y) < series_eps_) break;
    }
    return acc;
}

// Lattice factors (DLMF 20.2): under z -> z + pi, theta1 and theta2 flip
// sign; under z -> z + pi tau, all four pick up q^{-1} e^{-2iz} and theta1,
// theta4 additionally flip sign.
cx EllipticParams::theta_n(int ell, cx z) const {
    if (ell == 1) return theta(z);
    if (ell < 1 || ell > 4) throw std::domain_error("theta_n: index must be 1..4");
    Reduction r = reduce(z);
    cx val = theta_cell(ell, r.z0);
    cx factor = 1.0;
    if (ell == 2 && r.m % 2 != 0) factor = -factor;
    if (r.n != 0) {
        factor *= std::pow(q_, -double(r.n) * r.n);
        factor *= std::exp(cx(0, -2.0 * r.n) * r.z0);
        if (ell == 4 && r.n % 2 != 0) factor = -factor;
    }
    return factor * val;
}

cx EllipticParams::theta_n_deriv(int ell, cx z) const {
    if (ell < 1 || ell > 4) throw std::domain_error("theta_n_deriv: index must be 1..4");
    Reduction r = reduce(z);
    cx val = theta_cell(ell, r.z0);
    cx dval = theta_cell_deriv(ell, r.z0);
    cx factor = 1.0;
    if ((ell == 1 || ell == 2) && r.m % 2 != 0) factor = -factor;
    if (r.n != 0) {
        factor *= std::pow(q_, -double(r.n) * r.n);
        factor *= std::exp(cx(0, -2.0 * r.n) * r.z0);
        if ((ell == 1 || ell == 4) && r.n % 2 != 0) factor = -factor;
    }
    // (factor(z) f(z0))' with factor' = -2 i n factor.
    return factor * (dval + cx(0, -2.0 * r.n) * val);
}

double EllipticParams::dist_to_lattice(cx z) const {
    Reduction r = reduce(z);
    // Reduced imaginary part is at most half a vertical period, so the
    // nearest lattice row is Im = 0.
    double dx = std::min(r.z0.real(), kPi - r.z0.real());
    return std::hypot(dx, r.z0.imag());
}

cx EllipticParams::log_deriv(int ell, cx z) const {
    // Zeros: theta1 on Lambda, theta2 on Lambda + pi/2, theta3 on
    // Lambda + pi/2 + pi tau/2, theta4 on Lambda + pi tau/2.
    cx shift = 0;
    if (ell == 2) shift = kPi / 2.0;
    if (ell == 3) shift = cx(kPi / 2.0, kPi * tau_im_ / 2.0);
    if (ell == 4) shift = cx(0.0, kPi * tau_im_ / 2.0);
    if (dist_to_lattice(z - shift) < 1e-10)
        throw pole_proximity_error("log_deriv: argument within 1e-10 of a zero");
    return theta_n_deriv(ell, z) / theta_n(ell, z);
}

cx EllipticParams::jacobi_zeta(cx u) const {
    return kPi / (2.0 * bigK_) * log_deriv(4, u);
}

TorusPoint::TorusPoint(cx value, const EllipticParams& p) : u(value) {
    double h = kPi * p.tau_im();
    double m = std::floor(value.real() / kPi);
    double n = std::floor(value.imag() / h + 0.5);
    reduced = value - cx(m * kPi, n * h);
    height_ = h;
}

bool TorusPoint::close_to(const TorusPoint& o, double tol) const {
    double dx = std::abs(reduced.real() - o.reduced.real());
    dx = std::min(dx, kPi - dx);
    double dy = std::abs(reduced.imag() - o.reduced.imag());
    dy = std::min(dy, height_ - dy);
    return std::hypot(dx, dy) < tol;
}

cx fay_block(const EllipticParams& p, cx t, cx a, cx b) {
    return p.theta(a - b) * p.theta(a + b - t);
}

cx fay_residual(const EllipticParams& p, cx a, cx b, cx c, cx d, cx t) {
    return fay_block(p, t, a, b) * fay_block(p, t, c, d) +
           fay_block(p, t, a, c) * fay_block(p, t, d, b) +
           fay_block(p, t, a, d) * fay_block(p, t, b, c);
}

double fay_residual_relative(const EllipticParams& p, cx a, cx b, cx c, cx d, cx t) {
    cx t1 = fay_block(p, t, a, b) * fay_block(p, t, c, d);
    cx t2 = fay_block(p, t, a, c) * fay_block(p, t, d, b);
    cx t3 = fay_block(p, t, a, d) * fay_block(p, t, b, c);
    double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), 1e-300});
    return std::abs(t1 + t2 + t3) / scale;
}

} // namespace elldimer
