#include "elldimer/inverse.hpp"

#include <algorithm>
#include <cmath>

namespace elldimer {

namespace {

double lift_angle(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    return r;
}

// Lift of y - x into [0, pi).
double lift_gap(double x, double y) { return lift_angle(y - x); }

} // namespace

// ---------------------------------------------------------------------------
// Phase points

PhasePoint PhasePoint::classify(const WeightSystem& ws, cx u0) {
    const double h2 = ws.params().half_height();
    PhasePoint p;
    p.u0 = u0;
    double y = u0.imag();
    if (y < -1e-12 || y > h2 + 1e-12)
        throw std::domain_error("phase point: Im u0 must lie in [0, pi|tau|/2]");
    if (std::abs(y - h2) < 1e-12) {
        p.phase = Phase::gaseous;
        p.u0 = cx(u0.real(), h2);
        return p;
    }
    if (std::abs(y) < 1e-12) {
        p.phase = Phase::solid;
        p.u0 = cx(u0.real(), 0.0);
        // Locate the component of C0 minus the track angles.
        std::vector<double> angles;
        for (double a : ws.angles().alpha) angles.push_back(lift_angle(a));
        std::sort(angles.begin(), angles.end());
        angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
        double x = lift_angle(u0.real());
        for (double a : angles)
            if (std::abs(x - a) < 1e-9 || std::abs(x - a) > kPi - 1e-9)
                throw std::domain_error("solid phase point sits on a track angle");
        for (size_t i = 0; i < angles.size(); ++i) {
            double s = angles[i];
            double e = angles[(i + 1) % angles.size()];
            double span = (angles.size() == 1) ? kPi : lift_gap(s, e);
            if (lift_gap(s, x) < span) {
                p.component_start = s;
                p.component_end = e;
                break;
            }
        }
        return p;
    }
    p.phase = Phase::liquid;
    return p;
}

PhasePoint PhasePoint::gaseous_point(const WeightSystem& ws) {
    return classify(ws, cx(kPi / 2, ws.params().half_height()));
}

PhasePoint PhasePoint::solid_point(const WeightSystem& ws, int k) {
    std::vector<double> angles;
    for (double a : ws.angles().alpha) angles.push_back(lift_angle(a));
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
    int n = (int)angles.size();
    if (n == 0) throw std::domain_error("no track angles");
    k = ((k % n) + n) % n;
    double s = angles[k];
    double e = angles[(k + 1) % n];
    double span = (n == 1) ? kPi : lift_gap(s, e);
    return classify(ws, cx(lift_angle(s + span / 2.0), 0.0));
}

// ---------------------------------------------------------------------------
// Sectors

double Sector::length() const { return lift_gap(begin, end); }

bool Sector::contains(double angle) const {
    double d = lift_gap(begin, angle);
    return d <= length() + 1e-14;
}

double Sector::complement_midpoint() const {
    double gap = kPi - length();
    return lift_angle(end + gap / 2.0);
}

Sector sector(const WeightSystem& ws, const KernelFunction& g) {
    auto poles = g.poles_on_c0();
    auto zeros = g.zeros_on_c0();
    if (poles.empty()) throw std::logic_error("sector: kernel function has no poles on C0");
    std::vector<double> P;
    for (auto& [a, m] : poles) P.push_back(a);
    std::sort(P.begin(), P.end());
    P.erase(std::unique(P.begin(), P.end()), P.end());
    if (P.size() == 1) {
        // Degenerate: a single pole position.  Complement is everything else.
        return Sector{P[0], P[0]};
    }
    // Find the cyclic gap between consecutive poles containing all zeros.
    int best = -1;
    double best_span = -1;
    for (size_t i = 0; i < P.size(); ++i) {
        double s = P[i];
        double e = P[(i + 1) % P.size()];
        double span = (i + 1 == P.size()) ? kPi - s + P[0] : e - s;
        bool all = true;
        for (auto& [z, m] : zeros) {
            double d = lift_gap(s, z);
            if (!(d > 1e-14 && d < span - 1e-14)) {
                all = false;
                break;
            }
        }
        if (all && (zeros.empty() ? span > best_span : best < 0)) {
            best = (int)i;
            best_span = span;
        }
    }
    if (best < 0) throw std::runtime_error("sector: poles and zeros are not separated");
    double gap_start = P[best];
    double gap_end = P[(best + 1) % P.size()];
    return Sector{gap_end, gap_start};
}

Sector sector(const WeightSystem& ws, CoverNode b, CoverNode w) {
    // Adjacent pair: the geometric arc from alpha to beta in the positive
    // direction (rhombus convention).
    const auto& g = ws.graph();
    if (!b.is_face && !w.is_face) {
        for (int e = 0; e < g.num_edges(); ++e) {
            const auto& ge = g.edge(e);
            if (ge.b == b.id && ge.w == w.id && w.at + ge.off == b.at)
                return Sector{lift_angle(ws.alpha(e)), lift_angle(ws.beta(e))};
        }
    }
    return sector(ws, g_factorized(ws, b, w));
}

// ---------------------------------------------------------------------------
// Contours

Contour build_contour(const WeightSystem& ws, const PhasePoint& u0, const Sector& s) {
    const double h2 = ws.params().half_height();
    double ustar = s.complement_midpoint();
    Contour c;
    switch (u0.phase) {
    case Phase::gaseous:
        c.points = {cx(ustar, -h2), cx(ustar, h2)};
        c.c0_up_crossings = 1;
        c.c1_crossings = 1; // through the identified endpoints
        break;
    case Phase::liquid: {
        double x0 = u0.u0.real(), y0 = u0.u0.imag();
        double delta = lift_gap(lift_angle(x0), ustar);
        c.points = {cx(x0, -y0), cx(x0 + delta, -y0), cx(x0 + delta, y0), cx(x0, y0)};
        c.c0_up_crossings = 1;
        break;
    }
    case Phase::solid: {
        double x0 = lift_angle(u0.u0.real());
        double eps = std::min(1e-2, h2 / 4.0);
        double delta = lift_gap(x0, ustar);
        c.points = {cx(x0, -eps), cx(x0 + delta, -eps), cx(x0 + delta, eps), cx(x0, eps)};
        c.closed = true;
        c.c0_up_crossings = 1;
        c.c0_down_crossings = 1;
        break;
    }
    }
    return c;
}

// ---------------------------------------------------------------------------
// H functions

namespace {

// log(theta(u - u0) / theta(u - conj u0)) continued from the principal value
// at the anchor point (ustar + pi/2 on C0), along the horizontal walk to
// Re u followed by the vertical segment to u.  This realizes the plane
// (multivalued) determination; callers wanting the determination cut along
// the integration contour pass representatives with Re in (ustar, ustar+pi).
cx continued_log_ratio(const EllipticParams& p, cx u0, double ustar, cx u) {
    auto f = [&](cx z) { return p.theta(z - u0) / p.theta(z - std::conj(u0)); };
    double anchor = ustar + kPi / 2.0;
    double xend = u.real();
    std::vector<cx> pts;
    int steps = std::max(2, (int)std::ceil(std::abs(xend - anchor) / (kPi / 64)));
    for (int i = 0; i <= steps; ++i)
        pts.push_back(cx(anchor + (xend - anchor) * i / steps, 0.0));
    int vsteps = std::max(1, (int)std::ceil(std::abs(u.imag()) / (kPi / 64)));
    for (int i = 1; i <= vsteps; ++i)
        pts.push_back(cx(xend, u.imag() * i / vsteps));
    cx val = std::log(f(pts[0]));
    for (size_t i = 1; i < pts.size(); ++i) {
        val += std::log(f(pts[i]) / f(pts[i - 1]));
    }
    return val;
}

} // namespace

cx H_function(const WeightSystem& ws, const PhasePoint& u0, double ustar, cx u) {
    const auto& p = ws.params();
    switch (u0.phase) {
    case Phase::gaseous: {
        return p.bigKprime() / kPi * p.jacobi_zeta(u) + u / kPi;
    }
    case Phase::liquid: {
        cx logpart = continued_log_ratio(p, u0.u0, ustar, u);
        cx zt = p.jacobi_zeta(u);
        return logpart / cx(0, 2 * kPi) -
               cx(0, p.bigK() / (kPi * kPi)) * (u0.u0 - std::conj(u0.u0)) * zt;
    }
    case Phase::solid: {
        // Indicator of the inside of the rectangle contour.
        double x0 = lift_angle(u0.u0.real());
        double delta = lift_gap(x0, ustar);
        double d = lift_gap(x0, u.real());
        double eps = std::min(1e-2, p.half_height() / 4.0);
        bool inside = d > 0 && d < delta && std::abs(u.imag()) < eps;
        return inside ? 1.0 : 0.0;
    }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Inverse coefficients

namespace {

// Residue of g at a simple pole a (lifted to [0,pi)) on C0: strip the single
// theta(u - angle)^{-1} factor with angle = a mod pi.  theta(u - angle) =
// (-1)^m theta(u - a) for angle = a - m pi, so the stripped factor leaves a
// sign.
cx residue_simple(const EllipticParams& p, const KernelFunction& g, double a) {
    cx rest = 1;
    for (const auto& f : g.angle_factors()) {
        double d = lift_angle(f.angle - a);
        bool at_pole = d < 1e-12 || d > kPi - 1e-12;
        if (at_pole) {
            if (f.exponent != -1)
                throw std::logic_error("residue_simple: pole is not simple");
            long m = std::lround((a - f.angle) / kPi);
            if (m % 2 != 0) rest = -rest;
            continue;
        }
        cx th = p.theta(cx(a, 0) - f.angle);
        for (int k = 0; k < std::abs(f.exponent); ++k)
            rest = f.exponent > 0 ? rest * th : rest / th;
    }
    for (const auto& f : g.shift_factors()) {
        cx th = p.theta(cx(a, 0) + f.shift);
        for (int k = 0; k < std::abs(f.exponent); ++k)
            rest = f.exponent > 0 ? rest * th : rest / th;
    }
    return rest / p.theta_prime0();
}

std::function<cx(cx)> integrand(const KernelFunction& g) {
    return [&g](cx u) { return g.eval(u); };
}

// Safe radius for a residue circle at angle a: well inside the gap to the
// other marked angles and the torus height.
double residue_radius(const EllipticParams& p, const KernelFunction& g, double a) {
    double gap = kPi;
    for (const auto& f : g.angle_factors()) {
        double d = lift_angle(f.angle - a);
        d = std::min(d, kPi - d);
        if (d > 1e-12) gap = std::min(gap, d);
    }
    return std::min({0.3 * gap, 0.4 * p.half_height(), 0.5});
}

} // namespace

InverseCoefficient inverse_coeff(const WeightSystem& ws, const PhasePoint& u0, CoverNode b,
                                 CoverNode w, double abs_tol) {
    const auto& p = ws.params();
    KernelFunction g = g_factorized(ws, b, w);
    Sector s = sector(ws, b, w);
    InverseCoefficient out;
    if (u0.phase == Phase::solid) {
        // Residue route: poles strictly inside the rightward arc (u0, u*).
        double x0 = lift_angle(u0.u0.real());
        double ustar = s.complement_midpoint();
        double delta = lift_gap(x0, ustar);
        cx sum = 0;
        for (auto& [a, m] : g.poles_on_c0()) {
            double d = lift_gap(x0, a);
            if (!(d > 0 && d < delta)) continue;
            if (m == 1) {
                sum += residue_simple(p, g, a);
            } else {
                sum += residue_at([&](cx z) { return g.eval(z); }, cx(a, 0),
                                  residue_radius(p, g, a));
            }
        }
        out.value = -p.theta_prime0() * sum;
        out.est_error = 1e-14;
        return out;
    }
    Contour c = build_contour(ws, u0, s);
    std::vector<cx> pts = c.points;
    if (c.closed) pts.push_back(pts.front());
    auto r = integrate_polyline(integrand(g), pts, abs_tol);
    out.value = cx(0, 1) * p.theta_prime0() / (2 * kPi) * r.value;
    out.est_error = r.error * p.theta_prime0() / (2 * kPi);
    return out;
}

InverseCoefficient inverse_coeff_solid_quadrature(const WeightSystem& ws,
                                                  const PhasePoint& u0, CoverNode b,
                                                  CoverNode w, double abs_tol) {
    const auto& p = ws.params();
    KernelFunction g = g_factorized(ws, b, w);
    Sector s = sector(ws, b, w);
    Contour c = build_contour(ws, u0, s);
    std::vector<cx> pts = c.points;
    pts.push_back(pts.front());
    auto r = integrate_polyline(integrand(g), pts, abs_tol);
    return {cx(0, 1) * p.theta_prime0() / (2 * kPi) * r.value,
            r.error * p.theta_prime0() / (2 * kPi)};
}

InverseCoefficient inverse_coeff_alt(const WeightSystem& ws, const PhasePoint& u0,
                                     CoverNode b, CoverNode w) {
    const auto& p = ws.params();
    if (u0.phase == Phase::solid)
        return inverse_coeff(ws, u0, b, w);
    KernelFunction g = g_factorized(ws, b, w);
    Sector s = sector(ws, b, w);
    double ustar = s.complement_midpoint();

    cx sum = 0;
    for (auto& [raw_a, m] : g.poles_on_c0()) {
        // Representative of the pole in the cut circle (ustar, ustar + pi).
        double a = ustar + lift_angle(raw_a - ustar);
        if (m == 1) {
            sum += residue_simple(p, g, a) * H_function(ws, u0, ustar, cx(a, 0));
        } else {
            // Circle quadrature of g * H around the pole.
            const int n = 128;
            double r = residue_radius(p, g, a);
            // Stay clear of the cut through ustar and (liquid) the contour legs.
            double dcut = lift_angle(ustar - a);
            dcut = std::min(dcut, kPi - dcut);
            r = std::min(r, 0.5 * dcut);
            if (u0.phase == Phase::liquid) r = std::min(r, 0.5 * u0.u0.imag());
            cx acc = 0;
            for (int j = 0; j < n; ++j) {
                double phi = 2 * kPi * j / n;
                cx z = cx(a, 0) + std::polar(r, phi);
                acc += g.eval(z) * H_function(ws, u0, ustar, z) * std::polar(r, phi);
            }
            sum += acc / (double)n;
        }
    }
    // Pole of H at pi tau / 2.
    cx pole(0, p.half_height());
    cx resH = (u0.phase == Phase::gaseous)
                  ? cx(p.bigKprime() / (2 * p.bigK()), 0)
                  : (u0.u0 - std::conj(u0.u0)) / cx(0, 2 * kPi);
    sum += g.eval(pole) * resH;
    return {-p.theta_prime0() * sum, 1e-12};
}

IdentityResidual identity_check(const WeightSystem& ws, const PhasePoint& u0, int radius) {
    IdentityResidual out;
    const auto& g = ws.graph();
    std::unordered_map<CoverNode, std::unordered_map<CoverNode, cx, CoverNodeHash>,
                       CoverNodeHash>
        cache;
    auto A = [&](CoverNode b, CoverNode w) {
        auto& row = cache[b];
        auto it = row.find(w);
        if (it != row.end()) return it->second;
        cx v = inverse_coeff(ws, u0, b, w).value;
        row[w] = v;
        return v;
    };
    for (int mx = -radius; mx <= radius; ++mx)
        for (int my = -radius; my <= radius; ++my)
            for (int vb = 0; vb < g.num_vertices(); ++vb) {
                if (g.color(vb) != 'b') continue;
                CoverNode bprime = cover_vertex(vb, {mx, my});
                // Row of A at b' against columns of K at every black b in the
                // window.
                for (int nx = -radius; nx <= radius; ++nx)
                    for (int ny = -radius; ny <= radius; ++ny)
                        for (int vb2 = 0; vb2 < g.num_vertices(); ++vb2) {
                            if (g.color(vb2) != 'b') continue;
                            CoverNode bcol = cover_vertex(vb2, {nx, ny});
                            cx acc = 0;
                            for (int e = 0; e < g.num_edges(); ++e) {
                                if (g.edge(e).b != vb2) continue;
                                Offset wat = bcol.at - g.edge(e).off;
                                acc += A(bprime, cover_vertex(g.edge(e).w, wat)) *
                                       ws.coefficient(CoverEdge{e, wat});
                            }
                            double delta = (bprime == bcol) ? 1.0 : 0.0;
                            out.black = std::max(out.black, std::abs(acc - delta));
                        }
            }
    for (int mx = -radius; mx <= radius; ++mx)
        for (int my = -radius; my <= radius; ++my)
            for (int vw = 0; vw < g.num_vertices(); ++vw) {
                if (g.color(vw) != 'w') continue;
                CoverNode wprime = cover_vertex(vw, {mx, my});
                for (int nx = -radius; nx <= radius; ++nx)
                    for (int ny = -radius; ny <= radius; ++ny)
                        for (int vw2 = 0; vw2 < g.num_vertices(); ++vw2) {
                            if (g.color(vw2) != 'w') continue;
                            CoverNode wrow = cover_vertex(vw2, {nx, ny});
                            cx acc = 0;
                            for (int e = 0; e < g.num_edges(); ++e) {
                                if (g.edge(e).w != vw2) continue;
                                Offset bat = wrow.at + g.edge(e).off;
                                acc += ws.coefficient(CoverEdge{e, wrow.at}) *
                                       A(cover_vertex(g.edge(e).b, bat), wprime);
                            }
                            double delta = (wprime == wrow) ? 1.0 : 0.0;
                            out.white = std::max(out.white, std::abs(acc - delta));
                        }
            }
    return out;
}

} // namespace elldimer
