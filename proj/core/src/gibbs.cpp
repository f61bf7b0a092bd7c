#include "elldimer/gibbs.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace elldimer {

namespace {

double lift_angle(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    return r;
}

double lift_gap(double x, double y) { return lift_angle(y - x); }

} // namespace

Probability correlation(const WeightSystem& ws, const PhasePoint& u0,
                        const std::vector<CoverEdge>& edges) {
    const auto& g = ws.graph();
    int k = (int)edges.size();
    cx prefactor = 1;
    Eigen::MatrixXcd A(k, k);
    std::vector<CoverNode> blacks, whites;
    for (const auto& e : edges) {
        prefactor *= ws.coefficient(e);
        whites.push_back(cover_vertex(g.edge(e.e).w, e.at));
        blacks.push_back(cover_vertex(g.edge(e.e).b, e.at + g.edge(e.e).off));
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            A(i, j) = inverse_coeff(ws, u0, blacks[i], whites[j]).value;
    cx value = (k == 0) ? cx(1, 0) : prefactor * A.determinant();
    Probability p;
    p.raw = value.real();
    p.imag = value.imag();
    p.clamped = std::min(1.0, std::max(0.0, p.raw));
    return p;
}

double single_edge_closed_form(const WeightSystem& ws, const PhasePoint& u0,
                               const CoverEdge& edge) {
    const auto& p = ws.params();
    const auto& ge = ws.graph().edge(edge.e);
    double a = lift_angle(ws.alpha(edge.e));
    double b = lift_angle(ws.beta(edge.e));
    double span = lift_gap(a, b); // the positive arc from alpha to beta
    double eta_b = ws.abel().value(cover_vertex(ge.b, edge.at + ge.off));
    double t_b = ws.t_real() + eta_b; // Re(t + eta(b))

    switch (u0.phase) {
    case Phase::gaseous: {
        cx zb = p.jacobi_zeta(cx(b - t_b, 0));
        cx za = p.jacobi_zeta(cx(a - t_b, 0));
        return span / kPi + p.bigKprime() / kPi * (zb - za).real();
    }
    case Phase::liquid: {
        // Both log factors on the same branch sheet: continue from the
        // common anchor in the cut circle of the edge's sector.
        Sector s{a, b};
        double ustar = s.complement_midpoint();
        double arep = ustar + lift_gap(ustar, a);
        double brep = ustar + lift_gap(ustar, b);
        auto logratio = [&](double x) {
            cx f0 = p.theta(cx(ustar + kPi / 2, 0) - u0.u0);
            (void)f0;
            // continued log of theta(x-u0)/theta(x-conj u0) along C0
            auto f = [&](double t) {
                return p.theta(cx(t, 0) - u0.u0) / p.theta(cx(t, 0) - std::conj(u0.u0));
            };
            double anchor = ustar + kPi / 2;
            int steps = std::max(2, (int)std::ceil(std::abs(x - anchor) / (kPi / 64)));
            cx val = std::log(f(anchor));
            for (int i = 1; i <= steps; ++i) {
                double t1 = anchor + (x - anchor) * (i - 1) / steps;
                double t2 = anchor + (x - anchor) * i / steps;
                val += std::log(f(t2) / f(t1));
            }
            return val;
        };
        cx logpart = logratio(brep) - logratio(arep);
        cx zb = p.jacobi_zeta(cx(b - t_b, 0));
        cx za = p.jacobi_zeta(cx(a - t_b, 0));
        cx val = logpart / cx(0, 2 * kPi) -
                 cx(0, p.bigK() / (kPi * kPi)) * (u0.u0 - std::conj(u0.u0)) * (zb - za);
        return val.real();
    }
    case Phase::solid: {
        double x = lift_angle(u0.u0.real());
        return (lift_gap(a, x) < span) ? 1.0 : 0.0;
    }
    }
    return 0;
}

GaseousAsymptotics gaseous_asymptotics(const WeightSystem& ws, const PhasePoint& u0,
                                       CoverNode b, CoverNode w) {
    const auto& p = ws.params();
    GaseousAsymptotics out;
    out.distance = quad_distance(ws.graph(), b, w);
    KernelFunction g = g_factorized(ws, b, w);
    double N = out.distance;

    auto F = [&](double v) {
        double acc = 0;
        for (const auto& f : g.angle_factors())
            acc += f.exponent * std::log(std::abs(p.theta_n(4, cx(v - f.angle, 0))));
        return acc / N;
    };
    auto Fp = [&](double v) {
        cx acc = 0;
        for (const auto& f : g.angle_factors())
            acc += (double)f.exponent * p.log_deriv(4, cx(v - f.angle, 0));
        return acc.real() / N;
    };
    auto Fpp = [&](double v) {
        double h = 1e-5;
        return (Fp(v + h) - Fp(v - h)) / (2 * h);
    };

    // 256-point scan then golden-section refinement and a Newton polish.
    double best_v = 0, best_f = 1e300;
    for (int i = 0; i < 256; ++i) {
        double v = kPi * i / 256.0;
        double f = F(v);
        if (f < best_f) {
            best_f = f;
            best_v = v;
        }
    }
    double lo = best_v - kPi / 256, hi = best_v + kPi / 256;
    const double gr = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 60; ++it) {
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        if (F(c) < F(d))
            hi = d;
        else
            lo = c;
    }
    double v0 = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        double fpp = Fpp(v0);
        if (std::abs(fpp) < 1e-8) throw std::runtime_error("gaseous asymptotics: flat minimum");
        v0 -= Fp(v0) / fpp;
    }
    out.v0 = lift_angle(v0);
    out.F_v0 = F(v0);
    out.F_pp = Fpp(v0);
    if (out.F_pp < 1e-8) throw std::runtime_error("gaseous asymptotics: degenerate saddle");

    cx g_at = g.eval(cx(v0, p.half_height()));
    out.predicted = -p.theta_prime0() / std::sqrt(2 * kPi * N * out.F_pp) * g_at;
    out.measured = inverse_coeff(ws, u0, b, w).value;
    out.ratio = std::abs(out.measured) / std::abs(out.predicted);
    return out;
}

namespace {

// Psi(b) - Psi(w) for the t-immersion extended with Xi = 0, accumulated along
// a quad-graph path: across each (vertex, face) step the increment is
// (theta'/theta)(t + eta(f)) -/+ (theta'/theta)(u - alpha), minus at black
// vertices, plus at white ones.
cx immersion_displacement(const WeightSystem& ws, cx u, CoverNode b, CoverNode w) {
    const auto& p = ws.params();
    auto path = quad_path(ws.graph(), w, b);
    cx psi = 0; // Psi(b) - Psi(w)
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        const CoverNode& x = path[i];
        const CoverNode& y = path[i + 1];
        const CoverNode& vert = x.is_face ? y : x;
        const CoverNode& face = x.is_face ? x : y;
        int track = -1;
        for (const auto& qe : quad_neighbors(ws.graph(), x))
            if (qe.to == y) {
                track = qe.track;
                break;
            }
        double a = ws.angles().angle(track);
        cx inc = p.theta_log_deriv(ws.t() + ws.abel().value(face));
        inc += (ws.graph().color(vert.id) == 'b' ? -1.0 : 1.0) * p.theta_log_deriv(u - a);
        // walking face->vertex adds Psi(vert) - Psi(face); vertex->face
        // subtracts it
        psi += (x.is_face ? 1.0 : -1.0) * inc;
    }
    return psi;
}

} // namespace

LiquidAsymptotics liquid_asymptotics(const WeightSystem& ws, const PhasePoint& u0,
                                     CoverNode b, CoverNode w) {
    const auto& p = ws.params();
    LiquidAsymptotics out;
    out.distance = quad_distance(ws.graph(), b, w);
    KernelFunction g = g_factorized(ws, b, w);
    double eta_b = ws.abel().value(b);
    double eta_w = ws.abel().value(w);
    out.zeta = std::exp(cx(0, eta_b + eta_w + 2 * ws.t_real()));
    out.displacement = immersion_displacement(ws, u0.u0, b, w);
    if (std::abs(out.displacement) < 1e-6)
        throw std::runtime_error("liquid asymptotics: degenerate embedding displacement");
    cx inner = g.eval(u0.u0) / out.displacement * out.zeta;
    out.predicted = -p.theta_prime0() / kPi * inner.imag() * std::conj(out.zeta);
    out.measured = inverse_coeff(ws, u0, b, w).value;
    out.abs_deviation = std::abs(out.measured - out.predicted);
    return out;
}

} // namespace elldimer
