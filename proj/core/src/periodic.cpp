#include "elldimer/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace elldimer {

namespace {

double lift_angle(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    return r;
}

double lift_gap(double x, double y) { return lift_angle(y - x); }

long det2(Offset a, Offset b) { return (long)a.x * b.y - (long)a.y * b.x; }

std::vector<int> tracks_cut_at(const BipartiteGraph& g, const HalfAngleMap& alpha,
                               double cut) {
    std::vector<int> order((size_t)g.tracks().size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double la = lift_gap(cut, alpha.angle(a));
        double lb = lift_gap(cut, alpha.angle(b));
        if (la != lb) return la < lb;
        return a < b;
    });
    return order;
}

} // namespace

std::vector<Offset> NewtonPolygon::interior_points() const {
    std::vector<Offset> out;
    if (boundary.size() < 3) return out;
    int minx = boundary[0].x, maxx = minx, miny = boundary[0].y, maxy = miny;
    for (auto p : boundary) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    for (int x = minx; x <= maxx; ++x)
        for (int y = miny; y <= maxy; ++y)
            if (contains_strictly(x, y)) out.push_back({x, y});
    return out;
}

bool NewtonPolygon::contains_strictly(double x, double y) const {
    int n = (int)boundary.size();
    for (int i = 0; i < n; ++i) {
        Offset a = boundary[i], b = boundary[(i + 1) % n];
        double cross = (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
        if (cross <= 1e-12) return false; // boundary is counterclockwise
    }
    return true;
}

NewtonPolygon newton_polygon(const BipartiteGraph& g, const HalfAngleMap& alpha, double cut) {
    NewtonPolygon np;
    np.track_order = tracks_cut_at(g, alpha, cut);
    Offset p{0, 0};
    np.boundary.push_back(p);
    for (size_t j = 0; j + 1 < np.track_order.size(); ++j) {
        p = p + g.tracks()[np.track_order[j]].homology;
        np.boundary.push_back(p);
    }
    return np;
}

PhiResult phi_map(const BipartiteGraph& g, const HalfAngleMap& alpha, double cut) {
    NewtonPolygon np = newton_polygon(g, alpha, cut);
    // Degenerate polygons (zero area) are unsupported.
    long twice_area = 0;
    int n = (int)np.boundary.size();
    for (int i = 0; i < n; ++i) {
        Offset a = np.boundary[i], b = np.boundary[(i + 1) % n];
        twice_area += det2(a, b);
    }
    if (twice_area <= 0)
        throw std::domain_error("phi_map: geometric Newton polygon has no interior");
    PhiResult out;
    const auto& order = np.track_order;
    for (size_t j = 0; j < order.size(); ++j) {
        double prev = alpha.angle(order[(j + order.size() - 1) % order.size()]);
        double gap = lift_gap(prev, alpha.angle(order[j]));
        out.x += gap / kPi * np.boundary[j].x;
        out.y += gap / kPi * np.boundary[j].y;
    }
    double rx = std::abs(out.x - std::round(out.x));
    double ry = std::abs(out.y - std::round(out.y));
    out.periodic = rx < 1e-9 && ry < 1e-9;
    return out;
}

// ---------------------------------------------------------------------------
// Spectral data

SpectralData::SpectralData(const WeightSystem& ws) : ws_(ws) {
    const auto& g = ws.graph();
    if (!g.periodic()) throw std::invalid_argument("SpectralData: periodic graph required");
    PhiResult phi = phi_map(g, ws.angles());
    if (!phi.periodic)
        throw std::domain_error("SpectralData: phi(alpha) is not a lattice point, the "
                                "Kasteleyn operator is not periodic");
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.color(v) == 'w')
            row_white_.push_back(v);
        else
            col_black_.push_back(v);
    }
    if (row_white_.size() != col_black_.size())
        throw std::domain_error("SpectralData: unbalanced fundamental domain");

    for (const auto& t : g.tracks()) {
        sign_exp_z_ += ws.angles().angle(t.id) * t.homology.y;
        sign_exp_w_ += ws.angles().angle(t.id) * t.homology.x;
    }

    // Exponent window of det K(z,w); recover Laurent coefficients by DFT on a
    // scaled roots-of-unity grid.
    int n = (int)row_white_.size();
    std::vector<int> rminx(n, 1 << 20), rmaxx(n, -(1 << 20)), rminy(n, 1 << 20),
        rmaxy(n, -(1 << 20));
    for (int e = 0; e < g.num_edges(); ++e) {
        int r = (int)(std::find(row_white_.begin(), row_white_.end(), g.edge(e).w) -
                      row_white_.begin());
        rminx[r] = std::min(rminx[r], g.edge(e).off.x);
        rmaxx[r] = std::max(rmaxx[r], g.edge(e).off.x);
        rminy[r] = std::min(rminy[r], g.edge(e).off.y);
        rmaxy[r] = std::max(rmaxy[r], g.edge(e).off.y);
    }
    int dxmin = 0, dxmax = 0, dymin = 0, dymax = 0;
    for (int r = 0; r < n; ++r) {
        dxmin += rminx[r];
        dxmax += rmaxx[r];
        dymin += rminy[r];
        dymax += rmaxy[r];
    }
    int Nx = dxmax - dxmin + 1, Ny = dymax - dymin + 1;
    std::vector<std::vector<cx>> values((size_t)Nx, std::vector<cx>((size_t)Ny));
    for (int j = 0; j < Nx; ++j)
        for (int k = 0; k < Ny; ++k) {
            cx z = std::polar(1.0, 2 * kPi * j / Nx);
            cx w = std::polar(1.0, 2 * kPi * k / Ny);
            values[j][k] = magnetic_matrix(z, w).determinant();
        }
    double maxc = 0;
    std::map<Offset, cx> raw;
    for (int a = dxmin; a <= dxmax; ++a)
        for (int b = dymin; b <= dymax; ++b) {
            cx c = 0;
            for (int j = 0; j < Nx; ++j)
                for (int k = 0; k < Ny; ++k)
                    c += values[j][k] * std::polar(1.0, -2 * kPi * (double)j * a / Nx) *
                         std::polar(1.0, -2 * kPi * (double)k * b / Ny);
            c /= (double)Nx * Ny;
            raw[{a, b}] = c;
            maxc = std::max(maxc, std::abs(c));
        }
    coeff_scale_ = maxc;
    for (auto& [off, c] : raw)
        if (std::abs(c) > 1e-9 * maxc) coeffs_[off] = c;
}

Eigen::MatrixXcd SpectralData::magnetic_matrix(cx z, cx w) const {
    const auto& g = ws_.graph();
    int n = (int)row_white_.size();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int e = 0; e < g.num_edges(); ++e) {
        int r = (int)(std::find(row_white_.begin(), row_white_.end(), g.edge(e).w) -
                      row_white_.begin());
        int c = (int)(std::find(col_black_.begin(), col_black_.end(), g.edge(e).b) -
                      col_black_.begin());
        cx mono = std::pow(z, g.edge(e).off.x) * std::pow(w, g.edge(e).off.y);
        m(r, c) += ws_.coefficient(e) * mono;
    }
    return m;
}

cx SpectralData::P(cx z, cx w) const {
    cx out = 0;
    for (const auto& [off, c] : coeffs_)
        out += c * std::pow(z, off.x) * std::pow(w, off.y);
    return out;
}

cx SpectralData::dP_dw(cx z, cx w) const {
    cx out = 0;
    for (const auto& [off, c] : coeffs_)
        if (off.y != 0) out += c * (double)off.y * std::pow(z, off.x) * std::pow(w, off.y - 1);
    return out;
}

std::vector<Offset> SpectralData::support_hull() const {
    std::vector<Offset> pts;
    for (const auto& [off, c] : coeffs_) pts.push_back(off);
    if (pts.size() < 3) return pts;
    // Monotone chain convex hull.
    std::sort(pts.begin(), pts.end(), [](Offset a, Offset b) {
        return std::pair(a.x, a.y) < std::pair(b.x, b.y);
    });
    std::vector<Offset> hull;
    auto build = [&](auto begin, auto end) {
        size_t start = hull.size();
        for (auto it = begin; it != end; ++it) {
            while (hull.size() >= start + 2 &&
                   det2(hull.back() - hull[hull.size() - 2], *it - hull.back()) <= 0)
                hull.pop_back();
            hull.push_back(*it);
        }
        hull.pop_back();
    };
    build(pts.begin(), pts.end());
    build(pts.rbegin(), pts.rend());
    return hull;
}

cx SpectralData::z_of(cx u) const {
    const auto& g = ws_.graph();
    long k = std::lround(sign_exp_z_ / kPi);
    cx out = (k % 2 == 0) ? 1.0 : -1.0;
    for (const auto& t : g.tracks()) {
        cx th = ws_.params().theta(u - ws_.angles().angle(t.id));
        int e = -t.homology.y;
        for (int i = 0; i < std::abs(e); ++i) out = e > 0 ? out * th : out / th;
    }
    return out;
}

cx SpectralData::w_of(cx u) const {
    const auto& g = ws_.graph();
    long k = std::lround(sign_exp_w_ / kPi);
    cx out = (k % 2 == 0) ? 1.0 : -1.0;
    for (const auto& t : g.tracks()) {
        cx th = ws_.params().theta(u - ws_.angles().angle(t.id));
        int e = t.homology.x;
        for (int i = 0; i < std::abs(e); ++i) out = e > 0 ? out * th : out / th;
    }
    return out;
}

cx SpectralData::z_transfer(cx u) const {
    return g_eval(ws_, cover_vertex(0, {1, 0}), cover_vertex(0), u);
}

cx SpectralData::w_transfer(cx u) const {
    return g_eval(ws_, cover_vertex(0, {0, 1}), cover_vertex(0), u);
}

cx SpectralData::dlog_z(cx u) const {
    cx out = 0;
    for (const auto& t : ws_.graph().tracks())
        out += (double)(-t.homology.y) *
               ws_.params().theta_log_deriv(u - ws_.angles().angle(t.id));
    return out;
}

cx SpectralData::dlog_w(cx u) const {
    cx out = 0;
    for (const auto& t : ws_.graph().tracks())
        out += (double)(t.homology.x) *
               ws_.params().theta_log_deriv(u - ws_.angles().angle(t.id));
    return out;
}

// ---------------------------------------------------------------------------
// Amoeba

AmoebaSamples amoeba_sample(const SpectralData& sd, int grid) {
    AmoebaSamples out;
    const auto& p = sd.weights().params();
    double h = 2 * p.half_height();
    auto project = [&](cx u) {
        cx z = sd.z_of(u), w = sd.w_of(u);
        return AmoebaPoint{-std::log(std::abs(w)), std::log(std::abs(z))};
    };
    for (int i = 0; i < grid; ++i)
        for (int j = 1; j < grid; ++j) {
            cx u(kPi * i / grid, h * j / grid - h / 2);
            if (std::abs(u.imag()) < 1e-3) continue;
            out.cloud.push_back(project(u));
        }
    int m = 8 * grid;
    for (int i = 0; i <= m; ++i)
        out.oval.push_back(project(cx(kPi * i / m, p.half_height())));
    // Tentacle boundaries: C0 arcs between consecutive angles, slightly off
    // the angles.
    std::vector<double> angles;
    for (double a : sd.weights().angles().alpha) angles.push_back(lift_angle(a));
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
    for (size_t k = 0; k < angles.size(); ++k) {
        double s = angles[k];
        double span = (angles.size() == 1) ? kPi : lift_gap(s, angles[(k + 1) % angles.size()]);
        std::vector<AmoebaPoint> arc;
        for (int i = 1; i < m; ++i) {
            double x = s + span * i / m;
            arc.push_back(project(cx(x, 0.0)));
        }
        out.tentacles.push_back(std::move(arc));
    }
    return out;
}

// ---------------------------------------------------------------------------
// KOS inverse

KosResult kos_inverse(const SpectralData& sd, double Bx, double By, CoverNode b, CoverNode w,
                      double tol) {
    const auto& g = sd.weights().graph();
    // b = base black + (m,n); w in the fundamental domain.
    int bi = -1, wi = -1;
    {
        int r = 0;
        for (int v = 0; v < g.num_vertices(); ++v)
            if (g.color(v) == 'b') {
                if (v == b.id) bi = r;
                ++r;
            }
        r = 0;
        for (int v = 0; v < g.num_vertices(); ++v)
            if (g.color(v) == 'w') {
                if (v == w.id) wi = r;
                ++r;
            }
    }
    if (bi < 0 || wi < 0) throw std::invalid_argument("kos_inverse: vertex ids out of range");
    if (!(w.at == Offset{0, 0}))
        throw std::invalid_argument("kos_inverse: white vertex must be in the base domain");
    int m = b.at.x, n = b.at.y;

    double rz = std::exp(By), rw = std::exp(-Bx);
    // Singularity proximity: sample |P| on the torus.
    double minP = 1e300, scale = sd.coeff_scale();
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            cx z = std::polar(rz, 2 * kPi * i / 64);
            cx ww = std::polar(rw, 2 * kPi * j / 64);
            minP = std::min(minP, std::abs(sd.P(z, ww)));
        }
    KosResult out;
    out.near_singular = minP < 1e-6 * scale;

    auto integrate = [&](int M) {
        cx acc = 0;
        for (int i = 0; i < M; ++i) {
            cx z = std::polar(rz, 2 * kPi * (i + 0.5) / M);
            for (int j = 0; j < M; ++j) {
                cx ww = std::polar(rw, 2 * kPi * (j + 0.5) / M);
                Eigen::MatrixXcd K = sd.magnetic_matrix(z, ww);
                Eigen::MatrixXcd Kinv = K.partialPivLu().inverse();
                acc += Kinv(bi, wi) * std::pow(z, m) * std::pow(ww, n);
            }
        }
        return acc / (double)(M * M);
    };
    int M = 16;
    cx prev = integrate(M);
    for (; M <= 512; M *= 2) {
        cx next = integrate(2 * M);
        out.est_error = std::abs(next - prev);
        out.value = next;
        if (out.est_error < tol) return out;
        prev = next;
    }
    if (!out.near_singular)
        throw quadrature_failure("kos_inverse: torus integral did not converge");
    return out;
}

// ---------------------------------------------------------------------------
// Slopes

Slope slope(const SpectralData& sd, const PhasePoint& u0, double u1) {
    const auto& p = sd.weights().params();
    double h2 = p.half_height();
    std::vector<cx> pts;
    bool closed = false;
    if (u0.phase == Phase::gaseous) {
        pts = {cx(u1, -h2), cx(u1, h2)};
    } else if (u0.phase == Phase::liquid) {
        double x0 = u0.u0.real(), y0 = u0.u0.imag();
        double delta = lift_gap(lift_angle(x0), lift_angle(u1));
        pts = {cx(x0, -y0), cx(x0 + delta, -y0), cx(x0 + delta, y0), cx(x0, y0)};
    } else {
        double x0 = lift_angle(u0.u0.real());
        double eps = std::min(1e-2, h2 / 4.0);
        double delta = lift_gap(x0, lift_angle(u1));
        pts = {cx(x0, -eps), cx(x0 + delta, -eps), cx(x0 + delta, eps), cx(x0, eps)};
        closed = true;
    }
    if (closed) pts.push_back(pts.front());
    auto rs = integrate_polyline([&](cx u) { return sd.dlog_z(u); }, pts, 1e-11);
    auto rt = integrate_polyline([&](cx u) { return sd.dlog_w(u); }, pts, 1e-11);
    cx s = -rs.value / cx(0, 2 * kPi);
    cx t = -rt.value / cx(0, 2 * kPi);
    return {s.real(), t.real()};
}

Slope slope_solid_closed_form(const BipartiteGraph& g, const HalfAngleMap& alpha, double u0,
                              double u1) {
    Slope out;
    double x0 = lift_angle(u0);
    double delta = lift_gap(x0, lift_angle(u1));
    for (const auto& t : g.tracks()) {
        double d = lift_gap(x0, alpha.angle(t.id));
        if (d > 0 && d < delta) {
            out.s += t.homology.y;
            out.t += -t.homology.x;
        }
    }
    return out;
}

} // namespace elldimer
