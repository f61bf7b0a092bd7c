#include "elldimer/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace elldimer {

namespace {

double lift_angle(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    return r;
}

// Local factor of g for one quad-graph step between a primal vertex and a
// face.  Returns the angle exponent and the endpoint-factor exponent for the
// vertex (+1 numerator, -1 denominator):
//   g_{w,f} = theta(u-a)/theta(u+t+eta(w)),   g_{f,w} = inverse,
//   g_{b,f} = theta(u-t-eta(b))/theta(u-a),   g_{f,b} = inverse.
struct StepExponents {
    int angle;
    int vertex;
};

StepExponents step_exponents(char color, bool leaving_vertex) {
    if (color == 'w') return leaving_vertex ? StepExponents{+1, -1} : StepExponents{-1, +1};
    return leaving_vertex ? StepExponents{-1, +1} : StepExponents{+1, -1};
}

} // namespace

cx KernelFunction::eval(cx u) const {
    if (total_factor_size() > 64) return std::exp(log_eval(u));
    cx out = 1;
    for (const auto& f : angles_) {
        cx th = params_->theta(u - f.angle);
        for (int k = 0; k < std::abs(f.exponent); ++k) out = f.exponent > 0 ? out * th : out / th;
    }
    for (const auto& f : shifts_) {
        cx th = params_->theta(u + f.shift);
        for (int k = 0; k < std::abs(f.exponent); ++k) out = f.exponent > 0 ? out * th : out / th;
    }
    return out;
}

cx KernelFunction::log_eval(cx u) const {
    cx out = 0;
    for (const auto& f : angles_) out += (double)f.exponent * params_->log_theta(u - f.angle);
    for (const auto& f : shifts_) out += (double)f.exponent * params_->log_theta(u + f.shift);
    return out;
}

cx KernelFunction::dlog(cx u) const {
    cx out = 0;
    for (const auto& f : angles_)
        out += (double)f.exponent * params_->theta_log_deriv(u - f.angle);
    for (const auto& f : shifts_)
        out += (double)f.exponent * params_->theta_log_deriv(u + f.shift);
    return out;
}

std::vector<std::pair<double, int>> KernelFunction::poles_on_c0() const {
    std::vector<std::pair<double, int>> out;
    for (const auto& f : angles_)
        if (f.exponent < 0) out.push_back({lift_angle(f.angle), -f.exponent});
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<double, int>> KernelFunction::zeros_on_c0() const {
    std::vector<std::pair<double, int>> out;
    for (const auto& f : angles_)
        if (f.exponent > 0) out.push_back({lift_angle(f.angle), f.exponent});
    std::sort(out.begin(), out.end());
    return out;
}

int KernelFunction::total_factor_size() const {
    int n = 0;
    for (const auto& f : angles_) n += std::abs(f.exponent);
    for (const auto& f : shifts_) n += std::abs(f.exponent);
    return n;
}

KernelFunction g_factorized(const WeightSystem& ws, CoverNode x, CoverNode y) {
    KernelFunction out;
    out.params_ = &ws.params();
    if (x == y) return out;
    auto path = quad_path(ws.graph(), x, y);

    std::map<int, int> angle_exp; // track -> exponent
    struct VertexKey {
        bool operator<(const VertexKey& o) const {
            return std::tie(id, at, black) < std::tie(o.id, o.at, o.black);
        }
        int id;
        Offset at;
        bool black;
    };
    std::map<VertexKey, int> vertex_exp;

    for (size_t i = 0; i + 1 < path.size(); ++i) {
        const CoverNode& a = path[i];
        const CoverNode& b = path[i + 1];
        const CoverNode& vert = a.is_face ? b : a;
        bool leaving = !a.is_face;
        // Identify the corner joining a and b to read off the crossing track.
        int track = -1;
        for (const auto& qe : quad_neighbors(ws.graph(), a))
            if (qe.to == b) {
                track = qe.track;
                break;
            }
        if (track < 0) throw std::logic_error("g_factorized: path step is not a quad edge");
        char color = ws.graph().color(vert.id);
        StepExponents se = step_exponents(color, leaving);
        angle_exp[track] += se.angle;
        vertex_exp[{vert.id, vert.at, color == 'b'}] += se.vertex;
    }

    for (auto& [track, exp] : angle_exp)
        if (exp != 0)
            out.angles_.push_back({track, ws.angles().angle(track), exp});
    for (auto& [key, exp] : vertex_exp) {
        if (exp == 0) continue;
        double eta = ws.abel().value(cover_vertex(key.id, key.at));
        cx shift = key.black ? (-ws.t() - eta) : (ws.t() + eta);
        out.shifts_.push_back({shift, exp});
    }
    // Deterministic factor order stabilizes floating-point products.
    std::sort(out.angles_.begin(), out.angles_.end(),
              [](const auto& a, const auto& b) { return a.angle < b.angle; });
    std::sort(out.shifts_.begin(), out.shifts_.end(), [](const auto& a, const auto& b) {
        return std::make_pair(a.shift.real(), a.shift.imag()) <
               std::make_pair(b.shift.real(), b.shift.imag());
    });
    return out;
}

cx g_eval_path(const WeightSystem& ws, const std::vector<CoverNode>& path, cx u) {
    cx out = 1;
    const auto& p = ws.params();
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        const CoverNode& a = path[i];
        const CoverNode& b = path[i + 1];
        const CoverNode& vert = a.is_face ? b : a;
        bool leaving = !a.is_face;
        int track = -1;
        for (const auto& qe : quad_neighbors(ws.graph(), a))
            if (qe.to == b) {
                track = qe.track;
                break;
            }
        if (track < 0) throw std::logic_error("g_eval_path: path step is not a quad edge");
        char color = ws.graph().color(vert.id);
        double eta = ws.abel().value(cover_vertex(vert.id, vert.at));
        cx vertex_factor =
            (color == 'w') ? p.theta(u + ws.t() + eta) : p.theta(u - ws.t() - eta);
        cx angle_factor = p.theta(u - ws.angles().angle(track));
        StepExponents se = step_exponents(color, leaving);
        out *= (se.angle > 0) ? angle_factor : 1.0 / angle_factor;
        out *= (se.vertex > 0) ? vertex_factor : 1.0 / vertex_factor;
    }
    return out;
}

cx g_eval(const WeightSystem& ws, CoverNode x, CoverNode y, cx u) {
    if (x == y) return 1;
    return g_eval_path(ws, quad_path(ws.graph(), x, y), u);
}

cx F_primitive(const EllipticParams& p, cx s, cx u, double a) {
    return (p.theta_log_deriv(s - a) - p.theta_log_deriv(u - a)) / p.theta_prime0();
}

KernelResidual kernel_check(const WeightSystem& ws, CoverNode x, cx u, int radius) {
    KernelResidual out;
    const auto& g = ws.graph();
    for (int mx = -radius; mx <= radius; ++mx) {
        for (int my = -radius; my <= radius; ++my) {
            Offset at{mx, my};
            // Left kernel: for every black b, sum over incident whites.
            for (int v = 0; v < g.num_vertices(); ++v) {
                if (g.color(v) != 'b') continue;
                cx acc = 0;
                double scale = 0;
                for (int e = 0; e < g.num_edges(); ++e) {
                    if (g.edge(e).b != v) continue;
                    // black copy at `at`: white endpoint at at - off
                    Offset wat = at - g.edge(e).off;
                    cx gv = g_factorized(ws, x, cover_vertex(g.edge(e).w, wat)).eval(u);
                    cx kc = ws.coefficient(CoverEdge{e, wat});
                    acc += gv * kc;
                    scale = std::max(scale, std::abs(gv * kc));
                }
                out.left = std::max(out.left, std::abs(acc) / std::max(scale, 1e-300));
            }
            // Right kernel: for every white w, sum over incident blacks.
            for (int v = 0; v < g.num_vertices(); ++v) {
                if (g.color(v) != 'w') continue;
                cx acc = 0;
                double scale = 0;
                for (int e = 0; e < g.num_edges(); ++e) {
                    if (g.edge(e).w != v) continue;
                    Offset bat = at + g.edge(e).off;
                    cx gv = g_factorized(ws, cover_vertex(g.edge(e).b, bat), x).eval(u);
                    cx kc = ws.coefficient(CoverEdge{e, at});
                    acc += kc * gv;
                    scale = std::max(scale, std::abs(kc * gv));
                }
                out.right = std::max(out.right, std::abs(acc) / std::max(scale, 1e-300));
            }
        }
    }
    return out;
}

} // namespace elldimer
