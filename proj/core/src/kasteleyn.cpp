#include "elldimer/kasteleyn.hpp"

#include <cmath>

namespace elldimer {

WeightSystem::WeightSystem(const BipartiteGraph& g, const EllipticParams& params,
                           HalfAngleMap alpha, double t_real, CoverNode abel_base)
    : g_(g), params_(params), alpha_(std::move(alpha)),
      t_(t_real, params.half_height()), eta_(g_, alpha_, abel_base) {
    if ((int)alpha_.alpha.size() != (int)g_.tracks().size())
        throw std::invalid_argument("WeightSystem: one half-angle per track required");
}

cx WeightSystem::coefficient(const CoverEdge& edge) const {
    double a = alpha(edge.e), b = beta(edge.e);
    return params_.theta(b - a) / denominator_black(edge);
}

cx WeightSystem::denominator_black(const CoverEdge& edge) const {
    double a = alpha(edge.e), b = beta(edge.e);
    const auto& ge = g_.edge(edge.e);
    double eta_b = eta_.value(cover_vertex(ge.b, edge.at + ge.off));
    return params_.theta(t_ + eta_b - b) * params_.theta(t_ + eta_b - a);
}

cx WeightSystem::denominator_white(const CoverEdge& edge) const {
    double a = alpha(edge.e), b = beta(edge.e);
    const auto& ge = g_.edge(edge.e);
    double eta_w = eta_.value(cover_vertex(ge.w, edge.at));
    return params_.theta(t_ + eta_w + a) * params_.theta(t_ + eta_w + b);
}

cx WeightSystem::denominator_faces(const CoverEdge& edge) const {
    double eta_f = eta_.value(cover_face(g_.face_left(edge.e), edge.at + g_.face_left_base(edge.e)));
    double eta_fp =
        eta_.value(cover_face(g_.face_right(edge.e), edge.at + g_.face_right_base(edge.e)));
    return params_.theta(t_ + eta_f) * params_.theta(t_ + eta_fp);
}

cx WeightSystem::critical_coefficient(int e) const {
    double a = alpha(e), b = beta(e);
    return std::exp(cx(0, 2 * b)) - std::exp(cx(0, 2 * a));
}

cx WeightSystem::face_weight(int f, Offset at) const {
    const auto& face = g_.face(f);
    cx w = 1;
    for (int k = 0; k < (int)face.boundary.size(); ++k) {
        int h = face.boundary[k];
        // Offset of the tail of h relative to the face base.
        Offset tail_off = (k == 0) ? Offset{0, 0} : face.head_offset[k - 1];
        int e = h / 2;
        Offset white_at = (h % 2 == 0) ? at + tail_off
                                       : at + face.head_offset[k]; // head is the white end
        cx kc = coefficient(CoverEdge{e, white_at});
        if (h % 2 == 0)
            w *= kc;
        else
            w /= kc;
    }
    return w;
}

cx WeightSystem::critical_face_weight(int f) const {
    const auto& face = g_.face(f);
    cx w = 1;
    for (int h : face.boundary) {
        cx kc = critical_coefficient(h / 2);
        if (h % 2 == 0)
            w *= kc;
        else
            w /= kc;
    }
    return w;
}

KasteleynCheck check_kasteleyn(const WeightSystem& ws) {
    KasteleynCheck out;
    const auto& g = ws.graph();
    for (int f = 0; f < g.num_faces(); ++f) {
        if (g.face(f).outer) continue;
        int n2 = (int)g.face(f).boundary.size();
        int n = n2 / 2;
        cx w = ws.face_weight(f);
        double sign = (n % 2 == 0) ? -1.0 : 1.0; // (-1)^{n+1}
        cx normalized = w / std::abs(w) * sign;
        double dev = std::abs(normalized - 1.0);
        if (dev > out.worst) out.worst = dev;
        if (dev > 1e-10 && out.offending_face < 0) {
            out.ok = false;
            out.offending_face = f;
        }
    }
    return out;
}

RationalLimitReport rational_limit_face_weights(const BipartiteGraph& g,
                                                const HalfAngleMap& alpha, double t_real,
                                                const std::vector<double>& q_sequence) {
    RationalLimitReport report;
    for (double q : q_sequence) {
        EllipticParams params(q);
        WeightSystem ws(g, params, alpha, t_real);
        double worst = 0;
        for (int f = 0; f < g.num_faces(); ++f) {
            if (g.face(f).outer) continue;
            double dev = std::abs(ws.face_weight(f) - ws.critical_face_weight(f));
            worst = std::max(worst, dev);
        }
        report.q.push_back(q);
        report.max_deviation.push_back(worst);
    }
    return report;
}

} // namespace elldimer
