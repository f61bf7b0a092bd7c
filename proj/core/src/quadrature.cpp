#include "elldimer/quadrature.hpp"

#include <cmath>
#include <queue>

namespace elldimer {

namespace {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
constexpr double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    cx a, b;
    cx value;
    double error;
};

Panel evaluate_panel(const std::function<cx(cx)>& f, cx a, cx b, int& evals) {
    cx center = 0.5 * (a + b);
    cx half = 0.5 * (b - a);
    cx fc = f(center);
    evals++;

    cx result_gauss = wg[3] * fc;
    cx result_kronrod = wgk[7] * fc;
    for (int j = 0; j < 7; ++j) {
        cx f1 = f(center - half * xgk[j]);
        cx f2 = f(center + half * xgk[j]);
        evals += 2;
        result_kronrod += wgk[j] * (f1 + f2);
        if (j % 2 == 1) result_gauss += wg[j / 2] * (f1 + f2);
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.value = result_kronrod * half;
    p.error = std::abs((result_kronrod - result_gauss) * half);
    return p;
}

} // namespace

QuadratureResult integrate_segment(const std::function<cx(cx)>& f, cx a, cx b,
                                   double abs_tol, int max_subdivisions) {
    QuadratureResult out;
    auto cmp = [](const Panel& lhs, const Panel& rhs) { return lhs.error < rhs.error; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> queue(cmp);
    queue.push(evaluate_panel(f, a, b, out.evaluations));

    double total_error = queue.top().error;
    int splits = 0;
    while (total_error > abs_tol) {
        if (splits >= max_subdivisions)
            throw quadrature_failure("integrate_segment: tolerance not met at max subdivision");
        Panel worst = queue.top();
        queue.pop();
        total_error -= worst.error;
        cx mid = 0.5 * (worst.a + worst.b);
        Panel left = evaluate_panel(f, worst.a, mid, out.evaluations);
        Panel right = evaluate_panel(f, mid, worst.b, out.evaluations);
        total_error += left.error + right.error;
        queue.push(left);
        queue.push(right);
        splits++;
    }
    out.error = total_error;
    while (!queue.empty()) {
        out.value += queue.top().value;
        queue.pop();
    }
    return out;
}

QuadratureResult integrate_polyline(const std::function<cx(cx)>& f,
                                    const std::vector<cx>& points,
                                    double abs_tol, int max_subdivisions) {
    QuadratureResult out;
    if (points.size() < 2) return out;
    double per_segment = abs_tol / double(points.size() - 1);
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        QuadratureResult r =
            integrate_segment(f, points[i], points[i + 1], per_segment, max_subdivisions);
        out.value += r.value;
        out.error += r.error;
        out.evaluations += r.evaluations;
    }
    return out;
}

} // namespace elldimer
