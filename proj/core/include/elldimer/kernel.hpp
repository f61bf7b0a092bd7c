// The functions g_{x,y}(u) in the kernel of the Kasteleyn operator: path
// products of local theta factors over the quad-graph, their factorized form
// (poles and zeros on the real circle C0 plus two endpoint factors), and the
// telescoping primitive F^{(s)}.

#ifndef ELLDIMER_KERNEL_HPP
#define ELLDIMER_KERNEL_HPP

#include <map>
#include <vector>

#include "elldimer/kasteleyn.hpp"

namespace elldimer {

// Factorized kernel function:
//   g(u) = prod_T theta(u - alpha_T)^{m_T} * prod_j theta(u + s_j)^{k_j},
// the first product over train-track angles (m_T < 0 gives poles on C0), the
// second over endpoint factors s = t + eta(w) or s = -t - eta(b).
class KernelFunction {
public:
    struct AngleFactor {
        int track;
        double angle;
        int exponent;
    };
    struct ShiftFactor {
        cx shift;
        int exponent;
    };

    const std::vector<AngleFactor>& angle_factors() const { return angles_; }
    const std::vector<ShiftFactor>& shift_factors() const { return shifts_; }

    cx eval(cx u) const;
    cx log_eval(cx u) const; // log g up to 2 pi i
    cx dlog(cx u) const;     // g'(u)/g(u)

    // Angles on C0 (lifted to [0,pi)) carrying poles / zeros, with multiplicity.
    std::vector<std::pair<double, int>> poles_on_c0() const;
    std::vector<std::pair<double, int>> zeros_on_c0() const;

    int total_factor_size() const;

private:
    friend KernelFunction g_factorized(const WeightSystem&, CoverNode, CoverNode);
    const EllipticParams* params_ = nullptr;
    std::vector<AngleFactor> angles_;
    std::vector<ShiftFactor> shifts_;
};

// Factorized g_{x,y} between two quad-graph cover nodes (interior endpoint
// factors cancel along the path; any shortest path gives the same result).
KernelFunction g_factorized(const WeightSystem& ws, CoverNode x, CoverNode y);

// Direct path-product evaluation along an explicit quad-graph path
// (independent of the factorized route; used as its oracle).
cx g_eval_path(const WeightSystem& ws, const std::vector<CoverNode>& path, cx u);

// g_{x,y}(u) along the BFS path.
cx g_eval(const WeightSystem& ws, CoverNode x, CoverNode y, cx u);

// F^{(s)}(u; a) = (theta'/theta(s-a) - theta'/theta(u-a)) / theta'(0).
cx F_primitive(const EllipticParams& p, cx s, cx u, double a);

struct KernelResidual {
    double left = 0;  // max |sum_w g_{x,w} K_{w,b}| over black b in the window
    double right = 0; // max |sum_b K_{w,b} g_{b,x}| over white w in the window
};

// Kernel property of g at a point u, over all vertices within `radius`
// fundamental domains of the origin.
KernelResidual kernel_check(const WeightSystem& ws, CoverNode x, cx u, int radius = 1);

} // namespace elldimer

#endif
