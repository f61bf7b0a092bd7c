// Adaptive Gauss-Kronrod quadrature for complex-valued integrands along
// straight segments in the complex plane.

#ifndef ELLDIMER_QUADRATURE_HPP
#define ELLDIMER_QUADRATURE_HPP

#include <complex>
#include <functional>
#include <vector>

namespace elldimer {

using cx = std::complex<double>;

struct QuadratureResult {
    cx value = 0;
    double error = 0;     // accumulated error estimate
    int evaluations = 0;
};

struct quadrature_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integrates f along the straight segment [a, b].  Panels are split until the
// Kronrod error estimate falls below abs_tol or max_subdivisions is hit, in
// which case quadrature_failure is thrown.
QuadratureResult integrate_segment(const std::function<cx(cx)>& f, cx a, cx b,
                                   double abs_tol = 1e-11,
                                   int max_subdivisions = 4096);

// Integrates f along a polyline (no closing segment is added).
QuadratureResult integrate_polyline(const std::function<cx(cx)>& f,
                                    const std::vector<cx>& points,
                                    double abs_tol = 1e-11,
                                    int max_subdivisions = 4096);

} // namespace elldimer

#endif
