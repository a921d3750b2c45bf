#pragma once
// Adaptive explicit Runge-Kutta integrator (Dormand-Prince 5(4)) for the
// small ODE systems used by the geometry and elliptic modules.  The systems
// are low-dimensional and strongly damped away from r=0, so an explicit
// embedded pair with PI step control is enough; callers supply a series
// start to skip the coordinate singularity at the origin.

#include <array>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace hpme {

struct OdeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Dormand-Prince coefficients (classic RKDP 5(4) tableau).
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double dp_b5[7] = {35.0 / 384,      0.0,        500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784,  11.0 / 84,  0.0};
inline constexpr double dp_b4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace detail

// Integrates y' = rhs(t, y) from t to t_end in place.  dt_hint carries the
// step size across calls so node-to-node marching stays efficient.
template <std::size_t K, class F>
void integrate_to(F&& rhs, double& t, std::array<double, K>& y, double t_end,
                  double rtol = 1e-12, double atol = 1e-14, double* dt_hint = nullptr) {
    if (t_end == t) return;
    if (t_end < t) throw OdeError("integrate_to: backward integration not supported");
    using State = std::array<double, K>;
    double h = dt_hint && *dt_hint > 0 ? *dt_hint : (t_end - t) / 16.0;
    h = std::min(h, t_end - t);
    State k[7];
    rhs(t, y, k[0]);  // FSAL seed
    int rejects_in_a_row = 0;
    while (t < t_end) {
        h = std::min(h, t_end - t);
        if (!(h > 0.0) || t + h == t) throw OdeError("integrate_to: step size underflow");
        State ytmp, y5, y4;
        for (int s = 1; s < 7; ++s) {
            for (std::size_t i = 0; i < K; ++i) {
                double acc = 0.0;
                for (int j = 0; j < s; ++j) acc += detail::dp_a[s][j] * k[j][i];
                ytmp[i] = y[i] + h * acc;
            }
            rhs(t + detail::dp_c[s] * h, ytmp, k[s]);
        }
        double errnorm = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            double acc5 = 0.0, acc4 = 0.0;
            for (int s = 0; s < 7; ++s) {
                acc5 += detail::dp_b5[s] * k[s][i];
                acc4 += detail::dp_b4[s] * k[s][i];
            }
            y5[i] = y[i] + h * acc5;
            y4[i] = y[i] + h * acc4;
            double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            double e = (y5[i] - y4[i]) / sc;
            errnorm += e * e;
        }
        errnorm = std::sqrt(errnorm / static_cast<double>(K));
        if (!std::isfinite(errnorm)) errnorm = 1e10;
        if (errnorm <= 1.0) {
            t += h;
            y = y5;
            k[0] = k[6];  // FSAL: last stage is the derivative at the new point
            rejects_in_a_row = 0;
            double grow = errnorm > 0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            if (++rejects_in_a_row > 60) throw OdeError("integrate_to: repeated step rejection");
            h *= std::clamp(0.9 * std::pow(errnorm, -0.2), 0.1, 0.9);
        }
    }
    if (dt_hint) *dt_hint = h;
}

// Gauss-Legendre nodes/weights on [-1,1]; enough points for the smooth
// integrands used in tail estimates and cell measures.
inline const std::array<std::pair<double, double>, 2>& gauss2() {
    static const std::array<std::pair<double, double>, 2> g = {{
        {-0.57735026918962576451, 1.0},
        {+0.57735026918962576451, 1.0},
    }};
    return g;
}

inline const std::array<std::pair<double, double>, 16>& gauss16() {
    static const std::array<std::pair<double, double>, 16> g = {{
        {-0.98940093499164993260, 0.02715245941175409485},
        {-0.94457502307323257608, 0.06225352393864789286},
        {-0.86563120238783174388, 0.09515851168249278481},
        {-0.75540440835500303390, 0.12462897125553387205},
        {-0.61787624440264374845, 0.14959598881657673208},
        {-0.45801677765722738634, 0.16915651939500253819},
        {-0.28160355077925891323, 0.18260341504492358887},
        {-0.09501250983763744019, 0.18945061045506849629},
        {+0.09501250983763744019, 0.18945061045506849629},
        {+0.28160355077925891323, 0.18260341504492358887},
        {+0.45801677765722738634, 0.16915651939500253819},
        {+0.61787624440264374845, 0.14959598881657673208},
        {+0.75540440835500303390, 0.12462897125553387205},
        {+0.86563120238783174388, 0.09515851168249278481},
        {+0.94457502307323257608, 0.06225352393864789286},
        {+0.98940093499164993260, 0.02715245941175409485},
    }};
    return g;
}

// Composite 16-point Gauss quadrature of f over [a,b] split into nseg panels.
template <class F>
double gauss_integrate(F&& f, double a, double b, int nseg = 8) {
    double total = 0.0;
    const double w = (b - a) / nseg;
    for (int s = 0; s < nseg; ++s) {
        const double lo = a + s * w, mid = lo + 0.5 * w, half = 0.5 * w;
        double acc = 0.0;
        for (const auto& [x, gw] : gauss16()) acc += gw * f(mid + half * x);
        total += acc * half;
    }
    return total;
}

}  // namespace hpme
