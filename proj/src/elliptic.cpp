#include "hpme/elliptic.hpp"

#include <algorithm>
#include <cmath>

#include "hpme/ode.hpp"

namespace hpme {

namespace {

// Signed power keeping the odd symmetry of the nonlinearity.
double spow(double u, double p) { return std::copysign(std::pow(std::abs(u), p), u); }

double hermite(const std::vector<double>& xs, const std::vector<double>& ys,
               const std::vector<double>& ds, double r) {
    if (r <= xs.front()) return ys.front();
    if (r >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), r);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double h = xs[i + 1] - xs[i], t = (r - xs[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * ys[i] + (t3 - 2 * t2 + t) * h * ds[i] +
           (-2 * t3 + 3 * t2) * ys[i + 1] + (t3 - t2) * h * ds[i + 1];
}

// Integrates the profile ODE on an arbitrary increasing node set; shared by
// the grid solve and the uniform resampling used for FD cross-checks.
void integrate_profile(const ModelFunction& model, int N, double m, double U0,
                       const std::vector<double>& nodes, std::vector<double>& U,
                       std::vector<double>& dU) {
    const double r_eps = 1e-4;
    const double beta = std::pow(U0, 1.0 / m) / (2.0 * N);
    auto rhs = [&](double r, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        dy[0] = y[1];
        dy[1] = spow(y[0], 1.0 / m) - (N - 1) * model.dlog(r) * y[1];
    };
    U.resize(nodes.size());
    dU.resize(nodes.size());
    double t = r_eps;
    std::array<double, 2> y{U0 + beta * r_eps * r_eps, 2.0 * beta * r_eps};
    double dt_hint = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double r = nodes[i];
        if (r <= r_eps) {
            U[i] = U0 + beta * r * r;
            dU[i] = 2.0 * beta * r;
            continue;
        }
        try {
            integrate_to<2>(rhs, t, y, r, 1e-12, 1e-14, &dt_hint);
        } catch (const OdeError& e) {
            throw SolverError(std::string("sublinear profile solve failed: ") + e.what());
        }
        if (!(y[0] > 0.0)) throw SolverError("sublinear profile solve: U lost positivity");
        U[i] = y[0];
        dU[i] = y[1];
    }
}

}  // namespace

double EllipticSolution::U_at(double r) const {
    return hermite(profile->grid.nodes, U, dU, r);
}

double EllipticSolution::dU_at(double r) const {
    // Slope of U' from the ODE itself: U'' = U^(1/m) - drift * U'.
    const auto& xs = profile->grid.nodes;
    if (r <= xs.front()) return dU.front();
    if (r >= xs.back()) return dU.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), r);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    std::vector<double> d2(2);
    std::vector<double> xs2{xs[i], xs[i + 1]}, ys2{dU[i], dU[i + 1]};
    for (int k = 0; k < 2; ++k) {
        const std::size_t j = i + static_cast<std::size_t>(k);
        const double rj = xs[j];
        d2[static_cast<std::size_t>(k)] =
            rj == 0.0 ? 0.0
                      : spow(U[j], 1.0 / m) - (profile->N - 1) * profile->model.dlog(rj) * dU[j];
    }
    return hermite(xs2, ys2, d2, r);
}

EllipticSolution solve_sublinear(const GeometryProfile& profile, double m, double U0) {
    if (!(U0 > 0.0)) throw std::invalid_argument("solve_sublinear: need U0 > 0");
    if (!(m > 1.0)) throw std::invalid_argument("solve_sublinear: need m > 1");
    EllipticSolution sol;
    sol.profile = std::make_shared<GeometryProfile>(profile);
    sol.m = m;
    sol.U0 = U0;
    integrate_profile(profile.model, profile.N, m, U0, profile.grid.nodes, sol.U, sol.dU);

    // Flux-identity residual on trailing windows [r_a, r_b]:
    //   U'(r_b) - (psi(r_a)/psi(r_b))^(N-1) U'(r_a)
    //     = int_{r_a}^{r_b} (psi(s)/psi(r_b))^(N-1) U(s)^(1/m) ds.
    // The weight is normalized at r_b so the integrand stays in [0,1] range
    // even for exponentially growing psi.
    const ModelFunction& model = profile.model;
    const int N = profile.N;
    const double R = profile.grid.rmax();
    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
        const double rb = frac * R;
        if (rb <= 2e-4) continue;
        const double ra = std::max(0.5 * rb, rb - 2.0);
        const double lb = model.log_psi(rb);
        auto integrand = [&](double s) {
            return std::exp((N - 1) * (model.log_psi(s) - lb)) * spow(sol.U_at(s), 1.0 / m);
        };
        const double lhs = sol.dU_at(rb) -
                           std::exp((N - 1) * (model.log_psi(ra) - lb)) * sol.dU_at(ra);
        const double rhsI = gauss_integrate(integrand, ra, rb, 16);
        const double res = std::abs(lhs - rhsI) / std::max(std::abs(sol.dU_at(rb)), 1e-30);
        sol.residual_checkpoints.emplace_back(rb, res);
        if (!(res <= 1e-6))
            throw VerificationError("solve_sublinear: flux-identity residual " +
                                    std::to_string(res) + " at r=" + std::to_string(rb));
    }
    return sol;
}

SandwichConstants verify_sandwich(const EllipticSolution& sol) {
    const GeometryProfile& prof = *sol.profile;
    const double m = sol.m;
    SandwichConstants c;
    c.kappa_m = (m - 1.0) * (m - 1.0) / (m * (m + 1.0));
    const double p = m / (m - 1.0);
    const double kp = std::pow(c.kappa_m, p);

    double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
    double worst_low = std::numeric_limits<double>::infinity();
    double worst_up = std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
        const double H = prof.H[i], U = sol.U[i];
        const double low = kp * std::pow(H, p);
        const double up = 1.0 + (m - 1.0) * H / m;
        const double mlow = (U - low) / std::max(U, 1e-300);
        const double mup = (up - std::pow(U, 1.0 / p)) / up;
        if (std::min(mlow, mup) < std::min(worst_low, worst_up)) worst = i;
        worst_low = std::min(worst_low, mlow);
        worst_up = std::min(worst_up, mup);
        const double ratio = U / std::pow(H + 1.0, p);
        c1 = std::min(c1, ratio);
        c2 = std::max(c2, ratio);
    }
    c.min_lower_margin = worst_low;
    c.min_upper_margin = worst_up;
    c.worst_node = worst;
    c.pass = worst_low >= -1e-12 && worst_up >= -1e-12;
    c.C1_meas = c1;
    c.C2_meas = c2;
    c.K1_meas = std::pow(std::min(c1, 1.0), 1.0 / m) * std::pow(2.0, -1.0 / (m * (m - 1.0)));
    c.K2_meas = std::pow(std::max(c2, 1.0), 1.0 / m);
    c.K1_sharp = std::pow(c1, 1.0 / m);
    c.window_short = prof.H.back() < 10.0;
    return c;
}

double sandwich_recurrence_error(double m, int n_max) {
    const double kappa = (m - 1.0) * (m - 1.0) / (m * (m + 1.0));
    auto Cn = [&](int n) { return std::pow(kappa, (m - std::pow(m, 1.0 - n)) / (m - 1.0)); };
    auto pn = [&](int n) { return m / (m - 1.0) - std::pow(m, -n) / (m - 1.0); };
    double err = 0.0;
    for (int n = 1; n < n_max; ++n) {
        err = std::max(err, std::abs(Cn(n + 1) - kappa * std::pow(Cn(n), 1.0 / m)));
        err = std::max(err, std::abs(pn(n + 1) - (pn(n) / m + 1.0)));
    }
    return err;
}

double SeparableProfile::UT_at(double r) const {
    const double fac = std::pow((m - 1.0) * T, -1.0 / (m - 1.0));
    return fac * spow(base.U_at(r), 1.0 / m);
}

double SeparableProfile::at(double r, double t) const {
    if (t >= T) throw std::domain_error("separable profile evaluated at or beyond blow-up time");
    return std::pow(1.0 - t / T, -1.0 / (m - 1.0)) * UT_at(r);
}

SeparableProfile make_separable(const GeometryProfile& profile, double m, double T, double alpha,
                                double residual_h) {
    if (!(T > 0.0) || !(alpha > 0.0))
        throw std::invalid_argument("make_separable: need T > 0 and alpha > 0");
    SeparableProfile sp;
    sp.T = T;
    sp.alpha = alpha;
    sp.m = m;
    const double U0 = std::pow((m - 1.0) * T, m / (m - 1.0)) * std::pow(alpha, m);
    sp.base = solve_sublinear(profile, m, U0);
    const double fac = std::pow((m - 1.0) * T, -1.0 / (m - 1.0));
    sp.UT.resize(profile.grid.size());
    for (std::size_t i = 0; i < sp.UT.size(); ++i) sp.UT[i] = fac * spow(sp.base.U[i], 1.0 / m);

    // FD cross-check of the elliptic identity on a uniform resampling:
    // Laplacian(UT^m) must equal UT/(T(m-1)) up to O(h^2).
    sp.residual_h = residual_h;
    const double R = profile.grid.rmax();
    const std::size_t n = static_cast<std::size_t>(std::floor(R / residual_h));
    std::vector<double> nodes(n + 1), U, dU;
    for (std::size_t j = 0; j <= n; ++j) nodes[j] = residual_h * static_cast<double>(j);
    integrate_profile(profile.model, profile.N, m, U0, nodes, U, dU);
    const double facm = std::pow(fac, m);
    double worst = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        const double h = residual_h;
        const double W0 = facm * U[j - 1], W1 = facm * U[j], W2 = facm * U[j + 1];
        const double drift = (profile.N - 1) * profile.model.dlog(nodes[j]);
        const double lap = (W2 - 2.0 * W1 + W0) / (h * h) + drift * (W2 - W0) / (2.0 * h);
        const double rhs = fac * spow(U[j], 1.0 / m) / (T * (m - 1.0));
        worst = std::max(worst, std::abs(lap - rhs) / std::abs(rhs));
    }
    sp.max_residual = worst;
    return sp;
}

double Supersolution::at(double r, double t) const {
    if (t >= T) throw std::domain_error("supersolution evaluated at or beyond its horizon");
    const double bt = std::pow(b, m / (m - 1.0));
    return std::pow(1.0 - t / T, -1.0 / (m - 1.0)) * (L / K1) *
           std::pow(base.U_at(r) + bt, 1.0 / m);
}

Supersolution build_supersolution(const GeometryProfile& profile, double m, double L, double b,
                                  const SandwichConstants& constants) {
    if (!(L > 0.0)) throw std::invalid_argument("build_supersolution: need L > 0");
    if (b < 0.0) throw std::invalid_argument("build_supersolution: need b >= 0");
    Supersolution s;
    s.m = m;
    s.L = L;
    s.b = b;
    s.K1 = constants.K1_meas;
    s.T = std::pow(s.K1, m - 1.0) / ((m - 1.0) * std::pow(L, m - 1.0));
    s.base = solve_sublinear(profile, m, 1.0);

    const double bt = std::pow(b, m / (m - 1.0));
    const double e = 1.0 / (m - 1.0);
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        const double lhs = (L / s.K1) * std::pow(s.base.U[i] + bt, 1.0 / m);
        const double rhs = L * std::pow(profile.H[i] + 1.0 + b, e);
        min_margin = std::min(min_margin, (lhs - rhs) / rhs);
    }
    s.min_domination_margin = min_margin;
    s.domination_ok = min_margin >= -1e-12;

    // Discrete supersolution inequality u_t >= Laplacian(u^m) on a uniform
    // resampling for t in [0, 0.9T].
    const double h = 2e-3;
    const double R = profile.grid.rmax();
    const std::size_t n = static_cast<std::size_t>(std::floor(R / h));
    std::vector<double> nodes(n + 1), U, dU;
    for (std::size_t j = 0; j <= n; ++j) nodes[j] = h * static_cast<double>(j);
    integrate_profile(profile.model, profile.N, m, 1.0, nodes, U, dU);
    double min_res = std::numeric_limits<double>::infinity();
    const double amp = L / s.K1;
    for (int k = 0; k <= 9; ++k) {
        const double t = 0.1 * k * s.T;
        const double tfac = std::pow(1.0 - t / s.T, -1.0 / (m - 1.0));
        const double tfacm = std::pow(tfac, m);
        for (std::size_t j = 1; j < n; ++j) {
            auto W = [&](std::size_t jj) {
                return tfacm * std::pow(amp, m) * (U[jj] + bt);
            };
            const double drift = (profile.N - 1) * profile.model.dlog(nodes[j]);
            const double lap = (W(j + 1) - 2.0 * W(j) + W(j - 1)) / (h * h) +
                               drift * (W(j + 1) - W(j - 1)) / (2.0 * h);
            const double ubar = tfac * amp * std::pow(U[j] + bt, 1.0 / m);
            const double ut = ubar / ((m - 1.0) * (s.T - t));
            min_res = std::min(min_res, (ut - lap) / std::abs(ut));
        }
    }
    s.min_residual_scaled = min_res;
    return s;
}

}  // namespace hpme
