#include "hpme/barriers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "hpme/ode.hpp"

namespace hpme {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCmpTol = 1e-12;      // slack for exact-identity comparisons
constexpr double kMarginFloor = 1e-9;  // certificate margins below this fail

std::vector<std::size_t> window_nodes(const GeometryProfile& profile, double lo, double hi) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        const double r = profile.grid.nodes[i];
        if (r >= lo - 1e-12 && r <= hi + 1e-12) idx.push_back(i);
    }
    return idx;
}

// H and H' on an explicit ascending list of radii, integrated from the
// r = 0 series start exactly as the profile builder does.  Used for the
// fine uniform lines behind the finite-difference cross-checks, which must
// not inherit interpolation kinks from the coarse profile grid.
struct HLine {
    std::vector<double> r, H, g;
};

HLine integrate_H_line(const ModelFunction& model, int N, std::vector<double> radii) {
    HLine line;
    line.H.resize(radii.size());
    line.g.resize(radii.size());

    const double r_eps = 1e-4;
    const double p3 = model.d3psi0 / 6.0;
    const double a3 = -2.0 * (N - 1) * p3 / (static_cast<double>(N) * (N + 2));
    auto series_g = [&](double r) { return r / N + a3 * r * r * r; };
    auto series_H = [&](double r) { return r * r / (2.0 * N) + a3 * r * r * r * r / 4.0; };
    auto rhs = [&](double r, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        dy[0] = y[1];
        dy[1] = 1.0 - (N - 1) * model.dlog(r) * y[1];
    };

    double t = r_eps;
    std::array<double, 2> y{series_H(r_eps), series_g(r_eps)};
    double dt_hint = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        if (r <= r_eps) {
            line.H[i] = series_H(r);
            line.g[i] = series_g(r);
        } else {
            integrate_to<2>(rhs, t, y, r, 1e-12, 1e-14, &dt_hint);
            line.H[i] = y[0];
            line.g[i] = y[1];
        }
    }
    line.r = std::move(radii);
    return line;
}

// Closed-form Laplacian of w = H' H^(-alpha) psi^(1-N), divided by w/H':
//   H^alpha psi^(N-1) lap_w = 2H''' - 4a H'H''/H + a H'/H + a(a+1) H'^3/H^2.
// This is an identity in H alone: expanding lap_w and eliminating the drift
// through H'' = 1 - (N-1)(psi'/psi) H' removes every explicit psi term.
double lap_w_bracket(double alpha, double H, double g, double Hpp, double Hppp) {
    return 2.0 * Hppp - 4.0 * alpha * g * Hpp / H + alpha * g / H +
           alpha * (alpha + 1.0) * g * g * g / (H * H);
}

}  // namespace

HypothesisReport check_H_hypothesis(const GeometryProfile& profile, double r0, double Rmax) {
    if (!(r0 > 0.0) || !(Rmax > r0))
        throw std::invalid_argument("check_H_hypothesis: need 0 < r0 < Rmax");
    if (Rmax > profile.grid.rmax() + 1e-9)
        throw std::invalid_argument("check_H_hypothesis: window extends past the profile grid");

    HypothesisReport rep;
    rep.r0 = r0;
    rep.Rmax = Rmax;
    const auto idx = window_nodes(profile, r0, Rmax);
    if (idx.size() < 2)
        throw std::invalid_argument("check_H_hypothesis: window holds fewer than two grid nodes");

    double K = 0.0;
    bool numeric_ok = true;
    for (std::size_t i : idx) {
        const double g = profile.dH[i];
        if (!(g > 0.0) || !std::isfinite(profile.dddH[i]) || !(profile.H[i] > 0.0)) {
            numeric_ok = false;
            continue;
        }
        K = std::max(K, profile.dddH[i] * profile.H[i] / g);
    }
    rep.K_meas = std::max(0.0, K);
    rep.holds = numeric_ok && std::isfinite(rep.K_meas);

    const double s2 = std::sqrt(2.0);
    rep.K_hat = s2 + 2.0 * rep.K_meas * std::log((1.0 + s2) / s2);

    double m_dd = kInf;
    for (std::size_t i : idx) m_dd = std::min(m_dd, rep.K_hat + profile.ddH[i]);
    rep.ddH_bound_margin = m_dd;
    rep.ddH_bound_ok = m_dd >= -kCmpTol;

    // Doubling consequence sqrt(H(r + sqrt H)) <= (1+sqrt 2)/sqrt 2 sqrt(H),
    // checked wherever the shifted radius stays inside the sampled range.
    const double chain_factor = (1.0 + s2) / s2;
    double m_ch = kInf;
    bool any = false;
    for (std::size_t i : idx) {
        const double h = profile.H[i];
        if (!(h > 0.0)) continue;
        const double shifted = profile.grid.nodes[i] + std::sqrt(h);
        if (shifted > profile.grid.rmax()) continue;
        any = true;
        m_ch = std::min(m_ch, chain_factor * std::sqrt(h) - std::sqrt(profile.H_at(shifted)));
    }
    rep.chain_margin = any ? m_ch : 0.0;
    rep.chain_ok = !any || m_ch >= -kCmpTol;
    return rep;
}

BarrierW build_barrier_w(const GeometryProfile& profile, double alpha, double r0) {
    if (!(alpha > 0.0)) throw std::invalid_argument("build_barrier_w: alpha must be > 0");
    const double Rmax = profile.grid.rmax();
    if (!(r0 > 0.0) || !(r0 < Rmax))
        throw std::invalid_argument("build_barrier_w: need 0 < r0 < grid rmax");

    BarrierW b;
    b.alpha = alpha;
    b.r0 = r0;
    b.Rmax = Rmax;

    const HypothesisReport hyp = check_H_hypothesis(profile, r0, Rmax);
    if (!hyp.holds)
        throw VerificationError("build_barrier_w: derivative hypothesis fails on [r0, Rmax]");
    b.K = hyp.K_meas;
    b.K_hat = hyp.K_hat;
    b.C_required = 2.0 * b.K + 2.0 * alpha * (alpha + 1.0) + alpha + 4.0 * alpha * b.K_hat;
    const double H0 = profile.H_at(r0);
    if (!(H0 > 0.0)) throw VerificationError("build_barrier_w: H(r0) must be positive");
    b.kappa = 2.0 * (b.C_required + b.C_required / H0);

    const int N = profile.N;
    const auto idx = window_nodes(profile, r0, Rmax);
    double min_margin = kInf;
    std::size_t argmin = idx.front();
    bool monotone = true;
    bool drift_ok = true;
    double log_w_hi = -kInf;  // log w at the outermost window node
    for (std::size_t i : idx) {
        const double r = profile.grid.nodes[i];
        const double H = profile.H[i], g = profile.dH[i];
        const double bracket = lap_w_bracket(alpha, H, g, profile.ddH[i], profile.dddH[i]);
        const double margin = b.C_required * g / H - bracket;
        if (margin < min_margin) {
            min_margin = margin;
            argmin = i;
        }
        const double log_w = std::log(g) - alpha * std::log(H) - (N - 1) * profile.log_psi[i];
        const double wv = std::exp(log_w);  // may underflow to 0 at far radii
        const double dlog = profile.model.dlog(r);
        const double wp_ratio = profile.ddH[i] / g - alpha * g / H - (N - 1) * dlog;
        b.window_r.push_back(r);
        b.w.push_back(wv);
        b.wp.push_back(wv * wp_ratio);
        b.lap_w.push_back(wv * bracket / g);
        if (!(wp_ratio < 0.0)) monotone = false;
        if (!((N - 1) * dlog * g >= 0.5 - kCmpTol)) drift_ok = false;
        log_w_hi = log_w;
    }
    b.min_margin = min_margin;
    b.argmin_node = argmin;
    b.pass = min_margin > kMarginFloor;
    b.monotone_ok = monotone;
    b.drift_bound_ok = drift_ok;

    // Fine uniform line for the finite-difference cross-check of the closed
    // Laplacian and for the capped/mollified extension z.  The line stops
    // where w leaves representable range (w decays like psi^(1-N)).
    const double delta = 2e-3;
    double z_hi = Rmax;
    if (log_w_hi < std::log(1e-270)) {
        for (std::size_t j = 1; j < idx.size(); ++j) {
            const std::size_t i = idx[j];
            const double lw = std::log(profile.dH[i]) - alpha * std::log(profile.H[i]) -
                              (N - 1) * profile.log_psi[i];
            if (lw < std::log(1e-270)) {
                z_hi = profile.grid.nodes[idx[j - 1]];
                break;
            }
        }
    }
    const double eps = 0.05;  // mollifier half-width (bump support 0.1)
    const int Kc = static_cast<int>(std::lround(eps / delta));
    const double z_lo = std::max(0.2, r0 - 0.6);
    const long j0 = std::lround((r0 - z_lo) / delta);
    const long j_end = std::lround((z_hi - r0) / delta);
    std::vector<double> radii;
    radii.reserve(static_cast<std::size_t>(j0 + j_end + 1));
    for (long j = -j0; j <= j_end; ++j) radii.push_back(r0 + static_cast<double>(j) * delta);
    const HLine fine = integrate_H_line(profile.model, N, radii);

    const std::size_t n = fine.r.size();
    std::vector<double> wf(n), Hf(n);
    for (std::size_t j = 0; j < n; ++j) {
        Hf[j] = fine.H[j];
        wf[j] = std::exp(std::log(fine.g[j]) - alpha * std::log(fine.H[j]) -
                         (N - 1) * profile.model.log_psi(fine.r[j]));
    }

    // Cross-check: centered finite differences of w against the closed form,
    // on interior fine nodes where w is comfortably representable.
    double worst_fd = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        if (fine.r[j] < r0 || wf[j] < 1e-250) continue;
        const double drift = (N - 1) * profile.model.dlog(fine.r[j]);
        const double fd = (wf[j + 1] - 2.0 * wf[j] + wf[j - 1]) / (delta * delta) +
                          drift * (wf[j + 1] - wf[j - 1]) / (2.0 * delta);
        const double Hpp = 1.0 - drift * fine.g[j];
        const double dl = profile.model.dlog(fine.r[j]);
        const double dlp = profile.model.ratio2(fine.r[j]) - dl * dl;
        const double Hppp = -(N - 1) * (dlp * fine.g[j] + dl * Hpp);
        const double closed =
            wf[j] * lap_w_bracket(alpha, fine.H[j], fine.g[j], Hpp, Hppp) / fine.g[j];
        const double rel = std::abs(fd - closed) /
                           (std::abs(closed) + wf[j] * fine.g[j] / fine.H[j] + 1e-300);
        worst_fd = std::max(worst_fd, rel);
    }
    b.fd_crosscheck = worst_fd;

    // Capped extension: zcap = w(max(r, r0)), mollified by a discrete bump
    // kernel so z is a positive moving average of zcap on the fine line.
    // Certificate: lap z <= kappa z/(H+1), finite differences, per unit z.
    std::vector<double> kernel(static_cast<std::size_t>(2 * Kc + 1));
    double ksum = 0.0;
    for (int k = -Kc; k <= Kc; ++k) {
        const double s = static_cast<double>(k) / Kc;
        const double v = std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
        kernel[static_cast<std::size_t>(k + Kc)] = v;
        ksum += v;
    }
    for (double& v : kernel) v /= ksum;

    const double w_r0 = wf[static_cast<std::size_t>(j0)];
    auto zcap = [&](long j) {
        if (j <= j0) return w_r0;
        return wf[static_cast<std::size_t>(j)];
    };
    const long chk_lo = std::max<long>(Kc + 1, j0 - std::lround(0.5 / delta));
    const long chk_hi = static_cast<long>(n) - 2 - Kc;
    std::vector<double> z(n, 0.0);
    for (long j = chk_lo - 1; j <= chk_hi + 1; ++j) {
        double acc = 0.0;
        for (int k = -Kc; k <= Kc; ++k)
            acc += kernel[static_cast<std::size_t>(k + Kc)] * zcap(j - k);
        z[static_cast<std::size_t>(j)] = acc;
    }
    double z_min = kInf;
    for (long j = chk_lo; j <= chk_hi; ++j) {
        const std::size_t u = static_cast<std::size_t>(j);
        const double drift = (N - 1) * profile.model.dlog(fine.r[u]);
        const double lap = (z[u + 1] - 2.0 * z[u] + z[u - 1]) / (delta * delta) +
                           drift * (z[u + 1] - z[u - 1]) / (2.0 * delta);
        z_min = std::min(z_min, b.kappa / (Hf[u] + 1.0) - lap / z[u]);
    }
    b.z_min_margin = z_min;
    b.z_pass = z_min > kMarginFloor;
    return b;
}

BWeight compute_B(const GeometryProfile& profile) {
    BWeight out;
    out.B.resize(profile.grid.size());
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        const double r = profile.grid.nodes[i];
        if (r < 2.0) {
            out.B[i] = 1.0;
            continue;
        }
        const double lp = profile.log_psi[i];
        if (!(lp > 0.0)) out.flagged_nonpositive_log = true;
        const double inv = 1.0 / profile.model.dlog(r);  // psi/psi'
        out.B[i] = inv * inv * lp;
    }
    return out;
}

double B_value(const ModelFunction& model, double r) {
    if (r < 2.0) return 1.0;
    const double inv = 1.0 / model.dlog(r);
    return inv * inv * model.log_psi(r);
}

LogConditionReport check_log_condition(const ModelFunction& model, double l, double Rmax) {
    if (!(l > 0.0)) throw std::invalid_argument("check_log_condition: l must be > 0");
    if (!(Rmax >= 3.0)) throw std::invalid_argument("check_log_condition: Rmax must be >= 3");
    LogConditionReport rep;
    rep.l = l;
    const double step = 0.005;
    const long steps = std::lround(std::ceil((Rmax - 3.0) / step));
    double sup = -kInf, arg = 3.0;
    for (long k = 0; k <= steps; ++k) {
        const double r = std::min(3.0 + static_cast<double>(k) * step, Rmax);
        const double denom = model.log_psi(r - 1.0);
        if (!(denom > 0.0)) {  // psi(r-1) <= 1: the doubling quotient degenerates
            rep.sup_ratio = kInf;
            rep.arg_sup = r;
            rep.holds = false;
            return rep;
        }
        const double ratio = model.log_psi(r) / denom;
        if (ratio > sup) {
            sup = ratio;
            arg = r;
        }
    }
    rep.sup_ratio = sup;
    rep.arg_sup = arg;
    rep.holds = sup <= l + kCmpTol;
    return rep;
}

BackwardBarrier build_backward_barrier(const GeometryProfile& profile, double K, double T,
                                       double C2, double R0, double Rmax, double l, double m) {
    if (!(K > 0.0) || !(T > 0.0) || !(C2 > 0.0))
        throw std::invalid_argument("build_backward_barrier: K, T, C2 must be > 0");
    if (!(R0 > 0.0) || !(Rmax > R0))
        throw std::invalid_argument("build_backward_barrier: need 0 < R0 < Rmax");
    if (Rmax > profile.grid.rmax() + 1e-9)
        throw std::invalid_argument("build_backward_barrier: window extends past the profile grid");
    if (!(m > 1.0)) throw std::invalid_argument("build_backward_barrier: m must be > 1");

    BackwardBarrier bb;
    bb.K = K;
    bb.T = T;
    bb.C2 = C2;
    bb.R0 = R0;
    bb.Rmax = Rmax;
    bb.constraint_margin = 1.0 / C2 - (2.0 * T + K);
    bb.constraint_ok = bb.constraint_margin >= -kCmpTol;

    const double theta_R0 = profile.model.log_psi(R0);
    const double log_lambda = K * theta_R0 / T;
    bb.lambda = std::exp(std::min(log_lambda, 709.0));
    bb.boundary_calibration_ok = theta_R0 > 0.0;  // then eta(R0,t) = e^{K theta (1/T - 1/(2T-t))} >= 1

    // Certificate eta_t + C2 B lap_upper(eta) <= 0.  With theta = log psi and
    // lap(theta) >= -(psi'/psi)^2, both sides carry the common positive factor
    // eta K/(2T-t)^2, leaving the scaled margin
    //   theta - C2 B theta'^2 (K + 2T - t) >= 0,
    // reported per unit theta so windows with huge log psi stay comparable.
    const auto idx = window_nodes(profile, R0, Rmax);
    if (idx.size() < 2)
        throw std::invalid_argument("build_backward_barrier: window holds fewer than two nodes");
    double min_scaled = kInf, min_raw = kInf;
    double worst_r = R0, worst_t = 0.0;
    bool theta_ok = true;
    for (std::size_t i : idx) {
        const double r = profile.grid.nodes[i];
        const double theta = profile.log_psi[i];
        if (!(theta > 0.0)) {
            theta_ok = false;
            continue;
        }
        const double dtheta = profile.model.dlog(r);
        const double Bv = B_value(profile.model, r);
        for (int k = 0; k <= 8; ++k) {
            const double t = T * static_cast<double>(k) / 8.0;
            const double tau = 2.0 * T - t;
            const double scaled = 1.0 - C2 * Bv * dtheta * dtheta * (K + tau) / theta;
            if (scaled < min_scaled) {
                min_scaled = scaled;
                worst_r = r;
                worst_t = t;
            }
            const double log_eta = log_lambda - K * theta / tau;
            if (log_eta >= -700.0 && log_eta <= 700.0) {
                const double eta = std::exp(log_eta);
                const double raw = eta * K / (tau * tau) *
                                   (theta - C2 * Bv * dtheta * dtheta * (K + tau));
                min_raw = std::min(min_raw, raw);
            }
        }
    }
    bb.min_margin = theta_ok ? min_scaled : -kInf;
    bb.min_margin_eta_units = std::isfinite(min_raw) ? min_raw : 0.0;
    bb.worst_r = worst_r;
    bb.worst_t = worst_t;
    bb.cert_pass = theta_ok && min_scaled > kMarginFloor;
    bb.horizon_bound =
        (m - 1.0) * K / (2.0 * l * ((profile.N - 1) * (m - 1.0) + 2.0 * m));
    return bb;
}

PhiPerturbation build_phi_perturbation(double C0, double kappa, double K, double r0_window,
                                       PhiOptions opts) {
    if (!(C0 > 0.0)) throw std::invalid_argument("build_phi_perturbation: C0 must be > 0");
    if (!(K > 0.0)) throw std::invalid_argument("build_phi_perturbation: K must be > 0");
    if (!(kappa > K / C0))
        throw std::invalid_argument("build_phi_perturbation: need kappa > K/C0");
    if (opts.N < 2) throw std::invalid_argument("build_phi_perturbation: N must be >= 2");

    // Tail A e^{C0 r^2/2}/(log r)^kappa + B, matched C^1 to phi = r at R0:
    //   A f(R0) = R0 - B,  A f'(R0) = 1  =>  den := f'(R0)/f(R0) applied to
    //   the matching gives A f(R0) = 1/den with den = C0 R0 - kappa/(R0 log R0).
    double R0 = opts.R0;
    auto den_at = [&](double r) { return C0 * r - kappa / (r * std::log(r)); };
    if (!(R0 > 1.0) || !(den_at(R0) > 0.0)) {
        double cand = std::max(R0, 1.25);
        while (cand <= 6.0 && !(den_at(cand) > 0.0)) cand += 0.25;
        if (!(den_at(cand) > 0.0))
            throw ConstructionError("build_phi_perturbation: no matching radius with f'/f > 0");
        R0 = cand;
    }
    const double den = den_at(R0);
    const double A = std::pow(std::log(R0), kappa) * std::exp(-C0 * R0 * R0 / 2.0) / den;
    const double B = R0 - 1.0 / den;
    if (!(A > 0.0) || !std::isfinite(B))
        throw ConstructionError("build_phi_perturbation: degenerate matching constants");

    PhiPerturbation out;
    out.A = A;
    out.B = B;
    out.R0 = R0;
    out.C0 = C0;
    out.kappa = kappa;
    out.K = K;
    out.K_pert = opts.K_pert > 0.0 ? opts.K_pert : 2.0 * kappa;

    const double logA = std::log(A);
    auto log_Af = [logA, C0, kappa](double r) {
        return logA + C0 * r * r / 2.0 - kappa * std::log(std::log(r));
    };
    auto g1 = [C0, kappa](double r) { return C0 * r - kappa / (r * std::log(r)); };
    auto g1p = [C0, kappa](double r) {
        const double lr = std::log(r);
        return C0 + kappa * (lr + 1.0) / (r * lr * r * lr);
    };
    // Af/(Af+B) without forming Af, which overflows near r ~ sqrt(1400/C0).
    auto shape = [B, log_Af](double r) { return 1.0 / (1.0 + B * std::exp(-log_Af(r))); };

    ModelFunction phi;
    phi.kind = ModelKind::custom;
    phi.name = "phi-perturbation";
    phi.params = {{"C0", C0}, {"kappa", kappa}, {"K", K}, {"A", A}, {"B", B}, {"R0", R0}};
    phi.d3psi0 = 0.0;
    phi.has_splice = true;
    phi.splice_r = R0;
    phi.psi_fn = [R0, B, log_Af](double r) {
        if (r < R0) return r;
        return std::exp(log_Af(r)) + B;
    };
    phi.dpsi_fn = [R0, g1, log_Af](double r) {
        if (r < R0) return 1.0;
        return g1(r) * std::exp(log_Af(r));
    };
    phi.ddpsi_fn = [R0, g1, g1p, log_Af](double r) {
        if (r < R0) return 0.0;
        const double q = g1(r);
        return (g1p(r) + q * q) * std::exp(log_Af(r));
    };
    phi.log_psi_fn = [R0, B, log_Af](double r) {
        if (r < R0) return std::log(r);
        const double la = log_Af(r);
        return la + std::log1p(B * std::exp(-la));
    };
    phi.dlog_fn = [R0, g1, shape](double r) {
        if (r < R0) return 1.0 / r;
        return g1(r) * shape(r);
    };
    phi.ratio2_fn = [R0, g1, g1p, shape](double r) {
        if (r < R0) return 0.0;
        const double q = g1(r);
        return (g1p(r) + q * q) * shape(r);
    };
    phi.ddpsi_jump = phi.ddpsi_fn(R0);

    // Curvature certificate: phi''/phi <= C0 (1 + C0 r^2) - K/log r on
    // (R0, Rmax], on a fine grid.
    {
        const double step = 5e-3;
        double min_margin = kInf;
        for (double r = R0 + 1e-6; r <= opts.Rmax + 1e-12; r += step) {
            const double target = C0 * (1.0 + C0 * r * r) - K / std::log(r);
            min_margin = std::min(min_margin, target - phi.ratio2_fn(r));
        }
        out.curv_min_margin = min_margin;
        out.curv_pass = min_margin > kMarginFloor;
    }

    // Drift-perturbation certificate against the quadratic-splice psi with
    // the same C0:  phi'/phi >= psi'/psi - K_pert H'/H on [r0_window, Rmax].
    {
        if (!(r0_window > R0) || !(opts.Rmax > r0_window))
            throw std::invalid_argument(
                "build_phi_perturbation: need R0 < r0_window < Rmax for the drift window");
        const ModelFunction psi = splice_quadratic_psi(C0);
        const double step = 0.01;
        const long count = std::lround(std::ceil((opts.Rmax - r0_window) / step));
        std::vector<double> radii;
        radii.reserve(static_cast<std::size_t>(count) + 1);
        for (long k = 0; k <= count; ++k)
            radii.push_back(std::min(r0_window + static_cast<double>(k) * step, opts.Rmax));
        const HLine line = integrate_H_line(psi, opts.N, radii);
        double min_margin = kInf, needed = 0.0;
        for (std::size_t j = 0; j < line.r.size(); ++j) {
            const double r = line.r[j];
            const double gap = psi.dlog(r) - phi.dlog_fn(r);
            const double gH = line.g[j] / line.H[j];
            min_margin = std::min(min_margin, out.K_pert * gH - gap);
            needed = std::max(needed, gap / gH);
        }
        out.pert_min_margin = min_margin;
        out.pert_needed_K = needed;
        out.pert_pass = min_margin > kMarginFloor;
    }
    out.phi = std::move(phi);
    return out;
}

}  // namespace hpme
