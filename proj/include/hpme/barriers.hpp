#pragma once
// Numerical certification of the comparison barriers: the H-derivative
// hypothesis and its -H'' consequence, the decaying barrier w = H' H^(-a)
// psi^(1-N) with its capped/mollified extension z, the growth weight
// B = (psi/psi')^2 log psi, the log-doubling condition on psi, the backward
// space-time barrier eta, and the perturbed model function phi.

#include <string>
#include <vector>

#include "hpme/elliptic.hpp"
#include "hpme/geometry.hpp"

namespace hpme {

struct HypothesisReport {
    double r0 = 0.0, Rmax = 0.0;
    double K_meas = 0.0;  // sup over [r0,Rmax] of H''' H / H', clamped at 0
    double K_hat = 0.0;   // sqrt(2) + 2 K ln((1+sqrt(2))/sqrt(2))
    bool holds = false;   // H''' <= K_meas H'/H + tol on the window
    // Independent consequence checks on the window:
    bool ddH_bound_ok = false;    // -H'' <= K_hat + tol
    double ddH_bound_margin = 0.0;
    bool chain_ok = false;        // sqrt(H(r+sqrt(H))) <= (1+sqrt 2)/sqrt 2 * sqrt(H)
    double chain_margin = 0.0;
};

HypothesisReport check_H_hypothesis(const GeometryProfile& profile, double r0, double Rmax);

struct BarrierW {
    double alpha = 0.0, r0 = 0.0, Rmax = 0.0;
    double K = 0.0, K_hat = 0.0;
    double C_required = 0.0;  // 2K + 2a(a+1) + a + 4a K_hat
    double kappa = 0.0;       // 2 (C + C/H(r0)), certifies the capped extension z
    std::vector<double> window_r, w, wp, lap_w;  // samples on window nodes
    bool pass = false;
    // min over the window of (C H'/H - H^alpha psi^(N-1) lap_w); the
    // certificate lap_w <= C w/H normalized per unit w/H', so it stays
    // meaningful where w itself underflows.
    double min_margin = 0.0;
    std::size_t argmin_node = 0;
    bool monotone_ok = false;     // w' < 0 on the window
    bool drift_bound_ok = false;  // (N-1)(psi'/psi) H' >= 1/2 on the window
    double fd_crosscheck = 0.0;   // max |lap_w(formula) - lap_w(FD)| on safe nodes
    bool z_pass = false;          // mollified capped extension: lap z <= kappa z/(H+1)
    double z_min_margin = 0.0;
};

// Certifies Laplacian(w) <= C w / H nodewise on [r0, Rmax] via the closed
// Laplacian formula, cross-checked against finite differences; also
// certifies the capped extension z (constant inside r0, mollified with a
// bump of width 0.1) against Laplacian(z) <= kappa z/(H+1).
BarrierW build_barrier_w(const GeometryProfile& profile, double alpha, double r0);

// Growth weight samples on the profile grid: 1 on [0,2), (psi/psi')^2 log psi
// for r >= 2.  flagged_nonpositive_log reports psi <= 1 somewhere on [2,Rmax].
struct BWeight {
    std::vector<double> B;
    bool flagged_nonpositive_log = false;
};
BWeight compute_B(const GeometryProfile& profile);
double B_value(const ModelFunction& model, double r);

struct LogConditionReport {
    bool holds = false;
    double l = 0.0;
    double sup_ratio = 0.0;  // sup over [3,Rmax] of log psi(r) / log psi(r-1)
    double arg_sup = 0.0;
};
// Checks log psi(r) <= l log psi(r-1) on a fine grid of [3, Rmax].
LogConditionReport check_log_condition(const ModelFunction& model, double l, double Rmax);

struct BackwardBarrier {
    double lambda = 0.0, K = 0.0, T = 0.0, C2 = 0.0;
    double R0 = 0.0, Rmax = 0.0;
    double constraint_margin = 0.0;  // 1/C2 - (2T + K); must be >= 0
    bool constraint_ok = false;
    bool cert_pass = false;  // eta_t + C2 B Delta_upper(eta) <= 0 on the window
    double min_margin = 0.0;          // scaled certificate margin (theta units)
    double min_margin_eta_units = 0.0;  // raw margin where eta is representable
    double worst_r = 0.0, worst_t = 0.0;
    bool boundary_calibration_ok = false;  // eta(R0, t) >= 1 for t in [0, T]
    double horizon_bound = 0.0;  // (m-1)K / (2 l ((N-1)(m-1) + 2m))
};

// Certifies the backward barrier eta = lambda exp(-K log(psi)/(2T-t)) with
// diffusion cap a = C2 * B on [R0, Rmax] x [0, T].  The Laplacian of eta is
// bounded from above using Delta(log psi) >= -(psi'/psi)^2.  A violated
// 2T + K <= 1/C2 constraint is reported (cert evaluated regardless), never
// silently repaired.
BackwardBarrier build_backward_barrier(const GeometryProfile& profile, double K, double T,
                                       double C2, double R0, double Rmax, double l = 1.6,
                                       double m = 2.0);

struct PhiOptions {
    double K_pert = -1.0;  // perturbation-certificate constant; default 2*kappa
    double R0 = 2.0;       // splice radius: linear inside, exponential tail outside
    double Rmax = 100.0;
    int N = 2;             // dimension for the H-profile in the perturbation check
};

struct PhiPerturbation {
    ModelFunction phi;
    double A = 0.0, B = 0.0, R0 = 0.0;
    double C0 = 0.0, kappa = 0.0, K = 0.0, K_pert = 0.0;
    bool curv_pass = false;  // phi''/phi <= C0 (1 + C0 r^2) - K/log r on (R0, Rmax]
    double curv_min_margin = 0.0;
    bool pert_pass = false;  // phi'/phi >= psi'/psi - K_pert H'/H on [r0, Rmax]
    double pert_min_margin = 0.0;
    double pert_needed_K = 0.0;  // sup of (psi'/psi - phi'/phi) H/H' on the window
};

// Builds phi = r on [0, R0), A e^(C0 r^2/2)/(log r)^kappa + B on [R0, inf)
// with C^1 matching, and certifies its curvature bound and the drift
// perturbation against the quadratic-splice psi with the same C0.
PhiPerturbation build_phi_perturbation(double C0, double kappa, double K, double r0_window,
                                       PhiOptions opts = {});

}  // namespace hpme
