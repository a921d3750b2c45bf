#pragma once
// The sublinear elliptic profile (Laplacian(U) = U^(1/m) with flat start at
// the origin), its two-sided growth bounds against powers of H, separable
// space-time profiles built from it, and the weighted-norm supersolution.

#include <memory>
#include <string>
#include <vector>

#include "hpme/geometry.hpp"

namespace hpme {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EllipticSolution {
    std::shared_ptr<const GeometryProfile> profile;
    double m = 2.0;
    double U0 = 1.0;
    std::vector<double> U, dU;  // samples on profile->grid
    // (r, residual) of the flux identity psi^(N-1) U' = integral of
    // psi^(N-1) U^(1/m), evaluated on trailing windows at checkpoint radii
    // with the weight normalized to its right endpoint (overflow-safe).
    std::vector<std::pair<double, double>> residual_checkpoints;

    double U_at(double r) const;
    double dU_at(double r) const;
};

// Integrates U'' + (N-1)(psi'/psi)U' = U^(1/m), U(0)=U0, U'(0)=0 with a
// two-term series start at r_eps = 1e-4.  Throws SolverError on step
// failure and VerificationError if the flux-identity residual exceeds 1e-6.
EllipticSolution solve_sublinear(const GeometryProfile& profile, double m, double U0);

struct SandwichConstants {
    double kappa_m = 0.0;  // (m-1)^2 / (m(m+1))
    double C1_meas = 0.0;  // min over nodes of U/(H+1)^(m/(m-1))
    double C2_meas = 0.0;  // max over nodes of U/(H+1)^(m/(m-1))
    double K1_meas = 0.0;  // b-uniform: min(C1,1)^(1/m) * 2^(-1/(m(m-1)))
    double K2_meas = 0.0;  // b-uniform: max(C2,1)^(1/m)
    // Sharp b=0 variant of K1; the existence-horizon estimate uses this.
    double K1_sharp = 0.0;

    bool pass = false;
    double min_lower_margin = 0.0;  // min of (U - kappa^p H^p), relative to U
    double min_upper_margin = 0.0;  // min of (1+(m-1)H/m - U^((m-1)/m)), relative
    std::size_t worst_node = 0;
    bool window_short = false;  // grid never reaches H >= 10 (slow-growth psi)
};

// Asserts kappa_m^(m/(m-1)) H^(m/(m-1)) <= U and U^((m-1)/m) <= 1+(m-1)H/m
// at every node (relative tolerance 1e-12) and returns the measured bound
// constants.  pass=false carries the offending node instead of throwing.
SandwichConstants verify_sandwich(const EllipticSolution& sol);

// Max deviation of the closed forms C_n = kappa^((m-m^(1-n))/(m-1)),
// p_n = m/(m-1) - m^(-n)/(m-1) from the recurrences C_{n+1}=kappa*C_n^(1/m),
// p_{n+1} = p_n/m + 1 for n <= n_max.
double sandwich_recurrence_error(double m, int n_max = 20);

struct SeparableProfile {
    double T = 1.0;
    double alpha = 1.0;
    double m = 2.0;
    std::vector<double> UT;  // [(m-1)T]^(-1/(m-1)) U^(1/m) on the grid
    EllipticSolution base;
    double max_residual = 0.0;  // relative elliptic residual (FD cross-check)
    double residual_h = 0.0;    // uniform resampling width used for the check

    double UT_at(double r) const;
    // Space-time separable solution (1 - t/T)^(-1/(m-1)) UT(r).
    double at(double r, double t) const;
};

// Separable profile with center value alpha and blow-up time T, via the
// elliptic solve with U(0) = [(m-1)T]^(m/(m-1)) alpha^m.  The elliptic
// residual Laplacian(UT^m) - UT/(T(m-1)) is cross-checked with a
// second-order finite-difference Laplacian on a uniform resampling.
SeparableProfile make_separable(const GeometryProfile& profile, double m, double T, double alpha,
                                double residual_h = 1e-3);

struct Supersolution {
    double m = 2.0, L = 1.0, b = 0.0;
    double K1 = 0.0;
    double T = 0.0;  // K1^(m-1) / ((m-1) L^(m-1))
    EllipticSolution base;
    bool domination_ok = false;     // at(r,0) >= L (H+1+b)^(1/(m-1)) nodewise
    double min_domination_margin = 0.0;
    double min_residual_scaled = 0.0;  // min of (u_t - FD Laplacian(u^m))/|u_t|

    // (1-t/T)^(-1/(m-1)) (L/K1) (U(r) + b^(m/(m-1)))^(1/m); t must be < T.
    double at(double r, double t) const;
};

Supersolution build_supersolution(const GeometryProfile& profile, double m, double L, double b,
                                  const SandwichConstants& constants);

}  // namespace hpme
