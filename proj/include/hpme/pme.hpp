#pragma once
// Conservative implicit finite-volume solver for the weighted porous medium
// equation u_t = psi^(1-N) (psi^(N-1) (u^m)')' on a ball [0, R] with a
// Dirichlet condition at R and a symmetry (zero-flux) condition at r = 0,
// plus the experiment harnesses built on top of it: nested-ball truncation
// runs, blow-up tracking against separable solutions, discrete comparison,
// and uniqueness probes under grid/domain refinement.

#include <functional>
#include <string>
#include <vector>

#include "hpme/elliptic.hpp"
#include "hpme/geometry.hpp"

namespace hpme {

struct PMEConfig {
    ModelFunction model;
    int N = 2;
    double m = 2.0;
    double R = 10.0;

    // Time-step policy.
    double dt_init = 1e-4;
    double dt_growth = 1.15;   // per accepted step in adaptive mode
    double dt_floor = 1e-14;   // halving floor before a step counts as failed
    bool fixed_dt = false;     // fixed-dt runs treat Newton failure as an error
    int newton_max_iter = 40;
    double newton_tol = 1e-12;  // scaled residual tolerance (must be <= 1e-10)

    double boundary_value = 0.0;  // constant Dirichlet trace (unless a
                                  // time-dependent one is passed to the run)
    double blowup_threshold = 1e8;

    void validate() const;
};

struct StepDiagnostics {
    int newton_iters = 0;
    double residual = 0.0;      // final scaled Newton residual
    double mass_balance = 0.0;  // |mass change - boundary flux * dt|, scaled
    double dt = 0.0;
    bool blowup_signal = false;
};

struct PMEState {
    double t = 0.0;
    std::vector<double> u;  // node values, u.back() = Dirichlet trace
    StepDiagnostics diag;
};

// One ball problem: grid, face transmissibilities and cell measures are
// fixed at construction; step() is the implicit Euler update solved by
// damped Newton on the tridiagonal nonlinear system.
class PMESolver {
  public:
    PMESolver(PMEConfig config, RadialGrid grid);

    const PMEConfig& config() const { return cfg_; }
    const RadialGrid& grid() const { return grid_; }

    // Attempts one implicit step to t_new = t_old + dt with the given
    // boundary trace; returns false on Newton failure (u untouched then).
    bool try_step(std::vector<double>& u, double dt, double boundary,
                  StepDiagnostics& diag) const;

    // Implicit step with halving retry (adaptive mode); throws SolverError
    // in fixed-dt mode or below the dt floor.
    PMEState step(const PMEState& state, double dt) const;

    double mass(const std::vector<double>& u) const;  // sum w_i u_i

  private:
    PMEConfig cfg_;
    RadialGrid grid_;
    std::vector<double> kf_;  // face transmissibility psi(face)^(N-1)/dr
    double residual_and_scale(const std::vector<double>& un, const std::vector<double>& uo,
                              double dt, const std::vector<double>& scale,
                              std::vector<double>& res) const;
    friend struct PMEStepAccess;
};

struct Trajectory {
    std::vector<PMEState> snapshots;  // one per requested snapshot time
    PMEState final_state;
    bool blew_up = false;
    bool completed = false;  // reached t_end without blow-up
    double t_last = 0.0;
    long steps = 0;
    double max_mass_balance = 0.0;  // worst per-step mass-balance residual
};

struct RunControl {
    std::vector<double> snapshot_times;
    std::function<double(double)> boundary;  // overrides config constant
    double blowup_time_hint = 0.0;           // >0: cap dt <= cap_frac*(hint - t)
    double blowup_cap_frac = 0.005;
};

// Marches state from u0 at t=0 to t_end (or blow-up); snapshots at the
// requested times are hit exactly by clipping dt.
Trajectory solve_dirichlet_ball(const PMEConfig& config, const RadialGrid& grid,
                                const std::vector<double>& u0, double t_end,
                                const RunControl& control = {});

// ---------------------------------------------------------------------------
// Experiment harnesses.

struct TruncationSchedule {
    std::vector<double> radii;     // nested ball radii, ascending
    std::vector<double> i_levels;  // positive-part truncation heights, ascending
    std::vector<double> j_levels;  // negative-part truncation heights, ascending
    double t_end = 0.4;
    double dt = 1e-3;          // shared fixed step so runs are comparable
    double inner_window = 3.0; // stabilization window radius
    double drmax = 0.04;       // master-grid spacing cap
    double order_tol = 1e-9;   // allowed discrete-ordering violation
};

struct TruncationReport {
    bool orderings_ok = false;
    double worst_i_violation = 0.0;  // max of (u_{i} - u_{i+1})_+ over pairs
    double worst_j_violation = 0.0;  // max of (u_{j+1} - u_{j})_+ over pairs
    double worst_n_violation = 0.0;  // max of (u_n - u_{n+1})_+ on shared nodes
    std::vector<double> n_diffs;     // successive inner-window sup differences
    std::vector<double> n_ratios;
    bool stabilizing = false;        // every ratio <= 0.5
    std::string note;
};

// Solves the family of Dirichlet problems over nested balls with data
// min(u0^+, i) - min(u0^-, j) and boundary value -||min(u0^-, j)||_inf
// (taken over the largest ball so every run shares one trace), then checks
// the discrete orderings in i, j, n and the stabilization of the n-limit.
// Ball grids are prefixes of one master grid, so shared nodes coincide.
TruncationReport run_truncation_scheme(const PMEConfig& config,
                                       const std::function<double(double)>& u0,
                                       const TruncationSchedule& schedule);

struct BlowupReport {
    std::vector<double> times;          // accepted step times
    std::vector<double> sup_norm;       // max |u| per accepted step
    std::vector<double> weighted_norm;  // ||u||_{inf,b} at snapshot times
    double b = 1.0;                     // weight offset used above
    double T_fit = 0.0;                 // root of the affine fit of M(t)^{-(m-1)}
    double fit_residual = 0.0;          // max relative deviation from the fit
    double tracking_error = 0.0;        // max rel error vs separable on r <= R/2
    double t_last = 0.0;
    bool blew_up = false;
};

// Runs the PME from the separable profile U_{T,alpha} with the exact
// separable trace at r = R, tracks the solution against
// (1-t/T)^{-1/(m-1)} U_{T,alpha} on the inner half-ball, and fits the
// blow-up time from the sup-norm trajectory (M(t)^{-(m-1)} is affine in t
// for separable solutions).
BlowupReport run_blowup_experiment(const GeometryProfile& profile, double m, double T,
                                   double alpha, double R, double t_end);

struct ComparisonReport {
    bool ordered = false;
    double worst_violation = 0.0;  // max over snapshots/nodes of (lo - hi)
    double worst_r = 0.0, worst_t = 0.0;
};

// Nodewise lo <= hi at every shared snapshot (same grid, same times).
ComparisonReport check_comparison(const Trajectory& lo, const Trajectory& hi,
                                  const RadialGrid& grid, double tol = 1e-9);

enum class ProbeKind { refinement, domain };

struct UniquenessProbe {
    ProbeKind kind = ProbeKind::refinement;
    std::vector<double> levels;     // cell counts (refinement) or radii (domain)
    std::vector<double> distances;  // successive-pair sup distances on the window
    std::vector<double> ratios;     // distances[k+1] / distances[k]
    double order = 0.0;             // -log2(last ratio)
    bool converged = false;
    bool supercritical_flag = false;  // growth classification of the data
    std::string note;
};

// Convergence probe for the approximation scheme.  refinement: uniform grids
// with the given cell counts on [0, R], dt halved alongside h, distances on
// nested nodes within the window; passes when each ratio <= 1/1.8.  domain:
// nested balls at the given radii (prefix grids, shared fixed dt), distances
// of successive runs on the window; passes when each ratio <= 0.5 - data
// outside the uniqueness growth class make the ball limit diverge instead.
UniquenessProbe uniqueness_probe(const PMEConfig& config,
                                 const std::function<double(double)>& u0, ProbeKind kind,
                                 const std::vector<double>& levels, double t_end,
                                 double inner_window, double dt,
                                 const GeometryProfile* growth_profile = nullptr);

}  // namespace hpme
