#include "hpme/pme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hpme/growth.hpp"

namespace hpme {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double phi_m(double u, double m) { return std::copysign(std::pow(std::abs(u), m), u); }

// Derivative m|u|^(m-1), floored to keep the Jacobian nonsingular where the
// diffusion degenerates (no effect above the floor).
double dphi_m(double u, double m) {
    return std::max(m * std::pow(std::abs(u), m - 1.0), 1e-12);
}

// Tridiagonal solve (Thomas).  The Jacobian is strictly diagonally dominant
// (M-matrix), so no pivoting is needed.
void thomas(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
            std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

// Prefix of a master node list up to radius R, with the first node >= R - tol
// snapped to exactly R.  Shared interior nodes across nested balls coincide,
// which keeps the discrete comparison between ball runs exact.
std::vector<double> prefix_nodes(const std::vector<double>& master, double R) {
    auto it = std::lower_bound(master.begin(), master.end(), R - 1e-9);
    if (it == master.end() || it == master.begin())
        throw std::invalid_argument("nested-ball radius outside the master grid");
    std::vector<double> nodes(master.begin(), it);
    nodes.push_back(R);
    return nodes;
}

std::vector<double> sample(const std::function<double(double)>& f,
                           const std::vector<double>& nodes) {
    std::vector<double> out(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = f(nodes[i]);
    return out;
}

}  // namespace

void PMEConfig::validate() const {
    if (!(m > 1.0)) throw std::invalid_argument("pme config: m must be > 1");
    if (N < 2) throw std::invalid_argument("pme config: N must be >= 2");
    if (!(R > 0.0)) throw std::invalid_argument("pme config: R must be > 0");
    if (!(dt_init > 0.0) || !(dt_growth >= 1.0) || !(dt_floor > 0.0))
        throw std::invalid_argument("pme config: invalid time-step policy");
    if (newton_max_iter < 1) throw std::invalid_argument("pme config: need Newton iterations");
    if (!(newton_tol > 0.0) || newton_tol > 1e-10)
        throw std::invalid_argument("pme config: Newton tolerance must be in (0, 1e-10]");
    if (!(blowup_threshold > 0.0))
        throw std::invalid_argument("pme config: blow-up threshold must be > 0");
}

PMESolver::PMESolver(PMEConfig config, RadialGrid grid)
    : cfg_(std::move(config)), grid_(std::move(grid)) {
    cfg_.validate();
    if (grid_.size() < 3) throw std::invalid_argument("pme solver: grid too small");
    if (!grid_.weights_finite)
        throw SolverError("pme solver: cell measures overflow on this grid (radius too large "
                          "for the geometry's volume growth)");
    const std::size_t M = grid_.size() - 1;
    kf_.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double face = grid_.faces[i + 1];
        const double dr = grid_.nodes[i + 1] - grid_.nodes[i];
        kf_[i] = std::exp((cfg_.N - 1) * cfg_.model.log_psi(face)) / dr;
        if (!std::isfinite(kf_[i]))
            throw SolverError("pme solver: face transmissibility overflows");
    }
}

double PMESolver::mass(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) s += grid_.weights[i] * u[i];
    return s;
}

double PMESolver::residual_and_scale(const std::vector<double>& un,
                                     const std::vector<double>& uo, double dt,
                                     const std::vector<double>& scale,
                                     std::vector<double>& res) const {
    const std::size_t M = grid_.size() - 1;
    double worst = 0.0;
    double F_prev = 0.0;  // zero flux at r = 0 by symmetry
    for (std::size_t i = 0; i < M; ++i) {
        const double F = kf_[i] * (phi_m(un[i + 1], cfg_.m) - phi_m(un[i], cfg_.m));
        res[i] = grid_.weights[i] * (un[i] - uo[i]) - dt * (F - F_prev);
        F_prev = F;
        worst = std::max(worst, std::abs(res[i]) / scale[i]);
    }
    return worst;
}

bool PMESolver::try_step(std::vector<double>& u, double dt, double boundary,
                         StepDiagnostics& diag) const {
    const std::size_t M = grid_.size() - 1;
    std::vector<double> un = u;
    un[M] = boundary;

    // Residual scale: cell measure plus the magnitudes of the flux terms the
    // residual is assembled from, so the tolerance is roundoff-achievable at
    // any amplitude.
    std::vector<double> scale(M);
    {
        std::vector<double> pabs(M + 1);
        for (std::size_t i = 0; i <= M; ++i) pabs[i] = std::abs(phi_m(u[i], cfg_.m));
        double fl_prev = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            const double fl = kf_[i] * (pabs[i + 1] + pabs[i]);
            scale[i] = grid_.weights[i] * (1.0 + std::abs(u[i])) + dt * (fl + fl_prev);
            fl_prev = fl;
        }
    }

    std::vector<double> res(M), cand_res(M), sub(M), dia(M), sup(M);
    std::vector<double> cand(M + 1);
    double rn = residual_and_scale(un, u, dt, scale, res);
    int it = 0;
    for (; it < cfg_.newton_max_iter && rn >= cfg_.newton_tol; ++it) {
        for (std::size_t i = 0; i < M; ++i) {
            const double dp = dphi_m(un[i], cfg_.m);
            const double kl = i > 0 ? kf_[i - 1] : 0.0;
            dia[i] = grid_.weights[i] + dt * dp * (kf_[i] + kl);
            sub[i] = i > 0 ? -dt * kf_[i - 1] * dphi_m(un[i - 1], cfg_.m) : 0.0;
            sup[i] = i + 1 < M ? -dt * kf_[i] * dphi_m(un[i + 1], cfg_.m) : 0.0;
        }
        std::vector<double> delta = res;
        thomas(sub, dia, sup, delta);
        double lam = 1.0;
        while (true) {
            cand = un;
            for (std::size_t i = 0; i < M; ++i) cand[i] -= lam * delta[i];
            const double r2 = residual_and_scale(cand, u, dt, scale, cand_res);
            if (r2 < rn || lam < 1e-4) {
                un.swap(cand);
                res.swap(cand_res);  // residual of the accepted iterate
                rn = r2;
                break;
            }
            lam *= 0.5;
        }
    }
    if (!(rn < cfg_.newton_tol)) return false;

    // Telescoping identity: interior mass change minus the boundary flux
    // equals the Newton residual sum (checked independently of the loop).
    double dm = 0.0, amp = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        dm += grid_.weights[i] * (un[i] - u[i]);
        amp += std::abs(grid_.weights[i] * (un[i] - u[i]));
    }
    const double F_bdry = kf_[M - 1] * (phi_m(un[M], cfg_.m) - phi_m(un[M - 1], cfg_.m));
    diag.mass_balance = std::abs(dm - dt * F_bdry) / (amp + dt * std::abs(F_bdry) + 1e-300);
    diag.newton_iters = it;
    diag.residual = rn;
    diag.dt = dt;
    double sup_u = 0.0;
    for (double v : un) sup_u = std::max(sup_u, std::abs(v));
    diag.blowup_signal = sup_u > cfg_.blowup_threshold;
    u.swap(un);
    return true;
}

PMEState PMESolver::step(const PMEState& state, double dt) const {
    if (!(dt > 0.0)) throw std::invalid_argument("pme step: dt must be > 0");
    PMEState next;
    next.u = state.u;
    double dt_try = dt;
    while (true) {
        StepDiagnostics diag;
        std::vector<double> u = state.u;
        if (try_step(u, dt_try, cfg_.boundary_value, diag)) {
            next.u = std::move(u);
            next.t = state.t + dt_try;
            next.diag = diag;
            return next;
        }
        if (cfg_.fixed_dt)
            throw SolverError("pme step: Newton failed at the prescribed fixed step");
        dt_try *= 0.5;
        if (dt_try < cfg_.dt_floor)
            throw SolverError("pme step: Newton failed down to the dt floor");
    }
}

Trajectory solve_dirichlet_ball(const PMEConfig& config, const RadialGrid& grid,
                                const std::vector<double>& u0, double t_end,
                                const RunControl& control) {
    if (u0.size() != grid.size())
        throw std::invalid_argument("solve_dirichlet_ball: data size does not match grid");
    if (!(t_end > 0.0)) throw std::invalid_argument("solve_dirichlet_ball: t_end must be > 0");
    PMESolver solver(config, grid);
    auto boundary = [&](double t) {
        return control.boundary ? control.boundary(t) : config.boundary_value;
    };
    std::vector<double> snaps = control.snapshot_times;
    std::sort(snaps.begin(), snaps.end());

    Trajectory traj;
    std::vector<double> u = u0;
    double t = 0.0;
    double dt = config.dt_init;
    std::size_t si = 0;
    while (si < snaps.size() && snaps[si] <= 1e-13) {  // snapshot at t = 0
        traj.snapshots.push_back(PMEState{0.0, u, {}});
        ++si;
    }
    while (t < t_end - 1e-13) {
        double dtw = config.fixed_dt ? config.dt_init : dt;
        if (control.blowup_time_hint > 0.0)
            dtw = std::min(dtw, control.blowup_cap_frac * (control.blowup_time_hint - t));
        if (si < snaps.size() && t + dtw > snaps[si] - 1e-13) dtw = snaps[si] - t;
        if (t + dtw > t_end) dtw = t_end - t;
        if (!(dtw > 0.0)) throw SolverError("solve_dirichlet_ball: time step collapsed");

        StepDiagnostics diag;
        std::vector<double> u_try = u;
        if (!solver.try_step(u_try, dtw, boundary(t + dtw), diag)) {
            if (config.fixed_dt)
                throw SolverError("solve_dirichlet_ball: Newton failed at the fixed step");
            dt = dtw * 0.5;
            if (dt < config.dt_floor)
                throw SolverError("solve_dirichlet_ball: Newton failed down to the dt floor");
            continue;
        }
        u.swap(u_try);
        t += dtw;
        ++traj.steps;
        traj.max_mass_balance = std::max(traj.max_mass_balance, diag.mass_balance);
        if (si < snaps.size() && std::abs(t - snaps[si]) < 1e-12) {
            traj.snapshots.push_back(PMEState{t, u, diag});
            ++si;
        }
        if (diag.blowup_signal) {
            traj.blew_up = true;
            traj.final_state = PMEState{t, u, diag};
            traj.t_last = t;
            return traj;
        }
        traj.final_state = PMEState{t, u, diag};
        if (!config.fixed_dt) dt = dtw * config.dt_growth;
    }
    traj.t_last = t;
    traj.completed = true;
    return traj;
}

TruncationReport run_truncation_scheme(const PMEConfig& config,
                                       const std::function<double(double)>& u0,
                                       const TruncationSchedule& sched) {
    if (sched.radii.size() < 2)
        throw std::invalid_argument("truncation scheme: need at least two ball radii");
    if (sched.i_levels.empty() || sched.j_levels.empty())
        throw std::invalid_argument("truncation scheme: need truncation levels");
    for (std::size_t k = 1; k < sched.radii.size(); ++k)
        if (!(sched.radii[k] > sched.radii[k - 1]))
            throw std::invalid_argument("truncation scheme: radii must be ascending");

    GridSpec spec;
    spec.drmax = sched.drmax;
    const RadialGrid master = make_grid(config.model, config.N, sched.radii.back(), spec);

    // One boundary value per j, from the largest ball, shared by every run:
    // nested runs then dominate each other exactly in the discrete scheme.
    std::vector<double> bval(sched.j_levels.size(), 0.0);
    for (std::size_t j = 0; j < sched.j_levels.size(); ++j) {
        double worst = 0.0;
        for (double r : master.nodes)
            worst = std::max(worst, std::min(std::max(-u0(r), 0.0), sched.j_levels[j]));
        bval[j] = -worst;
    }

    const std::size_t nR = sched.radii.size(), nI = sched.i_levels.size(),
                      nJ = sched.j_levels.size();
    // runs[n][i][j] -> final node values; grids[n] -> the ball grid.
    std::vector<RadialGrid> grids(nR);
    std::vector<std::vector<std::vector<std::vector<double>>>> runs(
        nR, std::vector<std::vector<std::vector<double>>>(nI));
    for (std::size_t n = 0; n < nR; ++n) {
        grids[n] = make_grid_from_nodes(config.model, config.N,
                                        prefix_nodes(master.nodes, sched.radii[n]));
        for (std::size_t i = 0; i < nI; ++i) {
            runs[n][i].resize(nJ);
            for (std::size_t j = 0; j < nJ; ++j) {
                PMEConfig c = config;
                c.R = sched.radii[n];
                c.fixed_dt = true;
                c.dt_init = sched.dt;
                c.boundary_value = bval[j];
                std::vector<double> data(grids[n].size());
                for (std::size_t q = 0; q < grids[n].size(); ++q) {
                    const double v = u0(grids[n].nodes[q]);
                    data[q] = std::min(std::max(v, 0.0), sched.i_levels[i]) -
                              std::min(std::max(-v, 0.0), sched.j_levels[j]);
                }
                data.back() = bval[j];
                runs[n][i][j] =
                    solve_dirichlet_ball(c, grids[n], data, sched.t_end).final_state.u;
            }
        }
    }

    TruncationReport rep;
    double worst_i = 0.0, worst_j = 0.0, worst_n = 0.0;
    for (std::size_t n = 0; n < nR; ++n)
        for (std::size_t j = 0; j < nJ; ++j)
            for (std::size_t i = 0; i + 1 < nI; ++i)
                for (std::size_t q = 0; q < grids[n].size(); ++q)
                    worst_i = std::max(worst_i, runs[n][i][j][q] - runs[n][i + 1][j][q]);
    for (std::size_t n = 0; n < nR; ++n)
        for (std::size_t i = 0; i < nI; ++i)
            for (std::size_t j = 0; j + 1 < nJ; ++j)
                for (std::size_t q = 0; q < grids[n].size(); ++q)
                    worst_j = std::max(worst_j, runs[n][i][j + 1][q] - runs[n][i][j][q]);
    for (std::size_t n = 0; n + 1 < nR; ++n) {
        const std::size_t shared = grids[n].size() - 1;  // strict interior of B_n
        for (std::size_t i = 0; i < nI; ++i)
            for (std::size_t j = 0; j < nJ; ++j)
                for (std::size_t q = 0; q < shared; ++q)
                    worst_n = std::max(worst_n, runs[n][i][j][q] - runs[n + 1][i][j][q]);
    }
    rep.worst_i_violation = worst_i;
    rep.worst_j_violation = worst_j;
    rep.worst_n_violation = worst_n;
    rep.orderings_ok = worst_i <= sched.order_tol && worst_j <= sched.order_tol &&
                       worst_n <= sched.order_tol;

    // Stabilization of the n-limit at the least-truncated levels.
    std::size_t win = 0;
    while (win < grids[0].size() && grids[0].nodes[win] <= sched.inner_window) ++win;
    for (std::size_t n = 0; n + 1 < nR; ++n) {
        const auto& a = runs[n][nI - 1][nJ - 1];
        const auto& b = runs[n + 1][nI - 1][nJ - 1];
        double d = 0.0;
        for (std::size_t q = 0; q < win; ++q) d = std::max(d, std::abs(a[q] - b[q]));
        rep.n_diffs.push_back(d);
    }
    bool stab = true;
    for (std::size_t k = 0; k + 1 < rep.n_diffs.size(); ++k) {
        const double ratio = rep.n_diffs[k] > 0 ? rep.n_diffs[k + 1] / rep.n_diffs[k] : 0.0;
        rep.n_ratios.push_back(ratio);
        if (!(ratio <= 0.5)) stab = false;
    }
    rep.stabilizing = stab && !rep.n_ratios.empty();
    return rep;
}

BlowupReport run_blowup_experiment(const GeometryProfile& profile, double m, double T,
                                   double alpha, double R, double t_end) {
    if (!(t_end > 0.0) || !(t_end < T))
        throw std::invalid_argument("blow-up experiment: need 0 < t_end < T");
    if (profile.grid.rmax() < R - 1e-9)
        throw std::invalid_argument("blow-up experiment: profile must cover [0, R]");
    const SeparableProfile sep = make_separable(profile, m, T, alpha);

    PMEConfig cfg;
    cfg.model = profile.model;
    cfg.N = profile.N;
    cfg.m = m;
    cfg.R = R;
    cfg.dt_init = 1e-4;
    const RadialGrid grid = make_grid(profile.model, profile.N, R);
    std::vector<double> u0(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) u0[i] = sep.UT_at(grid.nodes[i]);

    BlowupReport rep;
    rep.b = 1.0;
    const double inv = 1.0 / (m - 1.0);

    // March with the exact separable trace at R and record the sup norm at
    // every accepted step (solver loop inlined: the norm trajectory at step
    // resolution feeds the blow-up time fit).
    PMESolver solver(cfg, grid);
    std::vector<double> u = u0;
    double t = 0.0, dt = cfg.dt_init;
    std::vector<double> snaps;
    for (double f : {0.2, 0.4, 0.6, 0.8})
        if (f * T <= t_end + 1e-12) snaps.push_back(f * T);
    std::size_t si = 0;
    double track = 0.0;
    std::vector<double> wnorm;
    while (t < t_end - 1e-13) {
        double dtw = std::min(dt, 0.005 * (T - t));
        if (si < snaps.size() && t + dtw > snaps[si] - 1e-13) dtw = snaps[si] - t;
        if (t + dtw > t_end) dtw = t_end - t;
        StepDiagnostics diag;
        std::vector<double> u_try = u;
        if (!solver.try_step(u_try, dtw, sep.at(R, t + dtw), diag)) {
            dt = dtw * 0.5;
            if (dt < cfg.dt_floor) throw SolverError("blow-up experiment: step failure");
            continue;
        }
        u.swap(u_try);
        t += dtw;
        dt = dtw * cfg.dt_growth;
        double sup = 0.0;
        for (double v : u) sup = std::max(sup, std::abs(v));
        rep.times.push_back(t);
        rep.sup_norm.push_back(sup);
        if (diag.blowup_signal) {
            rep.blew_up = true;
            break;
        }
        if (si < snaps.size() && std::abs(t - snaps[si]) < 1e-12) {
            for (std::size_t i = 0; i < grid.size(); ++i) {
                if (grid.nodes[i] > R / 2.0) break;
                const double exact = sep.at(grid.nodes[i], t);
                track = std::max(track, std::abs(u[i] - exact) / exact);
            }
            double wn = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                wn = std::max(wn, std::abs(u[i]) /
                                      std::pow(profile.H_at(grid.nodes[i]) + 1.0 + rep.b, inv));
            wnorm.push_back(wn);
            ++si;
        }
    }
    rep.t_last = t;
    rep.tracking_error = track;
    rep.weighted_norm = std::move(wnorm);

    // Affine fit of M(t)^(-(m-1)), exact for separable solutions; its root is
    // the blow-up time estimate.
    const std::size_t n = rep.times.size();
    if (n >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double y = std::pow(rep.sup_norm[k], -(m - 1.0));
            sx += rep.times[k];
            sy += y;
            sxx += rep.times[k] * rep.times[k];
            sxy += rep.times[k] * y;
        }
        const double dn = static_cast<double>(n);
        const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / dn;
        rep.T_fit = -icpt / slope;
        double fr = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double y = std::pow(rep.sup_norm[k], -(m - 1.0));
            fr = std::max(fr, std::abs(y - (icpt + slope * rep.times[k])) / std::abs(y));
        }
        rep.fit_residual = fr;
    }
    return rep;
}

ComparisonReport check_comparison(const Trajectory& lo, const Trajectory& hi,
                                  const RadialGrid& grid, double tol) {
    if (lo.snapshots.size() != hi.snapshots.size())
        throw std::invalid_argument("comparison: snapshot counts differ");
    ComparisonReport rep;
    double worst = -kInf;
    for (std::size_t s = 0; s < lo.snapshots.size(); ++s) {
        const auto& a = lo.snapshots[s];
        const auto& b = hi.snapshots[s];
        if (std::abs(a.t - b.t) > 1e-12 || a.u.size() != b.u.size() ||
            a.u.size() != grid.size())
            throw std::invalid_argument("comparison: snapshots are not aligned");
        for (std::size_t i = 0; i < a.u.size(); ++i) {
            const double v = a.u[i] - b.u[i];
            if (v > worst) {
                worst = v;
                rep.worst_r = grid.nodes[i];
                rep.worst_t = a.t;
            }
        }
    }
    rep.worst_violation = std::max(worst, 0.0);
    rep.ordered = worst <= tol;
    return rep;
}

UniquenessProbe uniqueness_probe(const PMEConfig& config,
                                 const std::function<double(double)>& u0, ProbeKind kind,
                                 const std::vector<double>& levels, double t_end,
                                 double inner_window, double dt,
                                 const GeometryProfile* growth_profile) {
    if (levels.size() < 3)
        throw std::invalid_argument("uniqueness probe: need at least three levels");
    UniquenessProbe rep;
    rep.kind = kind;
    rep.levels = levels;

    std::vector<std::vector<double>> sols;
    std::vector<std::vector<double>> nodes;
    if (kind == ProbeKind::refinement) {
        for (std::size_t k = 1; k < levels.size(); ++k)
            if (std::lround(levels[k]) != 2 * std::lround(levels[k - 1]))
                throw std::invalid_argument(
                    "uniqueness probe: refinement levels must double the cell count");
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const int cells = static_cast<int>(std::lround(levels[k]));
            const RadialGrid g = make_uniform_grid(config.model, config.N, config.R, cells);
            PMEConfig c = config;
            c.fixed_dt = true;
            c.dt_init = dt * levels[0] / levels[k];  // dt shrinks with h
            std::vector<double> data = sample(u0, g.nodes);
            data.back() = c.boundary_value;
            sols.push_back(solve_dirichlet_ball(c, g, data, t_end).final_state.u);
            nodes.push_back(g.nodes);
        }
        for (std::size_t k = 0; k + 1 < sols.size(); ++k) {
            double d = 0.0;
            for (std::size_t q = 0; q < nodes[k].size(); ++q) {
                if (nodes[k][q] > inner_window) break;
                d = std::max(d, std::abs(sols[k][q] - sols[k + 1][2 * q]));
            }
            rep.distances.push_back(d);
        }
        bool ok = true;
        for (std::size_t k = 0; k + 1 < rep.distances.size(); ++k) {
            const double ratio =
                rep.distances[k] > 0 ? rep.distances[k + 1] / rep.distances[k] : 0.0;
            rep.ratios.push_back(ratio);
            if (!(ratio <= 1.0 / 1.8)) ok = false;
        }
        rep.converged = ok && !rep.ratios.empty();
        rep.note = "grid refinement, dt ~ h";
    } else {
        GridSpec spec;
        spec.drmax = 0.04;
        const RadialGrid master = make_grid(config.model, config.N, levels.back(), spec);
        for (double R : levels) {
            const RadialGrid g =
                make_grid_from_nodes(config.model, config.N, prefix_nodes(master.nodes, R));
            PMEConfig c = config;
            c.R = R;
            c.fixed_dt = true;
            c.dt_init = dt;
            std::vector<double> data = sample(u0, g.nodes);
            data.back() = c.boundary_value;
            sols.push_back(solve_dirichlet_ball(c, g, data, t_end).final_state.u);
            nodes.push_back(g.nodes);
        }
        for (std::size_t k = 0; k + 1 < sols.size(); ++k) {
            double d = 0.0;
            for (std::size_t q = 0; q < nodes[k].size(); ++q) {
                if (nodes[k][q] > inner_window) break;
                d = std::max(d, std::abs(sols[k][q] - sols[k + 1][q]));
            }
            rep.distances.push_back(d);
        }
        bool ok = true;
        for (std::size_t k = 0; k + 1 < rep.distances.size(); ++k) {
            const double ratio =
                rep.distances[k] > 0 ? rep.distances[k + 1] / rep.distances[k] : 0.0;
            rep.ratios.push_back(ratio);
            if (!(ratio <= 0.5)) ok = false;
        }
        rep.converged = ok && !rep.ratios.empty();
        rep.note = "nested-ball exhaustion, shared master grid";
    }
    if (!rep.ratios.empty() && rep.ratios.back() > 0.0)
        rep.order = -std::log2(rep.ratios.back());

    if (growth_profile != nullptr) {
        const double rmax = growth_profile->grid.rmax();
        const GrowthClass g = classify_growth(RadialDatum{u0, "probe-data"}, config.m,
                                              *growth_profile,
                                              {0.5 * rmax, 0.75 * rmax, rmax});
        rep.supercritical_flag = g.kind == GrowthKind::supercritical;
        if (rep.supercritical_flag)
            rep.note += "; data grow beyond the critical scale";
    }
    return rep;
}

}  // namespace hpme
