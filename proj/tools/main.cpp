// Command-line front-end: wires JSON/flag configs to the library modules,
// writes JSON reports + CSV data, and maps failures to exit codes
// (0 = all checks pass, 1 = verification failure, 2 = config error,
// 3 = solver failure).  Outputs are deterministic: same config + version
// gives byte-identical files.

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hpme/barriers.hpp"
#include "hpme/elliptic.hpp"
#include "hpme/geometry.hpp"
#include "hpme/growth.hpp"
#include "hpme/pme.hpp"
#include "hpme/report.hpp"

namespace {

using hpme::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kExitPass = 0;
constexpr int kExitVerification = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

// Everything a runner produces; files are (relative path, content) pairs so
// sweep jobs can be rerooted under their job directory.
struct RunOutput {
    ordered_json report;
    std::vector<std::pair<std::string, std::string>> files;
    bool pass = false;
};

const char* kModelCatalog = "euclidean, hyperbolic, quadratic, power, superquadratic";

hpme::ModelFunction build_model(const ordered_json& cfg) {
    const std::string name = cfg.value("model", "euclidean");
    if (name == "euclidean") return hpme::make_euclidean();
    if (name == "hyperbolic") return hpme::make_hyperbolic(cfg.value("c", 1.0));
    if (name == "quadratic") return hpme::splice_quadratic_psi(cfg.value("c0", 1.0));
    if (name == "power")
        return hpme::splice_power_psi(cfg.value("k", 1.0), cfg.value("sigma", 1.0));
    if (name == "superquadratic") return hpme::splice_superquadratic_psi(cfg.value("p_tail", 3.0));
    throw ConfigError("unknown model '" + name + "'; catalog: " + kModelCatalog);
}

int dim_of(const ordered_json& cfg, int fallback = 2) {
    const int N = cfg.value("dim", fallback);
    if (N < 2) throw ConfigError("dim must be >= 2");
    return N;
}

// Initial-datum catalog for the parabolic runs.  "hpow" and "separable"
// need a geometry profile that covers the sampling radii.
std::function<double(double)> build_u0(const ordered_json& u0cfg, double m,
                                       std::shared_ptr<const hpme::GeometryProfile> prof) {
    const std::string name = u0cfg.value("name", "bump");
    const double A = u0cfg.value("amp", 1.0);
    const double s = u0cfg.value("width", 2.0);
    if (name == "bump") {
        if (!(s > 0.0)) throw ConfigError("u0 bump: width must be > 0");
        return [A, s](double r) {
            const double q = 1.0 - (r / s) * (r / s);
            return q > 0.0 ? A * q * q : 0.0;
        };
    }
    if (name == "gauss") {
        if (!(s > 0.0)) throw ConfigError("u0 gauss: width must be > 0");
        return [A, s](double r) { return A * std::exp(-(r / s) * (r / s)); };
    }
    if (name == "const") {
        return [A](double) { return A; };
    }
    if (name == "hpow") {
        const double p = u0cfg.value("p", 0.5);
        if (!prof) throw ConfigError("u0 hpow: geometry profile unavailable");
        return [A, p, prof](double r) { return A * std::pow(prof->H_at(r) + 1.0, p); };
    }
    if (name == "separable") {
        if (!prof) throw ConfigError("u0 separable: geometry profile unavailable");
        const double T = u0cfg.value("T", 1.0);
        const double alpha = u0cfg.value("alpha", 1.0);
        auto sep = std::make_shared<hpme::SeparableProfile>(
            hpme::make_separable(*prof, m, T, alpha));
        return [sep](double r) { return sep->UT_at(r); };
    }
    throw ConfigError("unknown u0 '" + name + "'; catalog: bump, gauss, const, hpow, separable");
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

const char* verdict_name(hpme::Completeness v) {
    switch (v) {
        case hpme::Completeness::complete: return "complete";
        case hpme::Completeness::incomplete: return "incomplete";
        default: return "undecided";
    }
}

// ---------------------------------------------------------------------------
// geom: profile CSV (r, psi, psi', psi'', H, H', H'', Ric, Ksec), identity
// checks, conservation-of-mass classification.

RunOutput run_geom(const ordered_json& cfg) {
    const hpme::ModelFunction model = build_model(cfg);
    const int N = dim_of(cfg);
    const double rmax = cfg.value("rmax", 20.0);
    if (!(rmax >= 2.0)) throw ConfigError("geom: rmax must be >= 2");

    const int cells = static_cast<int>(std::lround(rmax * 4.0));
    const hpme::RadialGrid grid = hpme::make_uniform_grid(model, N, rmax, cells);
    const hpme::GeometryProfile prof = hpme::compute_H(model, N, grid);

    hpme::CsvTable csv;
    csv.columns = {"r", "psi", "dpsi", "ddpsi", "H", "dH", "ddH", "Ric", "Ksec"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto [p, dp, ddp] = hpme::eval_model(model, grid.nodes[i]);
        csv.add_row({grid.nodes[i], p, dp, ddp, prof.H[i], prof.dH[i], prof.ddH[i],
                     prof.curv.Ric_o[i], prof.curv.K_w[i]});
    }

    // Defining identities on the grid: Laplacian(H) = 1 away from the
    // coordinate singularity, |H'|^2 <= 2H everywhere.
    double lap_res = 0.0, grad_excess = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        lap_res = std::max(lap_res, std::abs(prof.ddH[i] + prof.drift[i] * prof.dH[i] - 1.0));
        grad_excess = std::max(grad_excess, prof.dH[i] * prof.dH[i] - 2.0 * prof.H[i]);
    }
    const bool identities_ok = lap_res <= 1e-8 && grad_excess <= 1e-12;

    const hpme::CompletenessReport comp = hpme::stochastic_completeness(prof, rmax);

    ordered_json rep = hpme::report_envelope(
        "geom", cfg,
        {"H-laplacian-identity", "H-gradient-bound", "conservation-classification"},
        identities_ok);
    rep["identities"] = {{"max_laplacian_residual", lap_res},
                         {"max_gradient_excess", grad_excess},
                         {"ok", identities_ok}};
    rep["completeness"] = {{"verdict", verdict_name(comp.verdict)},
                           {"R_probe", comp.R_probe},
                           {"H_probe", comp.H_probe},
                           {"growth_exponent", comp.growth_exponent},
                           {"H_infinity_est", comp.H_infinity_est},
                           {"tail_ratio", comp.tail_ratio},
                           {"detail", comp.detail}};

    RunOutput out;
    out.pass = identities_ok;
    out.report = std::move(rep);
    out.files.emplace_back("geom_profile.csv", csv.to_string());
    return out;
}

// ---------------------------------------------------------------------------
// elliptic: sublinear profile + two-sided growth bounds, recurrences, and
// optionally the separable space-time profile residual.

RunOutput run_elliptic(const ordered_json& cfg) {
    const hpme::ModelFunction model = build_model(cfg);
    const int N = dim_of(cfg);
    const double m = cfg.value("m", 2.0);
    const double U0 = cfg.value("u0", 1.0);
    const double rmax = cfg.value("rmax", 15.0);
    if (!(m > 1.0)) throw ConfigError("elliptic: m must be > 1");

    const hpme::RadialGrid grid = hpme::make_grid(model, N, rmax);
    const hpme::GeometryProfile prof = hpme::compute_H(model, N, grid);
    const hpme::EllipticSolution sol = hpme::solve_sublinear(prof, m, U0);
    const hpme::SandwichConstants sw = hpme::verify_sandwich(sol);
    const double rec_err = hpme::sandwich_recurrence_error(m);

    const double pexp = m / (m - 1.0);
    hpme::CsvTable csv;
    csv.columns = {"r", "U", "dU", "lower_bound", "upper_bound"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double H = prof.H[i];
        const double lower = std::pow(sw.kappa_m, pexp) * std::pow(H, pexp);
        const double upper = std::pow(1.0 + (m - 1.0) * H / m, pexp);
        csv.add_row({grid.nodes[i], sol.U[i], sol.dU[i], lower, upper});
    }

    double flux_res = 0.0;
    for (const auto& [r, res] : sol.residual_checkpoints) flux_res = std::max(flux_res, res);

    bool pass = sw.pass && rec_err <= 1e-12;
    ordered_json rep = hpme::report_envelope(
        "elliptic", cfg,
        {"sublinear-flux-identity", "two-sided-growth-bound", "bound-recurrences"}, true);
    rep["sandwich"] = {{"kappa_m", sw.kappa_m},
                       {"C1_meas", sw.C1_meas},
                       {"C2_meas", sw.C2_meas},
                       {"K1_meas", sw.K1_meas},
                       {"K2_meas", sw.K2_meas},
                       {"K1_sharp", sw.K1_sharp},
                       {"pass", sw.pass},
                       {"min_lower_margin", sw.min_lower_margin},
                       {"min_upper_margin", sw.min_upper_margin},
                       {"window_short", sw.window_short}};
    rep["recurrence_error"] = rec_err;
    rep["flux_identity_residual"] = flux_res;

    if (cfg.contains("T") && cfg["T"].get<double>() > 0.0) {
        const double T = cfg["T"].get<double>();
        const double alpha = cfg.value("alpha", 1.0);
        const hpme::SeparableProfile sep = hpme::make_separable(prof, m, T, alpha);
        rep["separable"] = {{"T", T},
                            {"alpha", alpha},
                            {"max_residual", sep.max_residual},
                            {"residual_h", sep.residual_h}};
        rep["certifies"].push_back("separable-profile-residual");
        pass = pass && sep.max_residual <= 1e-6;
    }
    rep["pass"] = pass;

    RunOutput out;
    out.pass = pass;
    out.report = std::move(rep);
    out.files.emplace_back("elliptic_profile.csv", csv.to_string());
    return out;
}

// ---------------------------------------------------------------------------
// barrier: H-derivative hypothesis, decaying barrier certificate (+ capped
// extension), optional backward space-time certificate, log-doubling
// condition and perturbed-model certificates.

RunOutput run_barrier(const ordered_json& cfg) {
    const hpme::ModelFunction model = build_model(cfg);
    const int N = dim_of(cfg);
    const double alpha = cfg.value("alpha", 3.5);
    const double r0 = cfg.value("r0", 2.0);
    const double rmax = cfg.value("rmax", 60.0);
    if (!(r0 > 0.0) || !(rmax > r0)) throw ConfigError("barrier: need 0 < r0 < rmax");
    if (!(alpha > 0.0)) throw ConfigError("barrier: alpha must be > 0");

    const hpme::RadialGrid grid = hpme::make_grid(model, N, rmax);
    const hpme::GeometryProfile prof = hpme::compute_H(model, N, grid);
    const hpme::HypothesisReport hyp = hpme::check_H_hypothesis(prof, r0, rmax);
    const hpme::BarrierW bw = hpme::build_barrier_w(prof, alpha, r0);

    hpme::CsvTable csv;
    csv.columns = {"r", "w", "dw", "lap_w"};
    for (std::size_t i = 0; i < bw.window_r.size(); ++i)
        csv.add_row({bw.window_r[i], bw.w[i], bw.wp[i], bw.lap_w[i]});

    bool pass = hyp.holds && bw.pass && bw.z_pass;
    ordered_json rep = hpme::report_envelope(
        "barrier", cfg,
        {"H-derivative-hypothesis", "decaying-barrier-certificate",
         "capped-barrier-certificate"},
        true);
    rep["hypothesis"] = {{"K_meas", hyp.K_meas},
                         {"K_hat", hyp.K_hat},
                         {"holds", hyp.holds},
                         {"ddH_bound_ok", hyp.ddH_bound_ok},
                         {"ddH_bound_margin", hyp.ddH_bound_margin},
                         {"chain_ok", hyp.chain_ok},
                         {"chain_margin", hyp.chain_margin}};
    rep["barrier"] = {{"alpha", bw.alpha},
                      {"window", {bw.r0, bw.Rmax}},
                      {"C_required", bw.C_required},
                      {"kappa", bw.kappa},
                      {"min_margin", bw.min_margin},
                      {"argmin_node", bw.window_r.empty() ? 0.0 : bw.window_r[bw.argmin_node]},
                      {"pass", bw.pass},
                      {"monotone_ok", bw.monotone_ok},
                      {"drift_bound_ok", bw.drift_bound_ok},
                      {"fd_crosscheck", bw.fd_crosscheck},
                      {"capped_pass", bw.z_pass},
                      {"capped_min_margin", bw.z_min_margin}};

    if (cfg.contains("K") && cfg.contains("T") && cfg.contains("C2")) {
        const double K = cfg["K"].get<double>();
        const double T = cfg["T"].get<double>();
        const double C2 = cfg["C2"].get<double>();
        const double R0 = cfg.value("R0", 3.0);
        const double l = cfg.value("l", 1.6);
        const double m = cfg.value("m", 2.0);
        const hpme::BackwardBarrier bb =
            hpme::build_backward_barrier(prof, K, T, C2, R0, rmax, l, m);
        rep["backward"] = {{"lambda", bb.lambda},
                            {"constraint_margin", bb.constraint_margin},
                            {"constraint_ok", bb.constraint_ok},
                            {"cert_pass", bb.cert_pass},
                            {"min_margin", bb.min_margin},
                            {"min_margin_eta_units", bb.min_margin_eta_units},
                            {"worst_r", bb.worst_r},
                            {"worst_t", bb.worst_t},
                            {"boundary_calibration_ok", bb.boundary_calibration_ok},
                            {"horizon_bound", bb.horizon_bound}};
        rep["certifies"].push_back("backward-barrier-certificate");
        pass = pass && bb.constraint_ok && bb.cert_pass && bb.boundary_calibration_ok;
    }
    if (cfg.contains("l") && !cfg.contains("K")) {
        const double l = cfg["l"].get<double>();
        const hpme::LogConditionReport lc = hpme::check_log_condition(model, l, rmax);
        rep["log_condition"] = {{"l", lc.l},
                                 {"holds", lc.holds},
                                 {"sup_ratio", lc.sup_ratio},
                                 {"arg_sup", lc.arg_sup}};
        rep["certifies"].push_back("log-doubling-condition");
        pass = pass && lc.holds;
    }
    if (cfg.contains("phi_kappa")) {
        const double C0 = cfg.value("c0", 1.0);
        const double kappa = cfg["phi_kappa"].get<double>();
        const double Kc = cfg.value("phi_K", 0.5);
        const double r0w = cfg.value("phi_r0", 3.0);
        const hpme::PhiPerturbation ph = hpme::build_phi_perturbation(C0, kappa, Kc, r0w);
        rep["perturbation"] = {{"A", ph.A},
                                {"B", ph.B},
                                {"R0", ph.R0},
                                {"K_pert", ph.K_pert},
                                {"curv_pass", ph.curv_pass},
                                {"curv_min_margin", ph.curv_min_margin},
                                {"pert_pass", ph.pert_pass},
                                {"pert_min_margin", ph.pert_min_margin},
                                {"pert_needed_K", ph.pert_needed_K}};
        rep["certifies"].push_back("perturbed-model-certificates");
        pass = pass && ph.curv_pass && ph.pert_pass;
    }
    rep["pass"] = pass;

    RunOutput out;
    out.pass = pass;
    out.report = std::move(rep);
    out.files.emplace_back("barrier_window.csv", csv.to_string());
    return out;
}

// ---------------------------------------------------------------------------
// pme: evolve / truncation / comparison experiments.

hpme::PMEConfig pme_config_from(const ordered_json& cfg, const hpme::ModelFunction& model) {
    hpme::PMEConfig c;
    c.model = model;
    c.N = dim_of(cfg);
    c.m = cfg.value("m", 2.0);
    c.R = cfg.value("R", 10.0);
    c.dt_init = cfg.value("dt", 1e-4);
    c.fixed_dt = cfg.value("fixed_dt", false);
    c.boundary_value = cfg.value("boundary", 0.0);
    return c;
}

RunOutput run_pme(const ordered_json& cfg) {
    const hpme::ModelFunction model = build_model(cfg);
    hpme::PMEConfig pc = pme_config_from(cfg, model);
    const std::string experiment = cfg.value("experiment", "evolve");
    const ordered_json u0cfg = cfg.value("u0", ordered_json::object());

    RunOutput out;
    if (experiment == "evolve" || experiment == "comparison") {
        const double t_end = cfg.value("t_end", 0.5);
        const int cells = cfg.value("cells", 0);
        const hpme::RadialGrid grid =
            cells > 0 ? hpme::make_uniform_grid(model, pc.N, pc.R, cells)
                      : hpme::make_grid(model, pc.N, pc.R);
        auto prof = std::make_shared<const hpme::GeometryProfile>(
            hpme::compute_H(model, pc.N, grid));
        const auto u0 = build_u0(u0cfg, pc.m, prof);

        hpme::RunControl control;
        control.snapshot_times = cfg.value("snaps", std::vector<double>{t_end});

        if (experiment == "evolve") {
            std::vector<double> data(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) data[i] = u0(grid.nodes[i]);
            data.back() = pc.boundary_value;
            const hpme::Trajectory traj =
                hpme::solve_dirichlet_ball(pc, grid, data, t_end, control);

            hpme::CsvTable csv;
            csv.columns = {"t", "r", "u"};
            for (const auto& s : traj.snapshots)
                for (std::size_t i = 0; i < grid.size(); ++i)
                    csv.add_row({s.t, grid.nodes[i], s.u[i]});

            const bool pass = traj.max_mass_balance <= 1e-8 && (traj.completed || traj.blew_up);
            ordered_json rep = hpme::report_envelope("pme", cfg, {"discrete-mass-balance"}, pass);
            rep["evolve"] = {{"steps", traj.steps},
                             {"t_last", traj.t_last},
                             {"completed", traj.completed},
                             {"blew_up", traj.blew_up},
                             {"max_mass_balance", traj.max_mass_balance},
                             {"snapshots", traj.snapshots.size()}};
            out.pass = pass;
            out.report = std::move(rep);
            out.files.emplace_back("pme_snapshots.csv", csv.to_string());
            return out;
        }

        // comparison: evolve two ordered data levels, check the discrete
        // comparison principle nodewise at shared snapshot times.
        const double lo_cap = cfg.value("cap_lo", 1.0);
        const double hi_cap = cfg.value("cap_hi", 2.0);
        if (!(lo_cap < hi_cap)) throw ConfigError("pme comparison: need cap_lo < cap_hi");
        std::vector<double> dlo(grid.size()), dhi(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double v = u0(grid.nodes[i]);
            dlo[i] = std::min(v, lo_cap);
            dhi[i] = std::min(v, hi_cap);
        }
        dlo.back() = dhi.back() = pc.boundary_value;
        const hpme::Trajectory lo = hpme::solve_dirichlet_ball(pc, grid, dlo, t_end, control);
        const hpme::Trajectory hi = hpme::solve_dirichlet_ball(pc, grid, dhi, t_end, control);
        const hpme::ComparisonReport cr = hpme::check_comparison(lo, hi, grid);
        ordered_json rep =
            hpme::report_envelope("pme", cfg, {"discrete-comparison"}, cr.ordered);
        rep["comparison"] = {{"ordered", cr.ordered},
                             {"worst_violation", cr.worst_violation},
                             {"worst_r", cr.worst_r},
                             {"worst_t", cr.worst_t}};
        out.pass = cr.ordered;
        out.report = std::move(rep);
        return out;
    }

    if (experiment == "truncation") {
        hpme::TruncationSchedule sched;
        sched.radii = cfg.value("radii", std::vector<double>{6.0, 10.0, 14.0, 18.0});
        sched.i_levels = cfg.value("i_levels", std::vector<double>{2.0, 4.0, 1e9});
        sched.j_levels = cfg.value("j_levels", std::vector<double>{1.0, 1e9});
        sched.t_end = cfg.value("t_end", 0.4);
        sched.dt = cfg.value("dt", 1e-3);
        sched.inner_window = cfg.value("window", 3.0);
        sched.drmax = cfg.value("drmax", 0.04);

        auto prof = std::make_shared<const hpme::GeometryProfile>(hpme::compute_H(
            model, pc.N, hpme::make_grid(model, pc.N, sched.radii.back())));
        ordered_json uc = u0cfg;
        if (!uc.contains("name")) uc["name"] = "separable";
        const auto u0 = build_u0(uc, pc.m, prof);

        const hpme::TruncationReport tr = hpme::run_truncation_scheme(pc, u0, sched);
        const bool pass = tr.orderings_ok && tr.stabilizing;
        ordered_json rep = hpme::report_envelope(
            "pme", cfg, {"truncation-ordering", "exhaustion-stabilization"}, pass);
        rep["truncation"] = {{"orderings_ok", tr.orderings_ok},
                             {"worst_i_violation", tr.worst_i_violation},
                             {"worst_j_violation", tr.worst_j_violation},
                             {"worst_n_violation", tr.worst_n_violation},
                             {"n_diffs", tr.n_diffs},
                             {"n_ratios", tr.n_ratios},
                             {"stabilizing", tr.stabilizing}};
        out.pass = pass;
        out.report = std::move(rep);
        return out;
    }
    throw ConfigError("unknown experiment '" + experiment +
                      "'; catalog: evolve, truncation, comparison");
}

// ---------------------------------------------------------------------------
// blowup: separable-data run with trajectory fit of the blow-up time.

RunOutput run_blowup(const ordered_json& cfg) {
    const hpme::ModelFunction model = build_model(cfg);
    const int N = dim_of(cfg);
    const double m = cfg.value("m", 2.0);
    const double T = cfg.value("T", 1.0);
    const double alpha = cfg.value("alpha", 1.0);
    const double R = cfg.value("R", 22.0);
    const double t_end = cfg.value("t_end", 0.8 * T);
    if (!(m > 1.0)) throw ConfigError("blowup: m must be > 1");
    if (!(T > 0.0) || !(alpha > 0.0)) throw ConfigError("blowup: need T > 0 and alpha > 0");

    const hpme::GeometryProfile prof =
        hpme::compute_H(model, N, hpme::make_grid(model, N, R));
    const hpme::BlowupReport rep = hpme::run_blowup_experiment(prof, m, T, alpha, R, t_end);

    hpme::CsvTable csv;
    csv.columns = {"t", "sup_norm"};
    for (std::size_t k = 0; k < rep.times.size(); ++k)
        csv.add_row({rep.times[k], rep.sup_norm[k]});

    const bool fit_ok = std::abs(rep.T_fit - T) <= 0.1 * T;
    const bool track_ok = rep.tracking_error <= 0.02;
    const bool pass = fit_ok && track_ok;
    ordered_json j = hpme::report_envelope(
        "blowup", cfg, {"blowup-time-fit", "separable-tracking"}, pass);
    j["blowup"] = {{"T_fit", rep.T_fit},
                   {"fit_residual", rep.fit_residual},
                   {"tracking_error", rep.tracking_error},
                   {"weighted_norm", rep.weighted_norm},
                   {"weight_offset", rep.b},
                   {"t_last", rep.t_last},
                   {"blew_up", rep.blew_up},
                   {"steps", rep.times.size()}};

    RunOutput out;
    out.pass = pass;
    out.report = std::move(j);
    out.files.emplace_back("blowup_trajectory.csv", csv.to_string());
    return out;
}

// ---------------------------------------------------------------------------
// uniq: approximation-scheme convergence probe (refinement or nested-ball
// exhaustion); supercritical data are flagged and fail the probe.

RunOutput run_uniq(const ordered_json& cfg) {
    const hpme::ModelFunction model = build_model(cfg);
    hpme::PMEConfig pc = pme_config_from(cfg, model);
    const std::string mode = cfg.value("mode", "domain");
    const double p = cfg.value("p", 0.5);

    const hpme::ProbeKind kind =
        mode == "refinement" ? hpme::ProbeKind::refinement : hpme::ProbeKind::domain;
    if (mode != "refinement" && mode != "domain")
        throw ConfigError("unknown uniq mode '" + mode + "'; catalog: refinement, domain");

    std::vector<double> levels, def_levels;
    double t_end, dt, window;
    if (kind == hpme::ProbeKind::refinement) {
        def_levels = {200.0, 400.0, 800.0};
        t_end = cfg.value("t_end", 0.25);
        dt = cfg.value("dt", 2e-3);
        window = cfg.value("window", 5.0);
    } else {
        def_levels = {6.0, 8.0, 10.0, 12.0};
        t_end = cfg.value("t_end", 0.1);
        dt = cfg.value("dt", 2e-4);
        window = cfg.value("window", 3.0);
    }
    levels = cfg.value("levels", def_levels);

    const double cover = kind == hpme::ProbeKind::refinement ? pc.R : levels.back();
    auto prof = std::make_shared<const hpme::GeometryProfile>(
        hpme::compute_H(model, pc.N, hpme::make_grid(model, pc.N, cover)));
    ordered_json uc = cfg.value("u0", ordered_json::object());
    if (!uc.contains("name")) uc["name"] = "hpow";
    if (!uc.contains("p")) uc["p"] = p;
    const auto u0 = build_u0(uc, pc.m, prof);

    const hpme::UniquenessProbe probe =
        hpme::uniqueness_probe(pc, u0, kind, levels, t_end, window, dt, prof.get());

    ordered_json rep = hpme::report_envelope(
        "uniq", cfg, {"scheme-convergence", "growth-classification"}, probe.converged);
    rep["probe"] = {{"mode", mode},
                    {"levels", probe.levels},
                    {"distances", probe.distances},
                    {"ratios", probe.ratios},
                    {"order", probe.order},
                    {"converged", probe.converged},
                    {"supercritical_flag", probe.supercritical_flag},
                    {"note", probe.note}};

    RunOutput out;
    out.pass = probe.converged;
    out.report = std::move(rep);
    return out;
}

// ---------------------------------------------------------------------------
// sweep: independent jobs over immutable configs, merged by job name in
// input order (deterministic regardless of completion order).

RunOutput run_job(const std::string& command, const ordered_json& cfg);

RunOutput run_sweep(const ordered_json& cfg) {
    if (!cfg.contains("jobs") || !cfg["jobs"].is_array() || cfg["jobs"].empty())
        throw ConfigError("sweep: config must contain a non-empty 'jobs' array");
    struct Job {
        std::string name, command;
        ordered_json config;
    };
    std::vector<Job> jobs;
    for (const auto& j : cfg["jobs"]) {
        Job job;
        job.name = j.value("name", "");
        job.command = j.value("command", "");
        if (job.name.empty() || job.command.empty())
            throw ConfigError("sweep: every job needs 'name' and 'command'");
        job.config = j;
        job.config.erase("name");
        job.config.erase("command");
        jobs.push_back(std::move(job));
    }

    struct JobResult {
        RunOutput out;
        int code = kExitPass;
        std::string error;
    };
    std::vector<std::future<JobResult>> futures;
    futures.reserve(jobs.size());
    for (const auto& job : jobs) {
        futures.push_back(std::async(std::launch::async, [&job]() {
            JobResult r;
            try {
                r.out = run_job(job.command, job.config);
                r.code = r.out.pass ? kExitPass : kExitVerification;
            } catch (const ConfigError& e) {
                r.code = kExitConfig;
                r.error = e.what();
            } catch (const hpme::SolverError& e) {
                r.code = kExitSolver;
                r.error = e.what();
            } catch (const hpme::VerificationError& e) {
                r.code = kExitVerification;
                r.error = e.what();
            } catch (const std::exception& e) {
                r.code = kExitConfig;
                r.error = e.what();
            }
            return r;
        }));
    }

    RunOutput out;
    ordered_json merged = ordered_json::object();
    int worst = kExitPass;
    bool all_pass = true;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        JobResult r = futures[k].get();
        ordered_json entry;
        entry["command"] = jobs[k].command;
        entry["exit_code"] = r.code;
        if (!r.error.empty()) entry["error"] = r.error;
        if (!r.out.report.is_null()) entry["report"] = r.out.report;
        merged[jobs[k].name] = std::move(entry);
        worst = std::max(worst, r.code);
        all_pass = all_pass && r.code == kExitPass;
        for (auto& [path, content] : r.out.files)
            out.files.emplace_back("jobs/" + jobs[k].name + "/" + path, std::move(content));
    }
    out.report = hpme::report_envelope("sweep", cfg, {"job-aggregation"}, all_pass);
    out.report["jobs"] = std::move(merged);
    out.report["worst_exit_code"] = worst;
    out.pass = all_pass;
    return out;
}

RunOutput run_job(const std::string& command, const ordered_json& cfg) {
    if (command == "geom") return run_geom(cfg);
    if (command == "elliptic") return run_elliptic(cfg);
    if (command == "barrier") return run_barrier(cfg);
    if (command == "pme") return run_pme(cfg);
    if (command == "blowup") return run_blowup(cfg);
    if (command == "uniq") return run_uniq(cfg);
    if (command == "sweep") return run_sweep(cfg);
    throw ConfigError("unknown command '" + command + "'");
}

// ---------------------------------------------------------------------------

int dispatch(const std::string& command, ordered_json cfg, const std::string& config_path,
             const std::string& outdir) {
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) {
            std::cerr << "error: cannot read config file " << config_path << "\n";
            return kExitConfig;
        }
        ordered_json file_cfg;
        try {
            f >> file_cfg;
        } catch (const std::exception& e) {
            std::cerr << "error: bad JSON in " << config_path << ": " << e.what() << "\n";
            return kExitConfig;
        }
        cfg.update(file_cfg, /*merge_objects=*/true);  // file overrides flags
    }

    RunOutput out;
    int code = kExitPass;
    try {
        out = run_job(command, cfg);
        code = out.pass ? kExitPass : kExitVerification;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const hpme::ConstructionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const hpme::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const hpme::VerificationError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return kExitVerification;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    hpme::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = config_path;
    manifest.output_dir = outdir;
    manifest.tool_version = hpme::kToolVersion;

    const std::filesystem::path root(outdir);
    hpme::write_text((root / (command + "_report.json")).string(), dump(out.report));
    hpme::write_text((root / "manifest.json").string(), dump(manifest.to_json()));
    for (const auto& [rel, content] : out.files)
        hpme::write_text((root / rel).string(), content);

    std::cout << command << ": " << (out.pass ? "pass" : "FAIL") << " (report in " << outdir
              << ")\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial porous-medium-equation laboratory on model geometries"};
    app.require_subcommand(1);

    const char* env_out = std::getenv("HPME_OUT");
    std::string outdir = env_out != nullptr ? env_out : "out";
    app.add_option("--out", outdir, "output directory (default $HPME_OUT or ./out)");

    // Flags are collected into a JSON config mirror; a --config file, when
    // given, overrides flag values key by key.
    struct Sub {
        CLI::App* cmd = nullptr;
        std::string config_path;
        ordered_json cfg = ordered_json::object();
    };
    std::vector<std::unique_ptr<Sub>> subs;

    auto add_sub = [&](const std::string& name, const std::string& desc) -> Sub& {
        subs.push_back(std::make_unique<Sub>());
        Sub& s = *subs.back();
        s.cmd = app.add_subcommand(name, desc);
        s.cmd->fallthrough();  // so --out after the subcommand reaches the app
        s.cmd->add_option("--config", s.config_path, "JSON config file (overrides flags)");
        return s;
    };
    // Binds a double/int/string/bool flag to a config key; the key is
    // written only when the flag is actually passed, so file configs and
    // built-in defaults stay authoritative otherwise.
    auto opt = [](Sub& s, const std::string& flag, const std::string& key,
                  const std::string& desc) {
        s.cmd->add_option_function<double>(
            flag, [&s, key](double v) { s.cfg[key] = v; }, desc);
    };
    auto opt_str = [](Sub& s, const std::string& flag, const std::string& key,
                      const std::string& desc) {
        s.cmd->add_option_function<std::string>(
            flag, [&s, key](const std::string& v) { s.cfg[key] = v; }, desc);
    };
    auto opt_int = [](Sub& s, const std::string& flag, const std::string& key,
                      const std::string& desc) {
        s.cmd->add_option_function<int>(flag, [&s, key](int v) { s.cfg[key] = v; }, desc);
    };
    auto opt_vec = [](Sub& s, const std::string& flag, const std::string& key,
                      const std::string& desc) {
        s.cmd->add_option_function<std::vector<double>>(
            flag, [&s, key](const std::vector<double>& v) { s.cfg[key] = v; }, desc);
    };
    auto opt_flag = [](Sub& s, const std::string& flag, const std::string& key,
                       const std::string& desc) {
        s.cmd->add_flag_function(
            flag, [&s, key](std::int64_t n) { s.cfg[key] = n > 0; }, desc);
    };
    auto model_opts = [&](Sub& s) {
        opt_str(s, "--model", "model", std::string("geometry: ") + kModelCatalog);
        opt_int(s, "--dim", "dim", "dimension N >= 2");
        opt(s, "--c", "c", "hyperbolic curvature scale");
        opt(s, "--c0", "c0", "quadratic-tail exponent coefficient");
        opt(s, "--k", "k", "power-tail coefficient");
        opt(s, "--sigma", "sigma", "power-tail exponent defect in (0,2)");
        opt(s, "--p-tail", "p_tail", "superquadratic tail exponent (> 2)");
    };

    {
        Sub& s = add_sub("geom", "geometry profile, identities, conservation classification");
        model_opts(s);
        opt(s, "--rmax", "rmax", "profile radius");
    }
    {
        Sub& s = add_sub("elliptic", "sublinear elliptic profile and growth bounds");
        model_opts(s);
        opt(s, "--m", "m", "nonlinearity exponent (> 1)");
        opt(s, "--u0", "u0", "center value U(0)");
        opt(s, "--rmax", "rmax", "profile radius");
        opt(s, "--T", "T", "blow-up time for the separable check");
        opt(s, "--alpha", "alpha", "center amplitude for the separable check");
    }
    {
        Sub& s = add_sub("barrier", "barrier certificates on a radial window");
        model_opts(s);
        opt(s, "--alpha", "alpha", "barrier decay exponent (> 0)");
        opt(s, "--r0", "r0", "window start");
        opt(s, "--rmax", "rmax", "window end");
        opt(s, "--K", "K", "backward-barrier exponent constant");
        opt(s, "--T", "T", "backward-barrier time horizon");
        opt(s, "--C2", "C2", "diffusion cap multiplier");
        opt(s, "--R0", "R0", "backward-barrier inner radius");
        opt(s, "--l", "l", "log-doubling constant");
        opt(s, "--m", "m", "nonlinearity exponent for the horizon bound");
        opt(s, "--phi-kappa", "phi_kappa", "perturbed-model log-power");
        opt(s, "--phi-K", "phi_K", "perturbed-model curvature constant");
        opt(s, "--phi-r0", "phi_r0", "perturbation-certificate window start");
    }
    {
        Sub& s = add_sub("pme", "porous-medium runs: evolve, truncation, comparison");
        model_opts(s);
        opt(s, "--m", "m", "nonlinearity exponent (> 1)");
        opt(s, "--R", "R", "ball radius");
        opt(s, "--t-end", "t_end", "final time");
        opt(s, "--dt", "dt", "initial (or fixed) time step");
        opt_flag(s, "--fixed-dt", "fixed_dt", "disable adaptive stepping");
        opt_int(s, "--cells", "cells", "uniform cell count (0 = stretched grid)");
        opt(s, "--boundary", "boundary", "Dirichlet trace");
        opt_str(s, "--experiment", "experiment", "evolve | truncation | comparison");
        opt_vec(s, "--snaps", "snaps", "snapshot times");
        opt_vec(s, "--radii", "radii", "nested ball radii (truncation)");
        opt_vec(s, "--i-levels", "i_levels", "positive truncation heights");
        opt_vec(s, "--j-levels", "j_levels", "negative truncation heights");
        opt(s, "--window", "window", "inner stabilization window");
        opt(s, "--drmax", "drmax", "master grid spacing cap (truncation)");
        opt(s, "--cap-lo", "cap_lo", "lower data cap (comparison)");
        opt(s, "--cap-hi", "cap_hi", "upper data cap (comparison)");
        opt_str(s, "--u0-name", "u0_name", "datum: bump, gauss, const, hpow, separable");
        opt(s, "--u0-amp", "u0_amp", "datum amplitude");
        opt(s, "--u0-width", "u0_width", "datum width");
        opt(s, "--u0-p", "u0_p", "datum growth power (hpow)");
    }
    {
        Sub& s = add_sub("blowup", "separable-data blow-up tracking and time fit");
        model_opts(s);
        opt(s, "--m", "m", "nonlinearity exponent (> 1)");
        opt(s, "--T", "T", "separable blow-up time");
        opt(s, "--alpha", "alpha", "separable center amplitude");
        opt(s, "--R", "R", "ball radius");
        opt(s, "--t-end", "t_end", "final time (< T)");
    }
    {
        Sub& s = add_sub("uniq", "approximation-scheme convergence probe");
        model_opts(s);
        opt(s, "--m", "m", "nonlinearity exponent (> 1)");
        opt(s, "--R", "R", "ball radius (refinement mode)");
        opt_str(s, "--mode", "mode", "refinement | domain");
        opt(s, "--p", "p", "datum growth power for (H+1)^p");
        opt_vec(s, "--levels", "levels", "cell counts (refinement) or radii (domain)");
        opt(s, "--t-end", "t_end", "final time");
        opt(s, "--dt", "dt", "fixed time step (coarsest level)");
        opt(s, "--window", "window", "comparison window radius");
    }
    {
        Sub& s = add_sub("sweep", "run independent jobs from a config and merge reports");
        (void)s;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    for (auto& sp : subs) {
        Sub& s = *sp;
        if (!s.cmd->parsed()) continue;
        // Fold the u0_* convenience flags into the nested u0 object.
        for (const char* key : {"name", "amp", "width", "p"}) {
            const std::string flat = std::string("u0_") + key;
            if (s.cfg.contains(flat)) {
                s.cfg["u0"][key] = s.cfg[flat];
                s.cfg.erase(flat);
            }
        }
        if (s.cmd->get_name() == "sweep" && s.config_path.empty()) {
            std::cerr << "config error: sweep requires --config FILE\n";
            return kExitConfig;
        }
        return dispatch(s.cmd->get_name(), std::move(s.cfg), s.config_path, outdir);
    }
    std::cerr << "config error: no subcommand\n";
    return kExitConfig;
}
