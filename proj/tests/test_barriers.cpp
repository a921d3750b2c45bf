// Barriers module: the H-derivative hypothesis, the decaying barrier w with
// its capped extension, the growth weight B, the log-doubling condition,
// the backward space-time barrier, and the perturbed model function.
#include <doctest.h>

#include <cmath>

#include "hpme/barriers.hpp"
#include "hpme/geometry.hpp"

using namespace hpme;

namespace {

GeometryProfile profile_of(const ModelFunction& m, int N, double R) {
    return compute_H(m, N, make_grid(m, N, R));
}

}  // namespace

TEST_CASE("H-derivative hypothesis across geometries") {
    const GeometryProfile eu = profile_of(make_euclidean(), 3, 60.0);
    const HypothesisReport he = check_H_hypothesis(eu, 2.0, 60.0);
    CHECK(he.holds);
    CHECK(he.K_meas == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(he.K_hat == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(he.ddH_bound_ok);
    CHECK(he.chain_ok);

    const GeometryProfile hy = profile_of(make_hyperbolic(1.0), 2, 60.0);
    const HypothesisReport hh = check_H_hypothesis(hy, 2.0, 60.0);
    CHECK(hh.holds);
    CHECK(hh.K_meas == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));

    const GeometryProfile qu = profile_of(splice_quadratic_psi(1.0), 3, 60.0);
    const HypothesisReport hq = check_H_hypothesis(qu, 2.0, 60.0);
    CHECK(hq.holds);
    CHECK(hq.K_meas == doctest::Approx(0.12259).epsilon(2e-3));
    CHECK(hq.ddH_bound_ok);
    CHECK(hq.ddH_bound_margin == doctest::Approx(hq.K_hat - 0.07632).epsilon(5e-3));
    CHECK(hq.chain_ok);

    CHECK_THROWS_AS(check_H_hypothesis(eu, 0.0, 60.0), std::invalid_argument);
    CHECK_THROWS_AS(check_H_hypothesis(eu, 2.0, 80.0), std::invalid_argument);
}

TEST_CASE("decaying barrier certificate with frozen margins") {
    const double alpha = 3.5;

    const GeometryProfile hy = profile_of(make_hyperbolic(1.0), 2, 60.0);
    const BarrierW bh = build_barrier_w(hy, alpha, 2.0);
    CHECK(bh.pass);
    CHECK(bh.C_required ==
          doctest::Approx(2.0 * bh.K + 2.0 * 3.5 * 4.5 + 3.5 + 4.0 * 3.5 * bh.K_hat)
              .epsilon(1e-9));
    CHECK(bh.C_required == doctest::Approx(54.798989873223334).epsilon(1e-6));
    CHECK(bh.min_margin == doctest::Approx(0.8706).epsilon(2e-3));
    CHECK(bh.monotone_ok);
    CHECK(bh.drift_bound_ok);
    CHECK(bh.fd_crosscheck <= 1e-4);
    CHECK(bh.z_pass);
    CHECK(bh.z_min_margin > 1e-9);

    const GeometryProfile qu = profile_of(splice_quadratic_psi(1.0), 3, 60.0);
    const BarrierW bq = build_barrier_w(qu, alpha, 2.0);
    CHECK(bq.pass);
    CHECK(bq.C_required == doctest::Approx(56.88).epsilon(2e-3));
    CHECK(bq.min_margin == doctest::Approx(0.2077).epsilon(5e-2));
    CHECK(bq.z_pass);

    const GeometryProfile eu = profile_of(make_euclidean(), 3, 60.0);
    const BarrierW be = build_barrier_w(eu, alpha, 2.0);
    CHECK(be.pass);
    CHECK(be.min_margin == doctest::Approx(1.5155).epsilon(5e-2));

    // The window start must be inside the grid with H(r0) > 0.
    CHECK_THROWS_AS(build_barrier_w(eu, alpha, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_barrier_w(eu, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("growth weight B and its power-tail asymptote") {
    const ModelFunction pw = splice_power_psi(1.0, 1.0);
    // Power-tail asymptote: B(r) k (2-sigma)^2 / r^sigma -> 1.
    CHECK(B_value(pw, 100.0) / 100.0 == doctest::Approx(0.994338).epsilon(1e-4));

    const GeometryProfile prof = profile_of(pw, 3, 20.0);
    const BWeight bw = compute_B(prof);
    REQUIRE(bw.B.size() == prof.grid.size());
    CHECK_FALSE(bw.flagged_nonpositive_log);
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
        if (prof.grid.nodes[i] < 2.0)
            CHECK(bw.B[i] == 1.0);
        else
            CHECK(bw.B[i] ==
                  doctest::Approx(B_value(prof.model, prof.grid.nodes[i])).epsilon(1e-12));
    }
}

TEST_CASE("log-doubling condition: frozen sups and verdicts") {
    const ModelFunction hy = make_hyperbolic(1.0);
    const LogConditionReport lh = check_log_condition(hy, 1.6, 60.0);
    CHECK_FALSE(lh.holds);
    CHECK(lh.sup_ratio == doctest::Approx(1.7885977548433258).epsilon(1e-9));
    CHECK(lh.arg_sup == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(check_log_condition(hy, 1.8, 60.0).holds);

    const ModelFunction qu = splice_quadratic_psi(1.0);
    const LogConditionReport lq = check_log_condition(qu, 2.25, 60.0);
    CHECK(lq.holds);
    CHECK(lq.sup_ratio == doctest::Approx(2.176967141978497).epsilon(1e-9));

    const ModelFunction eu = make_euclidean();
    const LogConditionReport le = check_log_condition(eu, 1.6, 60.0);
    CHECK(le.holds);
    CHECK(le.sup_ratio == doctest::Approx(std::log(3.0) / std::log(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(check_log_condition(eu, 0.0, 60.0), std::invalid_argument);
    CHECK_THROWS_AS(check_log_condition(eu, 1.6, 2.0), std::invalid_argument);
}

TEST_CASE("backward barrier: admissible and broken parameter sets") {
    const GeometryProfile hy = profile_of(make_hyperbolic(1.0), 2, 40.0);

    const BackwardBarrier good = build_backward_barrier(hy, 0.2, 0.2, 1.0, 3.0, 40.0);
    CHECK(good.constraint_ok);
    CHECK(good.constraint_margin == doctest::Approx(1.0 - 0.6).epsilon(1e-12));
    CHECK(good.cert_pass);
    CHECK(good.min_margin > 1e-9);
    CHECK(good.boundary_calibration_ok);
    CHECK(good.lambda >= 1.0);
    // Horizon bound (m-1)K / (2 l ((N-1)(m-1) + 2m)) at l=1.6, m=2, N=2.
    CHECK(good.horizon_bound == doctest::Approx(0.0125).epsilon(1e-12));

    // 2T + K > 1/C2: reported as violated, never silently repaired. The
    // pointwise certificate is still evaluated and reported.
    const BackwardBarrier bad = build_backward_barrier(hy, 0.5, 0.3, 2.0, 3.0, 40.0);
    CHECK_FALSE(bad.constraint_ok);
    CHECK(bad.constraint_margin == doctest::Approx(0.5 - 1.1).epsilon(1e-12));

    CHECK_THROWS_AS(build_backward_barrier(hy, 0.0, 0.2, 1.0, 3.0, 40.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_backward_barrier(hy, 0.2, 0.2, 1.0, 3.0, 80.0),
                    std::invalid_argument);
}

TEST_CASE("perturbed model function: matching, curvature and drift bounds") {
    const PhiPerturbation ph = build_phi_perturbation(1.0, 1.5, 0.5, 3.0);
    // C^1 matching at R0 = 2 in closed form:
    //   den = C0 R0 - kappa/(R0 log R0), A = (log R0)^kappa e^{-C0 R0^2/2}/den,
    //   B = R0 - 1/den.
    CHECK(ph.R0 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ph.A == doctest::Approx(0.0850778712).epsilon(1e-8));
    CHECK(ph.B == doctest::Approx(0.9106501284).epsilon(1e-8));
    CHECK(ph.K_pert == doctest::Approx(3.0).epsilon(1e-12));  // default 2*kappa
    CHECK(ph.curv_pass);
    CHECK(ph.curv_min_margin == doctest::Approx(0.542824).epsilon(1e-3));
    CHECK(ph.pert_pass);
    CHECK(ph.pert_needed_K == doctest::Approx(2.440134).epsilon(1e-4));

    // kappa = 1: the measured drift gap 2.428 exceeds the default constant
    // 2 kappa = 2; the certificate is reported failing, never repaired.
    const PhiPerturbation tight = build_phi_perturbation(1.0, 1.0, 0.5, 3.0);
    CHECK(tight.A == doctest::Approx(0.0733641638).epsilon(1e-8));
    CHECK(tight.B == doctest::Approx(1.2179266720).epsilon(1e-8));
    CHECK(tight.curv_pass);
    CHECK_FALSE(tight.pert_pass);
    CHECK(tight.pert_needed_K == doctest::Approx(2.428).epsilon(1e-3));

    // phi is continuous and C^1 at its splice radius.
    CHECK(ph.phi.psi(ph.R0 - 1e-10) == doctest::Approx(ph.phi.psi(ph.R0)).epsilon(1e-7));
    CHECK(ph.phi.dpsi(ph.R0 - 1e-7) == doctest::Approx(ph.phi.dpsi(ph.R0)).epsilon(1e-4));

    // An explicitly undersized perturbation constant fails the same way.
    PhiOptions opts;
    opts.K_pert = 0.05;
    const PhiPerturbation weak = build_phi_perturbation(1.0, 1.5, 0.5, 3.0, opts);
    CHECK_FALSE(weak.pert_pass);
    CHECK(weak.curv_pass);

    // Precondition kappa > K/C0.
    CHECK_THROWS_AS(build_phi_perturbation(1.0, 0.4, 0.5, 3.0), std::invalid_argument);
}
