#include "hpme/geometry.hpp"

#include <algorithm>
#include <cassert>

#include "hpme/ode.hpp"

namespace hpme {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(sinh(x)) without overflow: x + log1p(-exp(-2x)) - log 2.
double log_sinh(double x) {
    if (x <= 0.0) return -kInf;
    if (x < 1e-3) return std::log(x) + x * x / 6.0;  // sinh x ~ x(1+x^2/6)
    return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0);
}

// coth(x), stable for both small and large x.
double coth(double x) {
    if (x < 1e-5) return 1.0 / x + x / 3.0;
    if (x > 20.0) return 1.0 + 2.0 * std::exp(-2.0 * x);
    return 1.0 / std::tanh(x);
}

// Shared C^1 splice: psi = sinh(c r)/c on [0,1), a*exp(k r^q) - b on [1,inf).
// Matching at r=1 fixes a and b; the inner curvature c^2 = k q (q-1+k q)
// equals the tail's psi''/psi at 1+ so the psi'' jump stays small (it is
// still recorded: the tail is not a pure exponential of r).
ModelFunction make_splice(ModelKind kind, std::string name, double k, double q,
                          std::map<std::string, double> params) {
    if (!(k > 0.0) || !(q > 0.0)) throw ConstructionError("splice: need k > 0 and q > 0");
    const double c2 = k * q * (q - 1.0 + k * q);
    if (!(c2 > 0.0)) throw ConstructionError("splice: matching curvature c^2 <= 0");
    const double c = std::sqrt(c2);
    const double a = std::cosh(c) / (k * q * std::exp(k));
    const double b = a * std::exp(k) - std::sinh(c) / c;
    if (!(a > 0.0) || !std::isfinite(b)) throw ConstructionError("splice: no admissible match");

    auto E = [k, q](double r) { return k * std::pow(r, q); };
    auto dE = [k, q](double r) { return k * q * std::pow(r, q - 1.0); };
    auto ddE = [k, q](double r) { return k * q * (q - 1.0) * std::pow(r, q - 2.0); };
    // 1 - (b/a) e^{-E}, the relative distance of the tail from a pure exponential.
    auto denom = [a, b, E](double r) { return 1.0 - (b / a) * std::exp(-E(r)); };

    ModelFunction m;
    m.kind = kind;
    m.name = std::move(name);
    m.params = std::move(params);
    m.d3psi0 = c2;  // sinh branch: psi'''(0) = c^2
    m.has_splice = true;
    m.splice_r = 1.0;

    m.psi_fn = [c, a, b, E](double r) {
        if (r < 1.0) return std::sinh(c * r) / c;
        return a * std::exp(E(r)) - b;
    };
    m.dpsi_fn = [c, a, dE, E](double r) {
        if (r < 1.0) return std::cosh(c * r);
        return a * dE(r) * std::exp(E(r));
    };
    m.ddpsi_fn = [c, a, dE, ddE, E](double r) {
        if (r < 1.0) return c * std::sinh(c * r);
        return a * (ddE(r) + dE(r) * dE(r)) * std::exp(E(r));
    };
    m.log_psi_fn = [c, a, b, E](double r) {
        if (r < 1.0) return log_sinh(c * r) - std::log(c);
        return std::log(a) + E(r) + std::log1p(-(b / a) * std::exp(-E(r)));
    };
    m.dlog_fn = [c, dE, denom](double r) {
        if (r < 1.0) return c * coth(c * r);
        return dE(r) / denom(r);
    };
    m.ratio2_fn = [c2, dE, ddE, denom](double r) {
        if (r < 1.0) return c2;
        return (ddE(r) + dE(r) * dE(r)) / denom(r);
    };
    m.ddpsi_jump = m.ddpsi_fn(1.0) - c * std::sinh(c);
    return m;
}

}  // namespace

std::tuple<double, double, double> eval_model(const ModelFunction& model, double r) {
    return {model.psi(r), model.dpsi(r), model.ddpsi(r)};
}

ModelFunction make_euclidean() {
    ModelFunction m;
    m.kind = ModelKind::euclidean;
    m.name = "euclidean";
    m.psi_fn = [](double r) { return r; };
    m.dpsi_fn = [](double) { return 1.0; };
    m.ddpsi_fn = [](double) { return 0.0; };
    m.log_psi_fn = [](double r) { return std::log(r); };
    m.dlog_fn = [](double r) { return 1.0 / r; };
    m.ratio2_fn = [](double) { return 0.0; };
    return m;
}

ModelFunction make_hyperbolic(double c) {
    if (!(c > 0.0)) throw ConstructionError("hyperbolic: curvature scale c must be > 0");
    ModelFunction m;
    m.kind = ModelKind::hyperbolic;
    m.name = "hyperbolic";
    m.params = {{"c", c}};
    m.d3psi0 = c * c;
    m.psi_fn = [c](double r) { return std::sinh(c * r) / c; };
    m.dpsi_fn = [c](double r) { return std::cosh(c * r); };
    m.ddpsi_fn = [c](double r) { return c * std::sinh(c * r); };
    m.log_psi_fn = [c](double r) { return log_sinh(c * r) - std::log(c); };
    m.dlog_fn = [c](double r) { return c * coth(c * r); };
    m.ratio2_fn = [c](double) { return c * c; };
    return m;
}

ModelFunction splice_quadratic_psi(double C0) {
    if (!(C0 > 0.0)) throw ConstructionError("quadratic splice: C0 must be > 0");
    // Tail a*exp(C0 r^2 / 2) - b, i.e. k = C0/2, q = 2; then c^2 = C0(1+C0).
    return make_splice(ModelKind::quadratic_splice, "quadratic", C0 / 2.0, 2.0, {{"C0", C0}});
}

ModelFunction splice_power_psi(double k, double sigma) {
    if (!(k > 0.0)) throw ConstructionError("power splice: k must be > 0");
    if (!(sigma > 0.0 && sigma < 2.0)) throw ConstructionError("power splice: need 0 < sigma < 2");
    return make_splice(ModelKind::power_splice, "power", k, 2.0 - sigma,
                       {{"k", k}, {"sigma", sigma}});
}

ModelFunction splice_superquadratic_psi(double p) {
    if (!(p > 2.0)) throw ConstructionError("superquadratic splice: p must be > 2");
    return make_splice(ModelKind::superquadratic_splice, "superquadratic", 1.0, p, {{"p", p}});
}

namespace {

RadialGrid finalize_grid(const ModelFunction& model, int N, std::vector<double> nodes) {
    RadialGrid g;
    g.nodes = std::move(nodes);
    const std::size_t M = g.nodes.size();
    const double R = g.nodes.back();
    g.faces.resize(M + 1);
    g.faces.front() = 0.0;
    g.faces.back() = R;
    for (std::size_t i = 1; i < M; ++i) g.faces[i] = 0.5 * (g.nodes[i - 1] + g.nodes[i]);
    g.weights.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double lo = g.faces[i], hi = g.faces[i + 1], h = hi - lo;
        double w = 0.0;
        for (const auto& [x, gw] : gauss2()) {
            const double s = lo + 0.5 * h * (1.0 + x);
            w += gw * std::exp((N - 1) * model.log_psi(s));
        }
        w *= 0.5 * h;
        if (!std::isfinite(w)) {
            w = kInf;
            g.weights_finite = false;
        }
        g.weights[i] = w;
    }
    return g;
}

}  // namespace

RadialGrid make_grid(const ModelFunction& model, int N, double R, const GridSpec& spec,
                     const std::vector<double>& include) {
    if (N < 2) throw ConstructionError("grid: dimension must be >= 2");
    if (!(R > 0.0)) throw ConstructionError("grid: R must be > 0");
    std::vector<double> nodes{0.0};
    double dr = spec.dr0;
    while (nodes.back() < R - 1e-12) {
        nodes.push_back(std::min(nodes.back() + dr, R));
        dr = std::min(dr * spec.ratio, spec.drmax);
    }
    nodes.back() = R;
    // Splice the requested radii in, replacing any node they nearly coincide with.
    for (double x : include) {
        if (x > 0.0 && x < R) nodes.push_back(x);
    }
    std::sort(nodes.begin(), nodes.end());
    std::vector<double> uniq;
    for (double x : nodes) {
        if (!uniq.empty() && x - uniq.back() <= 1e-9) {
            uniq.back() = x;  // prefer the later (requested) position
            continue;
        }
        uniq.push_back(x);
    }
    uniq.front() = 0.0;
    uniq.back() = R;
    return finalize_grid(model, N, std::move(uniq));
}

RadialGrid make_uniform_grid(const ModelFunction& model, int N, double R, int cells) {
    if (cells < 2) throw ConstructionError("grid: need at least 2 cells");
    std::vector<double> nodes(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i) nodes[static_cast<std::size_t>(i)] = R * i / cells;
    return finalize_grid(model, N, std::move(nodes));
}

RadialGrid make_grid_from_nodes(const ModelFunction& model, int N, std::vector<double> nodes) {
    if (nodes.size() < 3 || nodes.front() != 0.0)
        throw ConstructionError("grid: node list must start at 0 with at least 3 nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1])) throw ConstructionError("grid: nodes must be ascending");
    return finalize_grid(model, N, std::move(nodes));
}

namespace {

// Cubic Hermite on the segment containing r, built from node values/slopes.
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

}  // namespace

double GeometryProfile::H_at(double r) const { return hermite(grid.nodes, H, dH, r); }
double GeometryProfile::dH_at(double r) const { return hermite(grid.nodes, dH, ddH, r); }

CurvatureSamples curvature_profile(const ModelFunction& model, int N, const RadialGrid& grid) {
    CurvatureSamples c;
    const std::size_t M = grid.size();
    c.Ric_o.resize(M);
    c.K_w.resize(M);
    c.K_orth.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const double r = grid.nodes[i];
        double kw, korth;
        if (r == 0.0) {
            // All curvatures share the r->0 limit -psi'''(0).
            kw = -model.d3psi0;
            korth = kw;
        } else {
            kw = -model.ratio2(r);
            const double dl = model.dlog(r);
            korth = std::exp(-2.0 * model.log_psi(r)) - dl * dl;
        }
        c.K_w[i] = kw;
        c.Ric_o[i] = (N - 1) * kw;
        c.K_orth[i] = korth;
    }
    return c;
}

GeometryProfile compute_H(const ModelFunction& model, int N, RadialGrid grid) {
    if (N < 2) throw ConstructionError("compute_H: dimension must be >= 2");
    GeometryProfile p;
    p.model = model;
    p.N = N;
    p.grid = std::move(grid);
    const std::size_t M = p.grid.size();
    p.psi.resize(M);
    p.log_psi.resize(M);
    p.drift.resize(M);
    p.H.resize(M);
    p.dH.resize(M);
    p.ddH.resize(M);
    p.dddH.resize(M);

    // Series start: g(r) = r/N + a3 r^3, a3 = -2(N-1)p3/(N(N+2)), p3 = psi'''(0)/6.
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
    for (std::size_t i = 0; i < M; ++i) {
        const double r = p.grid.nodes[i];
        double Hv, gv;
        if (r <= r_eps) {
            Hv = series_H(r);
            gv = series_g(r);
        } else {
            integrate_to<2>(rhs, t, y, r, 1e-12, 1e-14, &dt_hint);
            Hv = y[0];
            gv = y[1];
        }
        p.H[i] = Hv;
        p.dH[i] = gv;
        if (r == 0.0) {
            p.psi[i] = 0.0;
            p.log_psi[i] = -kInf;
            p.drift[i] = kInf;
            p.ddH[i] = 1.0 / N;
            p.dddH[i] = 0.0;
        } else {
            const double dl = model.dlog(r);
            p.psi[i] = model.psi(r);  // may overflow to +inf at extreme radii
            p.log_psi[i] = model.log_psi(r);
            p.drift[i] = (N - 1) * dl;
            const double Hpp = 1.0 - (N - 1) * dl * gv;
            // (psi'/psi)' = psi''/psi - (psi'/psi)^2
            const double dlp = model.ratio2(r) - dl * dl;
            p.ddH[i] = Hpp;
            p.dddH[i] = -(N - 1) * (dlp * gv + dl * Hpp);
        }
    }
    p.curv = curvature_profile(model, N, p.grid);
    return p;
}

CompletenessReport stochastic_completeness(const GeometryProfile& profile, double R_probe) {
    if (R_probe > profile.grid.rmax() + 1e-9)
        throw std::domain_error("stochastic_completeness: probe beyond profile range");
    const ModelFunction& model = profile.model;
    const int N = profile.N;
    CompletenessReport rep;
    rep.R_probe = R_probe;
    rep.H_probe = profile.H_at(R_probe);

    // Tail estimate first: near the stationary value of the H' equation,
    // H' ~ psi/((N-1)psi'), so doubling-window integrals of that quantity
    // bound the remaining growth of H when they decay geometrically.
    auto gstar = [&](double r) { return 1.0 / ((N - 1) * model.dlog(r)); };
    const double I0 = gauss_integrate(gstar, R_probe, 2.0 * R_probe);
    const double I1 = gauss_integrate(gstar, 2.0 * R_probe, 4.0 * R_probe);
    rep.tail_ratio = I0 > 0 ? I1 / I0 : 0.0;
    if (rep.tail_ratio <= 0.75) {
        rep.tail_sum = I0 / (1.0 - rep.tail_ratio);
        if (rep.tail_sum < 0.1 * rep.H_probe) {
            rep.verdict = Completeness::incomplete;
            rep.H_infinity_est = rep.H_probe + rep.tail_sum;
            rep.detail = "tail integrals decay geometrically; H has a finite limit";
            return rep;
        }
    }
    const double H_half = profile.H_at(0.5 * R_probe);
    if (rep.H_probe >= 2.0 && H_half > 0.0) {
        rep.growth_exponent = std::log(rep.H_probe / H_half) / std::log(2.0);
        if (rep.growth_exponent >= 0.02) {
            rep.verdict = Completeness::complete;
            rep.detail = "H keeps growing at the probe radius";
            return rep;
        }
    }
    rep.verdict = Completeness::undecided;
    rep.detail = "probe radius too small to separate divergence from a finite limit";
    return rep;
}

bool surface_measure_ordered(const ModelFunction& lo, const ModelFunction& hi, int N,
                             const std::vector<double>& radii) {
    for (double r : radii) {
        if (r <= 0.0) continue;
        if ((N - 1) * (lo.log_psi(r) - hi.log_psi(r)) > 1e-12) return false;
    }
    return true;
}

}  // namespace hpme
