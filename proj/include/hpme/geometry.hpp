#pragma once
// Model functions, radial grids with weighted cell measures, the H-function
// (primitive of the volume-to-surface ratio, satisfying Laplacian(H) = 1),
// curvature profiles and the stochastic-completeness classifier.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace hpme {

struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModelKind {
    euclidean,
    hyperbolic,
    power_splice,
    quadratic_splice,
    superquadratic_splice,
    custom,
};

// Rotationally symmetric metric coefficient psi with psi(0)=0, psi'(0)=1.
// Besides the raw evaluators this carries overflow-stable channels
// (log psi, psi'/psi, psi''/psi): exponential tails exceed double range at
// desk radii (e.g. psi(200) ~ e^20000), so all analysis code must consume
// the stable channels and leave the raw ones to moderate radii.
class ModelFunction {
  public:
    ModelKind kind = ModelKind::custom;
    std::string name = "custom";
    std::map<std::string, double> params;

    std::function<double(double)> psi_fn, dpsi_fn, ddpsi_fn;
    std::function<double(double)> log_psi_fn, dlog_fn, ratio2_fn;

    double d3psi0 = 0.0;        // psi'''(0), used by series starts near r=0
    bool has_splice = false;    // one-sided psi'' recorded at splice_r
    double splice_r = 0.0;
    double ddpsi_jump = 0.0;    // psi''(splice_r+) - psi''(splice_r-)

    double psi(double r) const { return psi_fn(check(r)); }
    double dpsi(double r) const { return dpsi_fn(check(r)); }
    // One-sided (right) second derivative at the splice point.
    double ddpsi(double r) const { return ddpsi_fn(check(r)); }
    double log_psi(double r) const { return log_psi_fn(check(r)); }
    double dlog(double r) const { return dlog_fn(check(r)); }    // psi'/psi
    double ratio2(double r) const { return ratio2_fn(check(r)); }  // psi''/psi

  private:
    static double check(double r) {
        if (r < 0.0 || !std::isfinite(r)) throw std::domain_error("model function: r must be >= 0");
        return r;
    }
};

// (psi, psi', psi'') at r; negative r is a domain error.  At a splice point
// the second derivative is the right-sided value (the jump is recorded on
// the model itself).
std::tuple<double, double, double> eval_model(const ModelFunction& model, double r);

ModelFunction make_euclidean();
ModelFunction make_hyperbolic(double c);
// Piecewise psi: sinh(c r)/c on [0,1), a*exp(C0 r^2/2) - b on [1,inf),
// C^1-matched; the psi'' jump at r=1 is recorded.
ModelFunction splice_quadratic_psi(double C0);
// Same construction with tail a*exp(k r^(2-sigma)) - b, 0 < sigma < 2.
ModelFunction splice_power_psi(double k, double sigma);
// Tail a*exp(r^p) - b with p > 2 (volume grows too fast for conservation).
ModelFunction splice_superquadratic_psi(double p);

// Nonuniform mesh 0 = r_0 < ... < r_M = R.  Cell i spans the interval
// between adjacent face midpoints and carries the weighted measure
// w_i = integral of psi^(N-1) over the cell (2-point Gauss per cell, exact
// for cubic integrands).  Weights that exceed double range saturate to +inf
// and clear weights_finite; only the parabolic solver consumes weights and
// it requires the flag.
struct RadialGrid {
    std::vector<double> nodes;
    std::vector<double> faces;    // nodes.size()+1 entries, faces[0]=0, back()=R
    std::vector<double> weights;  // one per node/cell
    bool weights_finite = true;

    std::size_t size() const { return nodes.size(); }
    double rmax() const { return nodes.back(); }
};

struct GridSpec {
    double dr0 = 1e-3;    // first interval near the r=0 coordinate singularity
    double ratio = 1.05;  // geometric stretching factor
    double drmax = 0.02;  // interval cap
};

RadialGrid make_grid(const ModelFunction& model, int N, double R, const GridSpec& spec = {},
                     const std::vector<double>& include = {});
RadialGrid make_uniform_grid(const ModelFunction& model, int N, double R, int cells);
// Builds faces/weights over an explicit ascending node list starting at 0;
// used by the nested-ball harnesses, whose ball grids must be exact prefixes
// of one master grid.
RadialGrid make_grid_from_nodes(const ModelFunction& model, int N, std::vector<double> nodes);

// Scalar field sampled on a grid.
struct RadialField {
    const RadialGrid* grid = nullptr;
    std::vector<double> values;
};

struct CurvatureSamples {
    std::vector<double> Ric_o;   // -(N-1) psi''/psi
    std::vector<double> K_w;     // -psi''/psi   (radial sectional curvature)
    std::vector<double> K_orth;  // (1-psi'^2)/psi^2
};

// Sampled geometry data: psi, drift (N-1)psi'/psi, H and its first three
// derivatives, curvatures.  Immutable after construction; safe to share.
struct GeometryProfile {
    ModelFunction model;
    int N = 2;
    RadialGrid grid;
    std::vector<double> psi, log_psi, drift;  // drift[0] = +inf (singular)
    std::vector<double> H, dH, ddH, dddH;
    CurvatureSamples curv;

    // Monotone cubic Hermite interpolation of H and H' between nodes.
    double H_at(double r) const;
    double dH_at(double r) const;
};

// Integrates H via its defining first-order system g' = 1-(N-1)(psi'/psi)g,
// H' = g, with a series start at r_eps = 1e-4 (never by nested quadrature of
// psi^(N-1), which overflows for exponential psi).  H''' comes from
// differentiating the closed ODE analytically.
GeometryProfile compute_H(const ModelFunction& model, int N, RadialGrid grid);

CurvatureSamples curvature_profile(const ModelFunction& model, int N, const RadialGrid& grid);

enum class Completeness { complete, incomplete, undecided };

struct CompletenessReport {
    Completeness verdict = Completeness::undecided;
    double R_probe = 0.0;
    double H_probe = 0.0;           // H(R_probe)
    double growth_exponent = 0.0;   // fitted log-log slope (complete branch)
    double H_infinity_est = 0.0;    // finite-limit estimate (incomplete branch)
    double tail_ratio = 0.0;        // decay ratio of doubling-window tail integrals
    double tail_sum = 0.0;          // geometric tail estimate of H(inf)-H(R_probe)
    std::string detail;
};

// Conservation-of-mass dichotomy on model manifolds: H unbounded iff the
// Brownian motion is conserved.  Decision rule: declare incomplete when the
// doubling-window integrals of psi/((N-1)psi') decay geometrically
// (ratio <= 0.75) and their geometric sum is < 0.1*H(R_probe); declare
// complete when H(R_probe) >= 2 with fitted log-log slope >= 0.02;
// otherwise report undecided (never guess).
CompletenessReport stochastic_completeness(const GeometryProfile& profile, double R_probe);

// Surface-measure comparison: psi_lo^(N-1) <= psi_hi^(N-1) at every radius
// (checked via the stable log channel).
bool surface_measure_ordered(const ModelFunction& lo, const ModelFunction& hi, int N,
                             const std::vector<double>& radii);

}  // namespace hpme
