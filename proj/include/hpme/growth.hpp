#pragma once
// Weighted sup-norms |f|/(H+1+b)^(1/(m-1)), growth classification of radial
// data against the H^(1/(m-1)) scale, and the induced existence-time bound.

#include <functional>
#include <string>
#include <vector>

#include "hpme/geometry.hpp"

namespace hpme {

// Radial datum: a signed amplitude sampler, with an optional label used in
// reports.
struct RadialDatum {
    std::function<double(double)> f;
    std::string tag;
};

enum class GrowthKind { subcritical, critical, supercritical, undecided };

struct GrowthClass {
    GrowthKind kind = GrowthKind::undecided;
    double limsup_estimate = 0.0;  // meaningful for the critical variant (> 0)
    std::vector<double> probe_radii;
    std::vector<double> window_sups;  // running sup on [R/2, R] per probe
    bool undecided_flag = false;
    std::string note;
};

// max over grid nodes of |f(r)| / (H(r)+1+b)^(1/(m-1)).
double weighted_norm(const RadialDatum& f, double b, double m, const GeometryProfile& profile);

// Estimates limsup_{r->inf} |f|/H^(1/(m-1)) from tail windows [R/2, R] for
// the given probe radii (>= 3, increasing).  The window sups must stabilize
// within 2% before the datum is called critical; clean monotone decay/growth
// is classified sub/supercritical; anything else is flagged undecided.
GrowthClass classify_growth(const RadialDatum& f, double m, const GeometryProfile& profile,
                            std::vector<double> probe_radii);

struct MaxTimeReport {
    double T = 0.0;  // +inf for subcritical data, 0 for supercritical
    GrowthClass growth;
    double K1 = 0.0;
    std::string warning;
};

// Existence-horizon estimate T = K1^(m-1) / ((m-1) L^(m-1)) where L is the
// measured critical value.  K1 is the measured sandwich constant supplied by
// the elliptic module (its value, not a hardcoded stand-in, decides the
// scale).
MaxTimeReport max_existence_time(const RadialDatum& f, double m, const GeometryProfile& profile,
                                 double K1);
MaxTimeReport max_existence_time(const RadialDatum& f, double m, const GeometryProfile& profile,
                                 double K1, std::vector<double> probe_radii);

}  // namespace hpme
