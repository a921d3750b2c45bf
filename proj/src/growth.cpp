#include "hpme/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hpme {

double weighted_norm(const RadialDatum& f, double b, double m, const GeometryProfile& profile) {
    if (profile.grid.size() == 0) throw std::invalid_argument("weighted_norm: empty grid");
    if (!(m > 1.0)) throw std::invalid_argument("weighted_norm: need m > 1");
    if (b < 0.0) throw std::invalid_argument("weighted_norm: need b >= 0");
    const double e = 1.0 / (m - 1.0);
    double best = 0.0;
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        const double denom = std::pow(profile.H[i] + 1.0 + b, e);
        best = std::max(best, std::abs(f.f(profile.grid.nodes[i])) / denom);
    }
    return best;
}

GrowthClass classify_growth(const RadialDatum& f, double m, const GeometryProfile& profile,
                            std::vector<double> probe_radii) {
    if (probe_radii.size() < 3)
        throw std::invalid_argument("classify_growth: need at least 3 probe radii");
    if (!std::is_sorted(probe_radii.begin(), probe_radii.end()))
        throw std::invalid_argument("classify_growth: probe radii must be increasing");
    if (probe_radii.back() > profile.grid.rmax() + 1e-9)
        throw std::invalid_argument("classify_growth: probe beyond profile range");

    GrowthClass out;
    out.probe_radii = probe_radii;
    const double e = 1.0 / (m - 1.0);
    for (double R : probe_radii) {
        double s = 0.0;
        for (std::size_t i = 0; i < profile.grid.size(); ++i) {
            const double r = profile.grid.nodes[i];
            if (r < 0.5 * R || r > R) continue;
            if (!(profile.H[i] > 0.0)) continue;
            s = std::max(s, std::abs(f.f(r)) / std::pow(profile.H[i], e));
        }
        out.window_sups.push_back(s);
    }
    const auto& s = out.window_sups;
    const std::size_t n = s.size();
    const double last = s[n - 1], prev = s[n - 2];

    // Stabilized tail windows: the limsup has converged.
    if (std::abs(last - prev) <= 0.02 * std::max(last, 1e-300) && last > 1e-12) {
        out.kind = GrowthKind::critical;
        out.limsup_estimate = last;
        out.note = "tail window sups stabilized within 2%";
        return out;
    }
    bool nonincreasing = true, nondecreasing = true;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (s[i + 1] > s[i] * 1.02 + 1e-300) nonincreasing = false;
        if (s[i + 1] < s[i] * 0.98) nondecreasing = false;
    }
    if (nonincreasing && (last <= 1e-12 || last < prev)) {
        out.kind = GrowthKind::subcritical;
        out.limsup_estimate = 0.0;
        out.note = "window sups decay toward zero";
        return out;
    }
    if (nondecreasing && last > prev) {
        out.kind = GrowthKind::supercritical;
        out.limsup_estimate = std::numeric_limits<double>::infinity();
        out.note = "window sups keep growing";
        return out;
    }
    out.kind = GrowthKind::undecided;
    out.undecided_flag = true;
    out.note = "window sups non-monotone beyond tolerance";
    return out;
}

MaxTimeReport max_existence_time(const RadialDatum& f, double m, const GeometryProfile& profile,
                                 double K1, std::vector<double> probe_radii) {
    if (!(K1 > 0.0)) throw std::invalid_argument("max_existence_time: need K1 > 0");
    MaxTimeReport rep;
    rep.K1 = K1;
    rep.growth = classify_growth(f, m, profile, std::move(probe_radii));
    switch (rep.growth.kind) {
        case GrowthKind::subcritical:
            rep.T = std::numeric_limits<double>::infinity();
            break;
        case GrowthKind::supercritical:
            rep.T = 0.0;
            rep.warning = "supercritical data: no positive existence horizon";
            break;
        case GrowthKind::critical: {
            const double L = rep.growth.limsup_estimate;
            rep.T = std::pow(K1, m - 1.0) / ((m - 1.0) * std::pow(L, m - 1.0));
            break;
        }
        case GrowthKind::undecided:
            rep.T = std::numeric_limits<double>::quiet_NaN();
            rep.warning = "growth class undecided: no horizon reported";
            break;
    }
    return rep;
}

MaxTimeReport max_existence_time(const RadialDatum& f, double m, const GeometryProfile& profile,
                                 double K1) {
    const double R = profile.grid.rmax();
    return max_existence_time(f, m, profile, K1, {0.5 * R, 0.75 * R, R});
}

}  // namespace hpme
