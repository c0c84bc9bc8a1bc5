#pragma once

// Empirical verification of the semigroup mapping/contraction bounds and the
// fractional Morrey embedding on sampled random fields.

#include <cmath>
#include <cstdint>
#include <vector>

#include "roughbsde/params.hpp"
#include "roughbsde/synth.hpp"

namespace roughbsde {

struct SemigroupMappingReport {
    double c_star = 0.0;          // max over samples, t of the normalized ratio
    double fitted_slope = 0.0;    // log-log slope of ||P(t)w||_{H^{1+delta}} in t
    double expected_slope = 0.0;  // -(1+delta+beta)/2
    std::vector<double> t_grid;
    std::vector<double> mean_norm;  // mean over samples of the un-normalized norm
};

// Ratio ||P(t)w||_{H^{1+delta}_r} / ( e^t t^{-(1+delta+beta)/2} ||w||_{H^{-beta}_r} )
// over rough samples with the critical H^{-beta} envelope; also fits the
// small-t growth exponent of the raw norm.
inline SemigroupMappingReport semigroup_mapping_report(const GridSpec& g, double beta, double delta,
                                                       double r, const std::vector<double>& t_grid,
                                                       int sample_count, uint64_t seed) {
    SemigroupMappingReport rep;
    rep.t_grid = t_grid;
    rep.expected_slope = -0.5 * (1.0 + delta + beta);
    rep.mean_norm.assign(t_grid.size(), 0.0);
    for (int s = 0; s < sample_count; ++s) {
        Field w = random_field(g, 1, critical_envelope(-beta, g.d), seed ^ (0x5eedULL + s));
        double denom0 = sobolev_norm(w, {-beta, r});
        if (denom0 < 1e-14) continue;
        for (size_t i = 0; i < t_grid.size(); ++i) {
            double t = t_grid[i];
            double num = sobolev_norm(heat_semigroup(w, t), {1.0 + delta, r});
            rep.mean_norm[i] += num / sample_count;
            double envelope = std::exp(t) * std::pow(t, -0.5 * (1.0 + delta + beta));
            rep.c_star = std::max(rep.c_star, num / (envelope * denom0));
        }
    }
    // least-squares slope of log mean_norm vs log t
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < t_grid.size(); ++i) {
        if (rep.mean_norm[i] <= 0) continue;
        double x = std::log(t_grid[i]), y = std::log(rep.mean_norm[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) rep.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

// max over samples and t of ||P(t)w||_{H^s_r} / ||w||_{H^s_r}; the heat
// semigroup is a contraction on nonnegative orders, so this should not
// exceed 1 beyond rounding.
inline double semigroup_contraction_report(const GridSpec& g, double s, double r,
                                           const std::vector<double>& t_grid, int sample_count,
                                           uint64_t seed) {
    double worst = 0;
    for (int k = 0; k < sample_count; ++k) {
        Field w = random_decaying(g, 1, s + 1.0, seed ^ (0xc0deULL + k));
        double denom = sobolev_norm(w, {s, r});
        if (denom < 1e-14) continue;
        for (double t : t_grid)
            worst = std::max(worst, sobolev_norm(heat_semigroup(w, t), {s, r}) / denom);
    }
    return worst;
}

struct MorreyReport {
    double max_ratio = 0.0;
    int samples_used = 0;
    int samples_skipped = 0;
};

// Empirical constant of || h ||_{C^{1+alpha}} <= c || h ||_{H^{1+delta}_p}
// with alpha = delta - d/p; degenerate (zero) samples are skipped.
inline MorreyReport morrey_report(const GridSpec& g, const ParamSet& ps, int samples,
                                  uint64_t seed) {
    MorreyReport rep;
    const double alpha = ps.alpha();
    for (int s = 0; s < samples; ++s) {
        Field h = random_decaying(g, 1, 1.0 + ps.delta + 0.7, seed ^ (0xa11ceULL + s));
        double denom = sobolev_norm(h, {1.0 + ps.delta, ps.p});
        if (denom < 1e-14) {
            ++rep.samples_skipped;
            continue;
        }
        rep.max_ratio = std::max(rep.max_ratio, holder_norm(h, HolderFlavor::OnePlus, alpha) / denom);
        ++rep.samples_used;
    }
    return rep;
}

}  // namespace roughbsde
