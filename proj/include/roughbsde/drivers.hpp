#pragma once

// Generators for admissible rough drivers b in C([0,T]; H^{-beta}_q) and
// smooth controls. The rough construction realizes the derivative of a
// Hoelder-H field: spectral amplitudes |xi|^{-(H+1/2)} with random phases,
// tapered to the box, differentiated spectrally. Time dependence is a smooth
// scalar modulation of the fixed spatial profile.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "roughbsde/synth.hpp"
#include "roughbsde/time_field.hpp"

namespace roughbsde {

enum class DriverKind { Zero, SmoothBump, SingleMode, FbmDerivative };

enum class TimeModulation { Constant, SmoothRamp };

struct RoughDriverSpec {
    DriverKind kind = DriverKind::Zero;
    double amplitude = 1.0;
    double hurst = 0.75;  // FbmDerivative: H in (1/2, 1); requires beta > 1 - H
    int mode = 4;         // SingleMode: frequency index
    double bump_center = 0.0;
    double bump_width = 1.0;
    TimeModulation modulation = TimeModulation::Constant;
    uint64_t seed = 1;
};

struct DriverCertificate {
    bool admissible = false;
    double sup_norm = 0;             // sup_t ||b(t)||_{H^{-beta}_q}
    double continuity_modulus = 0;   // max_k ||b(t_{k+1}) - b(t_k)||_{H^{-beta}_q}
    double refinement_change = 0;    // relative norm change when the top octave is dropped
    double beta = 0, q = 0;
    std::string note;
};

inline double time_modulation_value(TimeModulation m, double t, double horizon) {
    if (m == TimeModulation::Constant) return 1.0;
    return 1.0 + 0.5 * std::sin(std::numbers::pi * t / horizon);
}

namespace driver_detail {

inline Field spatial_profile(const RoughDriverSpec& spec, const GridSpec& g) {
    const int channels = g.d;
    switch (spec.kind) {
        case DriverKind::Zero:
            return Field(g, channels);
        case DriverKind::SmoothBump: {
            return make_field(g, channels, [&](int, const double* x) {
                double r2 = 0;
                for (int a = 0; a < g.d; ++a)
                    r2 += (x[a] - spec.bump_center) * (x[a] - spec.bump_center);
                return spec.amplitude * std::exp(-r2 / (spec.bump_width * spec.bump_width)) *
                       taper_weight_nd(x, g);
            });
        }
        case DriverKind::SingleMode: {
            const double xi = g.freq(spec.mode);
            return make_field(g, channels, [&](int, const double* x) {
                return spec.amplitude * std::cos(xi * x[0]);
            });
        }
        case DriverKind::FbmDerivative: {
            // Hoelder-H field: amplitude |xi|^{-(H+1/2)}; taper; d/dx spectrally
            const double hexp = spec.hurst + 0.5;
            Field holder = random_field(
                g, 1, [hexp](double xi) { return xi > 0 ? std::pow(xi, -hexp) : 0.0; },
                spec.seed);
            double x[2] = {0, 0};
            for (long i = 0; i < holder.nodes(); ++i) {
                if (g.d == 1) {
                    x[0] = g.coord(static_cast<int>(i));
                } else {
                    x[0] = g.coord(static_cast<int>(i / g.n));
                    x[1] = g.coord(static_cast<int>(i % g.n));
                }
                holder.at(0, i) *= taper_weight_nd(x, g);
            }
            Field grad = gradient(holder);  // d channels
            grad *= spec.amplitude;
            if (channels == grad.channels) return grad;
            Field out(g, channels);
            for (int c = 0; c < channels; ++c)
                std::copy(grad.plane(0), grad.plane(0) + grad.nodes(), out.plane(c));
            return out;
        }
    }
    throw std::invalid_argument("make_driver: unknown kind");
}

}  // namespace driver_detail

inline TimeField make_driver(const RoughDriverSpec& spec, const GridSpec& g, const TimeGrid& tg) {
    if (spec.kind == DriverKind::FbmDerivative && !(spec.hurst > 0.5 && spec.hurst < 1.0))
        throw std::invalid_argument("make_driver: fbm_derivative needs H in (1/2, 1)");
    Field profile = driver_detail::spatial_profile(spec, g);
    TimeField b(tg, g, profile.channels);
    for (int k = 0; k <= tg.steps; ++k) {
        Field f = profile;
        f *= time_modulation_value(spec.modulation, tg.node(k), tg.horizon);
        b.at(k) = std::move(f);
    }
    return b;
}

// Reports sup-in-time norm, time-continuity modulus, and stability of the
// norm when the top spectral octave is removed. A field whose H^{-beta}_q
// mass keeps growing with resolution (e.g. white noise for beta < 1/2) is
// flagged inadmissible.
inline DriverCertificate certify_driver(const TimeField& b, double beta, double q,
                            double refinement_tolerance = 0.10) {
    DriverCertificate cert;
    cert.beta = beta;
    cert.q = q;
    const SobolevIndex idx{-beta, q};
    cert.sup_norm = sup_norm_in_time(b, [&](const Field& f) { return sobolev_norm(f, idx); });
    cert.continuity_modulus = continuity_modulus(b, [&](const Field& f) { return sobolev_norm(f, idx); });
    if (cert.sup_norm == 0.0) {
        cert.admissible = true;
        cert.note = "zero driver";
        return cert;
    }
    // drop the top octave of the worst snapshot and compare norms
    int worst = 0;
    double worst_norm = -1;
    for (int k = 0; k <= b.tgrid.steps; ++k) {
        double n = sobolev_norm(b.at(k), idx);
        if (n > worst_norm) {
            worst_norm = n;
            worst = k;
        }
    }
    Field coarse = band_limit(b.at(worst), 0.5 * b.grid().nyquist_freq());
    double coarse_norm = sobolev_norm(coarse, idx);
    cert.refinement_change = std::abs(worst_norm - coarse_norm) / worst_norm;
    cert.admissible = cert.refinement_change < refinement_tolerance;
    cert.note = cert.admissible ? "norm stable under refinement"
                                : "H^{-beta}_q mass concentrated at the resolution cutoff";
    return cert;
}

struct CertifiedDriver {
    TimeField field;
    DriverCertificate certificate;
};

inline CertifiedDriver make_certified_driver(const RoughDriverSpec& spec, const GridSpec& g,
                                             const TimeGrid& tg, double beta, double q) {
    CertifiedDriver out{make_driver(spec, g, tg), {}};
    out.certificate = certify_driver(out.field, beta, q);
    return out;
}

}  // namespace roughbsde
