#pragma once

// Random field synthesis with prescribed spectral envelopes. Mode
// coefficients are drawn from per-mode counter-based streams keyed by the
// signed mode index, so the same (seed, envelope) yields nested spectra
// across grid resolutions: refining the grid only appends new tail modes.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>

#include "roughbsde/rng.hpp"
#include "roughbsde/spectral.hpp"

namespace roughbsde {

using SpectralEnvelope = std::function<double(double xi_mag)>;

// Gaussian random field with coefficient std proportional to envelope(|xi|).
// d=1 uses mode-indexed streams (resolution-nested); d=2 filters white node
// noise, which is enough for the fixed-resolution diagnostics that use it.
inline Field random_field(const GridSpec& g, int channels, const SpectralEnvelope& env,
                          uint64_t seed) {
    if (g.d == 1) {
        Spectrum s(g, channels);
        for (int c = 0; c < channels; ++c) {
            auto* p = s.plane(c);
            p[0] = 0.0;
            for (int k = 1; k <= g.n / 2; ++k) {
                RandomStream rs(seed, (static_cast<uint64_t>(c) << 32) ^ static_cast<uint64_t>(k));
                double a = rs.gaussian(), b = rs.gaussian();
                double amp = env(g.freq(k));
                // bin k carries both +-k; halve so the real-field mode variance
                // matches amp^2
                p[k] = 0.5 * amp * std::complex<double>(a, b);
            }
            p[g.n / 2] = 0.0;  // drop Nyquist
        }
        return synthesize(s);
    }
    Field noise(g, channels);
    for (int c = 0; c < channels; ++c) {
        double* pl = noise.plane(c);
        for (long i = 0; i < noise.nodes(); ++i) {
            RandomStream rs(seed, (static_cast<uint64_t>(c) << 40) ^ static_cast<uint64_t>(i));
            pl[i] = rs.gaussian();
        }
    }
    return apply_multiplier(noise, [&](double xi2) { return env(std::sqrt(xi2)); });
}

// Envelope that places a field marginally in H^{s}: |c(xi)| ~ (1+xi^2/2)^{-s/2} |xi|^{-d/2},
// so the H^{s} Plancherel sum is log-divergent in the cutoff. Used to probe
// the sharp t-exponent of the semigroup mapping bound.
inline SpectralEnvelope critical_envelope(double s, int d) {
    return [s, d](double xi) {
        if (xi <= 0) return 0.0;
        return std::exp(-0.5 * s * std::log1p(0.5 * xi * xi)) * std::pow(xi, -0.5 * d);
    };
}

// Band-limited smooth random field: flat envelope up to xi_cut, zero above.
inline Field random_band_limited(const GridSpec& g, int channels, double xi_cut, uint64_t seed) {
    return random_field(g, channels,
                        [xi_cut](double xi) { return xi < xi_cut ? 1.0 : 0.0; }, seed);
}

// Random field with algebraic spectral decay |c(xi)| ~ (1+|xi|)^{-decay}.
inline Field random_decaying(const GridSpec& g, int channels, double decay, uint64_t seed) {
    return random_field(g, channels,
                        [decay](double xi) { return std::pow(1.0 + xi, -decay); }, seed);
}

}  // namespace roughbsde
