#pragma once

// Time-indexed fields: one Field per node of a uniform grid on [0, T].
// The computational stand-in for C([0,T]; H^s_r) elements.

#include <functional>
#include <stdexcept>
#include <vector>

#include "roughbsde/spectral.hpp"

namespace roughbsde {

struct TimeGrid {
    double horizon = 1.0;  // T
    int steps = 512;       // M uniform steps, nodes t_k = k*dt, k = 0..M

    TimeGrid() = default;
    TimeGrid(double t, int m) : horizon(t), steps(m) {
        if (!(t > 0) || m < 1) throw std::invalid_argument("TimeGrid: need T > 0, steps >= 1");
    }
    double dt() const { return horizon / steps; }
    double node(int k) const { return k * dt(); }
    int nodes() const { return steps + 1; }
};

struct TimeField {
    TimeGrid tgrid;
    std::vector<Field> snaps;  // steps+1 snapshots sharing one GridSpec

    TimeField() = default;
    TimeField(const TimeGrid& tg, const GridSpec& g, int channels) : tgrid(tg) {
        snaps.assign(tg.nodes(), Field(g, channels));
    }

    const GridSpec& grid() const { return snaps.at(0).grid; }
    int channels() const { return snaps.at(0).channels; }
    Field& at(int k) { return snaps.at(k); }
    const Field& at(int k) const { return snaps.at(k); }

    bool finite() const {
        for (const auto& f : snaps)
            if (!f.finite()) return false;
        return true;
    }
};

inline TimeField make_time_field(const TimeGrid& tg, const GridSpec& g, int channels,
                                 const std::function<double(int c, double t, const double* x)>& fn) {
    TimeField u(tg, g, channels);
    for (int k = 0; k < tg.nodes(); ++k) {
        double t = tg.node(k);
        u.at(k) = make_field(g, channels, [&](int c, const double* x) { return fn(c, t, x); });
    }
    return u;
}

// sup over time nodes of a per-snapshot norm
inline double sup_norm_in_time(const TimeField& u, const std::function<double(const Field&)>& nrm) {
    double m = 0;
    for (const auto& f : u.snaps) m = std::max(m, nrm(f));
    return m;
}

// max_k || u(t_{k+1}) - u(t_k) ||, the discrete continuity modulus
inline double continuity_modulus(const TimeField& u, const std::function<double(const Field&)>& nrm) {
    double m = 0;
    for (size_t k = 0; k + 1 < u.snaps.size(); ++k) m = std::max(m, nrm(u.snaps[k + 1] - u.snaps[k]));
    return m;
}

// Value of channel c at (t, x): linear in t between bracketing snapshots,
// multilinear in space.
inline double interpolate_time(const TimeField& u, int c, double t, const double* x) {
    const TimeGrid& tg = u.tgrid;
    double s = t / tg.dt();
    int k0 = static_cast<int>(std::floor(s));
    k0 = std::max(0, std::min(k0, tg.steps - 1));
    double w = s - k0;
    w = std::max(0.0, std::min(1.0, w));
    double v0 = interpolate(u.at(k0), c, x);
    double v1 = interpolate(u.at(k0 + 1), c, x);
    return (1 - w) * v0 + w * v1;
}

}  // namespace roughbsde
