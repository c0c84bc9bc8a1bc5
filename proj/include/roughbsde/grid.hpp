#pragma once

// Periodic spatial grid and sampled fields. The box [-L, L)^d stands in for
// R^d; fields meant to emulate whole-space objects keep their mass away from
// the boundary (see boundary_mass_fraction).

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughbsde {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct GridSpec {
    int d = 1;             // spatial dimension, 1 or 2
    int n = 512;           // points per axis, power of two >= 8
    double half_width = 10.0;  // L: box is [-L, L)^d

    GridSpec() = default;
    GridSpec(int d_, int n_, double l) : d(d_), n(n_), half_width(l) { validate(); }

    void validate() const {
        if (d != 1 && d != 2) throw std::invalid_argument("GridSpec: d must be 1 or 2");
        if (n < 8 || !is_power_of_two(n))
            throw std::invalid_argument("GridSpec: n must be a power of two >= 8");
        if (!(half_width > 0)) throw std::invalid_argument("GridSpec: half_width must be > 0");
    }

    double dx() const { return 2.0 * half_width / n; }
    long num_nodes() const { return d == 1 ? n : static_cast<long>(n) * n; }
    double coord(int i) const { return -half_width + i * dx(); }
    // frequency of signed index k in {-n/2, ..., n/2-1}: xi_k = pi k / L
    double freq(int k) const { return std::numbers::pi * k / half_width; }
    double nyquist_freq() const { return freq(n / 2); }

    bool operator==(const GridSpec& o) const {
        return d == o.d && n == o.n && half_width == o.half_width;
    }
};

// Sampled field with one or more channels (1 = scalar, d = vector, d*d =
// matrix-valued, e.g. gradients of vector fields). Channel planes are stored
// contiguously; node index is row-major ((ix*n)+iy for d=2).
struct Field {
    GridSpec grid;
    int channels = 1;
    std::vector<double> data;

    Field() = default;
    Field(const GridSpec& g, int ch) : grid(g), channels(ch), data(ch * g.num_nodes(), 0.0) {
        if (ch < 1) throw std::invalid_argument("Field: channels must be >= 1");
    }

    long nodes() const { return grid.num_nodes(); }
    double* plane(int c) { return data.data() + static_cast<long>(c) * nodes(); }
    const double* plane(int c) const { return data.data() + static_cast<long>(c) * nodes(); }
    double& at(int c, long idx) { return data[static_cast<long>(c) * nodes() + idx]; }
    double at(int c, long idx) const { return data[static_cast<long>(c) * nodes() + idx]; }

    bool finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
    double max_abs() const {
        double m = 0;
        for (double v : data) m = std::max(m, std::abs(v));
        return m;
    }
    bool same_shape(const Field& o) const { return grid == o.grid && channels == o.channels; }

    Field& operator+=(const Field& o) {
        for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        for (size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
        return *this;
    }
    Field& operator*=(double a) {
        for (auto& v : data) v *= a;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double a, Field f) { return f *= a; }
};

inline void require_finite(const Field& f, const char* who) {
    if (!f.finite()) throw std::invalid_argument(std::string(who) + ": non-finite input field");
}

// Evaluate a scalar function of position into channel planes.
inline Field make_field(const GridSpec& g, int channels,
                        const std::function<double(int c, const double* x)>& fn) {
    Field f(g, channels);
    double x[2];
    for (int c = 0; c < channels; ++c) {
        double* p = f.plane(c);
        if (g.d == 1) {
            for (int i = 0; i < g.n; ++i) {
                x[0] = g.coord(i);
                p[i] = fn(c, x);
            }
        } else {
            for (int ix = 0; ix < g.n; ++ix) {
                x[0] = g.coord(ix);
                for (int iy = 0; iy < g.n; ++iy) {
                    x[1] = g.coord(iy);
                    p[static_cast<long>(ix) * g.n + iy] = fn(c, x);
                }
            }
        }
    }
    return f;
}

inline Field make_scalar_field(const GridSpec& g, const std::function<double(const double* x)>& fn) {
    return make_field(g, 1, [&](int, const double* x) { return fn(x); });
}

// C^2 ramp: 1 on [-(L-2w), L-2w], 0 within w of the boundary.
inline double taper_weight(double x, double half_width, double margin) {
    const double a = half_width - 2.0 * margin;  // plateau edge
    const double b = half_width - margin;        // zero edge
    const double ax = std::abs(x);
    if (ax <= a) return 1.0;
    if (ax >= b) return 0.0;
    const double t = (ax - a) / (b - a);
    const double s = 1.0 - t;  // 1 at plateau edge, 0 at zero edge
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

inline double taper_weight_nd(const double* x, const GridSpec& g, double margin = 1.0) {
    double w = 1.0;
    for (int a = 0; a < g.d; ++a) w *= taper_weight(x[a], g.half_width, margin);
    return w;
}

// Fraction of total |f| mass lying within `margin` of the box boundary.
inline double boundary_mass_fraction(const Field& f, double margin = 1.0) {
    const GridSpec& g = f.grid;
    double total = 0, near = 0;
    double x[2];
    for (long idx = 0; idx < f.nodes(); ++idx) {
        if (g.d == 1) {
            x[0] = g.coord(static_cast<int>(idx));
        } else {
            x[0] = g.coord(static_cast<int>(idx / g.n));
            x[1] = g.coord(static_cast<int>(idx % g.n));
        }
        double mag = 0;
        for (int c = 0; c < f.channels; ++c) mag += f.at(c, idx) * f.at(c, idx);
        mag = std::sqrt(mag);
        total += mag;
        bool close = false;
        for (int a = 0; a < g.d; ++a)
            if (g.half_width - std::abs(x[a]) < margin) close = true;
        if (close) near += mag;
    }
    return total > 0 ? near / total : 0.0;
}

// Multilinear (bilinear for d=2) interpolation of one channel at a point.
// Periodic in each axis; callers that must not wrap check the box first.
inline double interpolate(const Field& f, int c, const double* x) {
    const GridSpec& g = f.grid;
    const double inv_dx = 1.0 / g.dx();
    const double* p = f.plane(c);
    if (g.d == 1) {
        double u = (x[0] + g.half_width) * inv_dx;
        double fl = std::floor(u);
        int i0 = static_cast<int>(fl);
        double w = u - fl;
        int a = ((i0 % g.n) + g.n) % g.n;
        int b = (a + 1) % g.n;
        return (1 - w) * p[a] + w * p[b];
    }
    double u0 = (x[0] + g.half_width) * inv_dx;
    double u1 = (x[1] + g.half_width) * inv_dx;
    double f0 = std::floor(u0), f1 = std::floor(u1);
    int i0 = static_cast<int>(f0), i1 = static_cast<int>(f1);
    double w0 = u0 - f0, w1 = u1 - f1;
    int a0 = ((i0 % g.n) + g.n) % g.n, b0 = (a0 + 1) % g.n;
    int a1 = ((i1 % g.n) + g.n) % g.n, b1 = (a1 + 1) % g.n;
    const long n = g.n;
    double v00 = p[a0 * n + a1], v01 = p[a0 * n + b1];
    double v10 = p[b0 * n + a1], v11 = p[b0 * n + b1];
    return (1 - w0) * ((1 - w1) * v00 + w1 * v01) + w0 * ((1 - w1) * v10 + w1 * v11);
}

inline bool inside_box(const double* x, const GridSpec& g, double margin = 1.0) {
    for (int a = 0; a < g.d; ++a)
        if (std::abs(x[a]) > g.half_width - margin) return false;
    return true;
}

}  // namespace roughbsde
