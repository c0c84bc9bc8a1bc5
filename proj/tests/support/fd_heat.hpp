#pragma once

// Test-only finite-difference oracle for the terminal-value problem
//   d_t u + (1/2) Lap u + (grad u)^* b + f(t, x, u, grad u) = 0,  u(T) = Phi,
// on the periodic grid (d = 1, scalar): explicit marching backward from T
// with centered second-order space differences and stability substepping.
// Deliberately independent of the spectral solver it checks.

#include <cmath>
#include <functional>
#include <vector>

#include "roughbsde/params.hpp"
#include "roughbsde/time_field.hpp"

namespace roughbsde::testsupport {

inline TimeField fd_solve_semilinear(const TimeField& b, const LipschitzDriver& f,
                                     const Field& terminal, const TimeGrid& tg) {
    const GridSpec& g = terminal.grid;
    if (g.d != 1 || terminal.channels != 1)
        throw std::invalid_argument("fd_solve_semilinear: d = 1 scalar only");
    const int n = g.n;
    const double dx = g.dx();
    const double dt = tg.dt();
    // explicit stability for (1/2) u_xx: dt_sub <= dx^2; stay well below
    const int sub = std::max(1, static_cast<int>(std::ceil(dt / (0.4 * dx * dx))));
    const double h = dt / sub;

    TimeField u(tg, g, 1);
    u.at(tg.steps) = terminal;

    std::vector<double> cur(terminal.plane(0), terminal.plane(0) + n);
    std::vector<double> nxt(n), bval(n), lap(n), grd(n);
    for (int k = tg.steps - 1; k >= 0; --k) {
        for (int s = 0; s < sub; ++s) {
            double t = tg.node(k + 1) - s * h;  // marching backward within the slab
            // freeze b on the slab at its linear-in-time interpolant
            double w = (t - tg.node(k)) / dt;
            for (int i = 0; i < n; ++i)
                bval[i] = (1 - w) * b.at(k).at(0, i) + w * b.at(k + 1).at(0, i);
            for (int i = 0; i < n; ++i) {
                int ip = (i + 1) % n, im = (i - 1 + n) % n;
                lap[i] = (cur[ip] - 2 * cur[i] + cur[im]) / (dx * dx);
                grd[i] = (cur[ip] - cur[im]) / (2 * dx);
            }
            for (int i = 0; i < n; ++i) {
                double fv = 0;
                if (!f.is_zero) {
                    double x = g.coord(i);
                    double y = cur[i];
                    double z = grd[i];
                    f.f(t, &x, &y, &z, &fv);
                }
                nxt[i] = cur[i] + h * (0.5 * lap[i] + grd[i] * bval[i] + fv);
            }
            cur.swap(nxt);
        }
        std::copy(cur.begin(), cur.end(), u.at(k).plane(0));
    }
    return u;
}

}  // namespace roughbsde::testsupport
