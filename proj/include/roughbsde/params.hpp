#pragma once

// Admissible parameter region for the rough-driver problem and the weighted
// norms that drive the Picard contraction. The region K(beta, q) couples the
// driver regularity -beta and integrability q with the solution indices
// (delta, p); all inequalities are strict, enforced with a fixed margin.

#include <cmath>
#include <functional>
#include <string>

#include "roughbsde/rng.hpp"
#include "roughbsde/time_field.hpp"

namespace roughbsde {

struct ParamSet {
    double beta = 0.3;   // driver lives in H^{-beta}_q
    double q = 3.0;
    double delta = 0.5;  // solution lives in H^{1+delta}_p
    double p = 2.5;
    int d = 1;
    double gamma = 0.05;  // extra smoothness margin of the terminal condition
    double horizon = 0.5;

    double alpha() const { return delta - d / p; }  // Hoelder exponent via Morrey
};

struct ParamCheck {
    bool ok = false;
    std::string reason;  // names the violated inequality when !ok
    ParamSet params;
};

inline constexpr double kStrictMargin = 1e-9;

inline ParamCheck validate_params(double beta, double q, double delta, double p, int d,
                                  double gamma = 0.05, double horizon = 1.0) {
    auto reject = [&](const std::string& why) { return ParamCheck{false, why, {}}; };
    auto lt = [](double a, double b) { return a < b - kStrictMargin; };

    if (d != 1 && d != 2) return reject("d must be 1 or 2");
    if (!lt(0, beta) || !lt(beta, 0.5)) return reject("beta not in (0, 1/2)");
    if (d >= 2) {
        if (!lt(d / (1.0 - beta), q) || !lt(q, d / beta))
            return reject("q not in (d/(1-beta), d/beta)");
    } else {
        if (!lt(2, q) || !lt(q, 1.0 / beta)) return reject("q not in (2, 1/beta)");
    }
    if (!lt(beta, delta) || !lt(delta, 1.0 - beta)) return reject("delta not in (beta, 1-beta)");
    if (!lt(d / delta, p) || !lt(p, q)) return reject("p not in (d/delta, q)");
    if (d == 1 && p < 2 - kStrictMargin) return reject("p must be >= 2 when d = 1");
    if (!lt(0, gamma) || !lt(gamma, 0.5 * (1.0 - delta - beta)))
        return reject("gamma not in (0, (1-delta-beta)/2)");
    if (!(horizon > 0)) return reject("horizon must be > 0");

    ParamCheck out;
    out.ok = true;
    out.params = ParamSet{beta, q, delta, p, d, gamma, horizon};
    return out;
}

inline ParamSet require_params(double beta, double q, double delta, double p, int d,
                               double gamma = 0.05, double horizon = 1.0) {
    ParamCheck c = validate_params(beta, q, delta, p, d, gamma, horizon);
    if (!c.ok) throw std::invalid_argument("invalid parameters: " + c.reason);
    return c.params;
}

// sup_t e^{-rho t} || u(t) ||_{H^s_r}; rho = 0 gives the plain sup norm.
inline double rho_norm(const TimeField& u, double rho, const SobolevIndex& idx) {
    if (rho != 0 && rho < 1) throw std::invalid_argument("rho_norm: rho must be 0 or >= 1");
    double m = 0;
    for (int k = 0; k < u.tgrid.nodes(); ++k)
        m = std::max(m, std::exp(-rho * u.tgrid.node(k)) * sobolev_norm(u.at(k), idx));
    return m;
}

// Contraction factor of the Picard map at weight rho: c * (rho^{(delta-1)/2}
// + rho^{(delta+beta-1)/2}). Both exponents are negative on the admissible
// region, so the factor decays to zero as rho grows.
inline double contraction_factor(const ParamSet& ps, double c_emp, double rho) {
    return c_emp * (std::pow(rho, 0.5 * (ps.delta - 1.0)) +
                    std::pow(rho, 0.5 * (ps.delta + ps.beta - 1.0)));
}

// Smallest rho on the dyadic grid {1, 2, 4, ...} with factor <= 1/2.
inline double contraction_rho(const ParamSet& ps, double c_emp) {
    if (!(c_emp > 0)) return 1.0;
    for (double rho = 1.0; rho <= 1e9; rho *= 2.0)
        if (contraction_factor(ps, c_emp, rho) <= 0.5) return rho;
    throw std::runtime_error("contraction_rho: no rho <= 1e9 achieves factor 1/2");
}

// Driver f(t, x, y, z) with Lipschitz control in (y, z). x has d components,
// y has d, z is d*d row-major, out has d.
struct LipschitzDriver {
    std::function<void(double t, const double* x, const double* y, const double* z, double* out)> f;
    double lipschitz = 0.0;       // L in |f(..y,z) - f(..y',z')| <= L(|y-y'| + |z-z'|)
    double bound_at_zero = 0.0;   // sup_{t,x} |f(t,x,0,0)|
    bool is_zero = false;

    static LipschitzDriver zero(int /*d*/) {
        LipschitzDriver out;
        out.f = [](double, const double*, const double*, const double*, double* o) { o[0] = 0; };
        out.is_zero = true;
        return out;
    }
};

// Empirical Lipschitz check on random tuples; returns the worst ratio
// |f(y,z)-f(y',z')| / (L(|y-y'|+|z-z'|)). <= 1 means the declared constant holds.
inline double lipschitz_check(const LipschitzDriver& drv, int d, double box, double t_max,
                              int samples, uint64_t seed) {
    if (drv.is_zero || drv.lipschitz == 0) return 0.0;
    RandomStream rs(seed, 0xf17e);
    std::vector<double> x(d), y1(d), y2(d), z1(d * d), z2(d * d), f1(d), f2(d);
    double worst = 0;
    for (int s = 0; s < samples; ++s) {
        double t = t_max * rs.uniform();
        for (int i = 0; i < d; ++i) {
            x[i] = box * (2 * rs.uniform() - 1);
            y1[i] = 3 * rs.gaussian();
            y2[i] = 3 * rs.gaussian();
        }
        for (int i = 0; i < d * d; ++i) {
            z1[i] = 3 * rs.gaussian();
            z2[i] = 3 * rs.gaussian();
        }
        drv.f(t, x.data(), y1.data(), z1.data(), f1.data());
        drv.f(t, x.data(), y2.data(), z2.data(), f2.data());
        double dy = 0, dz = 0, df = 0;
        for (int i = 0; i < d; ++i) {
            dy += (y1[i] - y2[i]) * (y1[i] - y2[i]);
            df += (f1[i] - f2[i]) * (f1[i] - f2[i]);
        }
        for (int i = 0; i < d * d; ++i) dz += (z1[i] - z2[i]) * (z1[i] - z2[i]);
        double denom = drv.lipschitz * (std::sqrt(dy) + std::sqrt(dz));
        if (denom > 0) worst = std::max(worst, std::sqrt(df) / denom);
    }
    return worst;
}

}  // namespace roughbsde
