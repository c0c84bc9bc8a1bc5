#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "roughbsde/params.hpp"
#include "roughbsde/rng.hpp"
#include "roughbsde/synth.hpp"

using namespace roughbsde;

TEST_CASE("validate_params: reference accept/reject tuples") {
    REQUIRE(validate_params(0.3, 3.0, 0.5, 2.5, 1).ok);
    auto r = validate_params(0.6, 3.0, 0.5, 2.5, 1);
    REQUIRE_FALSE(r.ok);
    REQUIRE(r.reason == "beta not in (0, 1/2)");
    REQUIRE(validate_params(0.25, 6.0, 0.5, 5.0, 2).ok);
}

TEST_CASE("validate_params names the violated inequality") {
    REQUIRE(validate_params(0.3, 4.0, 0.5, 2.5, 1).reason == "q not in (2, 1/beta)");
    REQUIRE(validate_params(0.3, 3.0, 0.25, 2.5, 1).reason == "delta not in (beta, 1-beta)");
    REQUIRE(validate_params(0.3, 3.0, 0.75, 2.5, 1).reason == "delta not in (beta, 1-beta)");
    REQUIRE(validate_params(0.3, 3.0, 0.5, 3.5, 1).reason == "p not in (d/delta, q)");
    REQUIRE(validate_params(0.25, 6.0, 0.5, 3.5, 2).reason == "p not in (d/delta, q)");
    REQUIRE(validate_params(0.05, 15.0, 0.7, 1.8, 1, 0.05).reason == "p must be >= 2 when d = 1");
    REQUIRE(validate_params(0.3, 3.0, 0.5, 2.5, 1, 0.2).reason ==
            "gamma not in (0, (1-delta-beta)/2)");
    REQUIRE(validate_params(0.25, 4.0, 0.5, 3.0, 3).reason == "d must be 1 or 2");
}

TEST_CASE("validate_params sweeps the interior and exterior of the region") {
    // d = 2, beta = 0.25, q = 6: delta in (beta, 1-beta), p in (d/delta, q)
    const double beta = 0.25, q = 6.0;
    int interior = 0, exterior = 0;
    RandomStream rs(2024, 0);
    for (int i = 0; i < 1000; ++i) {
        double delta = beta + (1 - 2 * beta) * rs.uniform();
        double p = 1.0 + q * rs.uniform();
        bool inside = delta > beta + 1e-6 && delta < 1 - beta - 1e-6 &&
                      p > 2.0 / delta + 1e-6 && p < q - 1e-6;
        bool outside = delta < beta - 1e-6 || delta > 1 - beta + 1e-6 ||
                       p < 2.0 / delta - 1e-6 || p > q + 1e-6;
        // gamma is a separate assumption; keep it valid so only K(beta, q) decides
        double gamma = std::max(1e-6, 0.2 * (1 - delta - beta));
        auto res = validate_params(beta, q, delta, p, 2, gamma);
        if (inside) {
            ++interior;
            REQUIRE(res.ok);
        } else if (outside) {
            ++exterior;
            REQUIRE_FALSE(res.ok);
        }
    }
    REQUIRE(interior > 100);
    REQUIRE(exterior > 100);
}

TEST_CASE("rho norm: plain sup, constants, equivalence bounds") {
    GridSpec g(1, 128, 10.0);
    TimeGrid tg(1.0, 16);
    SobolevIndex idx{0.5, 2.0};

    TimeField u = make_time_field(tg, g, 1, [](int, double, const double* x) {
        return std::exp(-x[0] * x[0]);
    });
    double plain = rho_norm(u, 0.0, idx);
    double n0 = sobolev_norm(u.at(0), idx);
    REQUIRE(plain == Catch::Approx(n0).epsilon(1e-12));  // constant in t: max at any node
    REQUIRE(rho_norm(u, 4.0, idx) == Catch::Approx(n0).epsilon(1e-12));  // max at t = 0

    TimeField v = make_time_field(tg, g, 1, [](int, double t, const double* x) {
        return std::sin(3 * t) * std::exp(-x[0] * x[0]) + t;
    });
    for (double rho : {1.0, 3.0, 10.0}) {
        double w = rho_norm(v, rho, idx);
        double s = rho_norm(v, 0.0, idx);
        REQUIRE(w <= s * (1 + 1e-12));
        REQUIRE(s <= std::exp(rho * tg.horizon) * w * (1 + 1e-12));
    }

    // non-increasing in rho
    double prev = rho_norm(v, 0.0, idx);
    for (double rho : {1.0, 2.0, 4.0, 8.0}) {
        double cur = rho_norm(v, rho, idx);
        REQUIRE(cur <= prev * (1 + 1e-12));
        prev = cur;
    }
}

TEST_CASE("contraction rho: bracketing oracle and monotonicity") {
    ParamSet ps = require_params(0.3, 3.0, 0.5, 2.5, 1);

    REQUIRE(contraction_rho(ps, 1e-12) == 1.0);

    // c = 1: factor(rho) = rho^{-0.25} + rho^{-0.1}; bisect for the true
    // crossing and check contraction_rho brackets it dyadically
    double c = 1.0;
    auto factor = [&](double rho) { return contraction_factor(ps, c, rho); };
    double lo = 1.0, hi = 1e9;
    REQUIRE(factor(lo) > 0.5);
    REQUIRE(factor(hi) < 0.5);
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (factor(mid) > 0.5 ? lo : hi) = mid;
    }
    double rho_star = contraction_rho(ps, c);
    REQUIRE(factor(rho_star) <= 0.5);
    REQUIRE(rho_star >= hi / 2.0);  // smallest dyadic point past the crossing
    REQUIRE(rho_star <= 2.0 * hi);

    double prev = 1.0;
    for (double ce : {0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
        double r = contraction_rho(ps, ce);
        REQUIRE(r >= prev);
        prev = r;
    }
}

TEST_CASE("contraction factor decays for every valid parameter set") {
    RandomStream rs(7, 0);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        double beta = 0.5 * rs.uniform();
        double q = 2.0 + 2.0 * rs.uniform();
        double delta = rs.uniform();
        double p = 1.5 + 2.0 * rs.uniform();
        auto res = validate_params(beta, q, delta, p, 1);
        if (!res.ok) continue;
        ++checked;
        // both exponents strictly negative on the admissible region, so the
        // factor decreases along any growing rho sequence
        REQUIRE(0.5 * (res.params.delta - 1.0) < 0);
        REQUIRE(0.5 * (res.params.delta + res.params.beta - 1.0) < 0);
        double f1 = contraction_factor(res.params, 5.0, 1.0);
        double f2 = contraction_factor(res.params, 5.0, 1e6);
        double f3 = contraction_factor(res.params, 5.0, 1e12);
        REQUIRE(f2 < f1);
        REQUIRE(f3 < f2);
    }
    REQUIRE(checked > 10);
}

TEST_CASE("lipschitz driver: declared constant holds on sampled tuples") {
    LipschitzDriver lin;
    lin.lipschitz = 0.7;
    lin.bound_at_zero = 0.0;
    lin.f = [](double, const double*, const double* y, const double*, double* out) {
        out[0] = 0.7 * y[0];
    };
    REQUIRE(lipschitz_check(lin, 1, 9.0, 1.0, 500, 99) <= 1.0 + 1e-12);

    LipschitzDriver sat;
    sat.lipschitz = 1.2;
    sat.f = [](double, const double*, const double*, const double* z, double* out) {
        out[0] = 1.2 * std::tanh(z[0]);
    };
    REQUIRE(lipschitz_check(sat, 1, 9.0, 1.0, 500, 99) <= 1.0 + 1e-12);

    REQUIRE(lipschitz_check(LipschitzDriver::zero(1), 1, 9.0, 1.0, 10, 1) == 0.0);
}
