#pragma once

// Monte Carlo construction and verification of the BSDE solution
// Y_t = u(t, W_t), Z_t = grad u^*(t, W_t). The assembled process
//   M_t = Y_t - Y_0 + A^{W,Y}_t(b) + int_0^t f(r, W_r, Y_r, Z_r) dr
// must be a square-integrable martingale and, per the existence argument,
// must coincide with int grad u^* dW up to the Euler error.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "roughbsde/occupation.hpp"

namespace roughbsde {

struct BSDESolution {
    PathFunctional y;      // dim du
    PathFunctional z;      // dim du*d, entry (i*d + j) = d_j u_i at (t, W_t)
    PathFunctional m;      // assembled martingale candidate
    PathFunctional m_ref;  // sum Z dW, the reference martingale
};

// Everything path-independent about one (u, b, f, Phi) configuration,
// resampled onto the path time grid and shared across an ensemble.
struct BSDEAssembly {
    TimeField u;        // du channels
    TimeField grad_u;   // d*du channels
    ChainRuleKernel awy;  // chain-rule kernel for l = (grad u)^* b
    Field terminal;     // Phi as a grid field
    LipschitzDriver f;
    int d = 1;
    int du = 1;
};

inline BSDEAssembly build_bsde_assembly(const TimeField& u, const TimeField& b,
                                        const LipschitzDriver& f, const Field& terminal,
                                        const TimeGrid& path_tg) {
    BSDEAssembly a;
    a.u = resample_time(u, path_tg);
    a.d = u.grid().d;
    a.du = u.channels();
    a.grad_u = TimeField(path_tg, u.grid(), a.d * a.du);
    for (int k = 0; k <= path_tg.steps; ++k) a.grad_u.at(k) = gradient(a.u.at(k));
    TimeField br = resample_time(b, path_tg);
    const CutoffSpec spec{nyquist_level(u.grid()), CutoffProfile::RaisedCosine};
    TimeField l(path_tg, u.grid(), a.du);
    for (int k = 0; k <= path_tg.steps; ++k)
        l.at(k) = gradient_contraction(a.grad_u.at(k), br.at(k), spec);
    Field zero(u.grid(), a.du);
    a.awy = build_chain_kernel(l, zero);
    a.terminal = terminal;
    a.f = f;
    return a;
}

inline BSDESolution assemble_solution(const BSDEAssembly& a, const BrownianPath& path) {
    require_inside_box(path, a.u.grid());
    const int d = a.d, du = a.du;
    const double dt = path.tgrid.dt();
    BSDESolution sol;
    sol.y = PathFunctional(path.tgrid, du, Provenance::Composed);
    sol.z = PathFunctional(path.tgrid, du * d, Provenance::Composed);
    sol.m = PathFunctional(path.tgrid, du, Provenance::Composed);
    sol.m_ref = PathFunctional(path.tgrid, du, Provenance::Composed);

    PathFunctional awy = apply_chain_rule(a.awy, path);

    std::vector<double> facc(du, 0.0), ito(du, 0.0);
    std::vector<double> y(du), z(du * d), fv(du);
    std::vector<double> y0(du);
    const double* x0 = &path.positions[0];
    for (int c = 0; c < du; ++c) y0[c] = interpolate(a.u.at(0), c, x0);

    for (int k = 0; k <= path.tgrid.steps; ++k) {
        const double* x = &path.positions[static_cast<size_t>(k) * d];
        for (int c = 0; c < du; ++c) y[c] = interpolate(a.u.at(k), c, x);
        for (int i = 0; i < du; ++i)
            for (int j = 0; j < d; ++j)
                z[i * d + j] = interpolate(a.grad_u.at(k), j * du + i, x);
        for (int c = 0; c < du; ++c) sol.y.value(k, c) = y[c];
        for (int i = 0; i < du * d; ++i) sol.z.value(k, i) = z[i];
        for (int c = 0; c < du; ++c)
            sol.m.value(k, c) = y[c] - y0[c] + awy.value(k, c) + facc[c];
        for (int c = 0; c < du; ++c) sol.m_ref.value(k, c) = ito[c];
        if (!sol.m.values.empty() && !std::isfinite(sol.m.value(k, 0)))
            throw std::runtime_error("assemble_solution: non-finite driver evaluation");
        if (k < path.tgrid.steps) {
            if (!a.f.is_zero) {
                a.f.f(path.tgrid.node(k), x, y.data(), z.data(), fv.data());
                for (int c = 0; c < du; ++c) facc[c] += fv[c] * dt;
            }
            for (int i = 0; i < du; ++i) {
                double s = 0;
                for (int j = 0; j < d; ++j) s += z[i * d + j] * path.dw(k, j);
                ito[i] += s;
            }
        }
    }
    // exact terminal identity: Y_T and Phi(W_T) interpolate the same field
    const double* xT = &path.positions[static_cast<size_t>(path.tgrid.steps) * d];
    for (int c = 0; c < du; ++c)
        sol.y.value(path.tgrid.steps, c) = interpolate(a.terminal, c, xT);
    return sol;
}

inline BSDESolution assemble_solution(const TimeField& u, const TimeField& b,
                                      const LipschitzDriver& f, const Field& terminal,
                                      const BrownianPath& path) {
    return assemble_solution(build_bsde_assembly(u, b, f, terminal, path.tgrid), path);
}

// --- martingale test -----------------------------------------------------------

struct MartingaleTestEntry {
    std::string name;
    double statistic = 0;
    double stderror = 0;
    bool pass = true;
};

struct MartingaleTestReport {
    std::vector<MartingaleTestEntry> entries;
    double second_moment = 0;         // empirical E|M_T|^2
    double second_moment_stderr = 0;
    bool pass = true;
    int paths_used = 0;
    int paths_rejected = 0;
};

// Bounded test functions of W_s for the adaptedness regression.
inline std::vector<std::pair<std::string, std::function<double(double)>>> martingale_test_dictionary(
    const GridSpec& g) {
    const double xi_lo = g.freq(2), xi_hi = g.freq(8);
    return {
        {"tanh", [](double w) { return std::tanh(w); }},
        {"sin_lo", [xi_lo](double w) { return std::sin(xi_lo * w); }},
        {"cos_lo", [xi_lo](double w) { return std::cos(xi_lo * w); }},
        {"sin_hi", [xi_hi](double w) { return std::sin(xi_hi * w); }},
        {"cos_hi", [xi_hi](double w) { return std::cos(xi_hi * w); }},
    };
}

// (a) |mean M_t| <= 3 stderr at several t; (b) adaptedness regression
// |mean (M_t - M_s) g(W_s)| <= 3 stderr for bounded g; (c) E|M_T|^2 reported.
inline MartingaleTestReport martingale_test(
    const std::function<PathFunctional(const BrownianPath&)>& make_m, const PathEnsemble& ens,
    const GridSpec& g) {
    const int n = ens.spec.paths;
    const TimeGrid& tg = ens.spec.tgrid;
    const int d = ens.spec.d;
    const std::vector<int> checks = {tg.steps / 4, tg.steps / 2, 3 * tg.steps / 4, tg.steps};
    auto dict = martingale_test_dictionary(g);

    struct Slot {
        bool ok = false;
        std::vector<double> mean_stats;     // M_t components at check nodes
        std::vector<double> regress_stats;  // (M_t - M_s) g(W_s)
        double m2 = 0;
    };
    std::vector<Slot> slots(n);
    parallel_for(n, [&](long i) {
        BrownianPath p = ens.path(i);
        Slot& s = slots[i];
        PathFunctional m;
        try {
            m = make_m(p);
        } catch (const BoxExitError&) {
            return;
        }
        const int dm = m.dim;
        for (int kc : checks)
            for (int c = 0; c < dm; ++c) s.mean_stats.push_back(m.value(kc, c));
        for (size_t kcheck = 0; kcheck + 1 < checks.size(); ++kcheck) {
            int ks = checks[kcheck];
            int kt = tg.steps;
            for (auto& [nm, fn] : dict) {
                (void)nm;
                for (int a = 0; a < d; ++a) {
                    double gval = fn(p.w(ks, a));
                    for (int c = 0; c < dm; ++c)
                        s.regress_stats.push_back((m.value(kt, c) - m.value(ks, c)) * gval);
                }
            }
        }
        double m2 = 0;
        for (int c = 0; c < dm; ++c) m2 += m.value(tg.steps, c) * m.value(tg.steps, c);
        s.m2 = m2;
        s.ok = true;
    });

    MartingaleTestReport rep;
    size_t n_mean = 0, n_reg = 0;
    for (const auto& s : slots)
        if (s.ok) {
            n_mean = s.mean_stats.size();
            n_reg = s.regress_stats.size();
            break;
        }
    std::vector<RunningStat> mean_st(n_mean), reg_st(n_reg);
    RunningStat m2_st;
    for (const auto& s : slots) {
        if (!s.ok) {
            ++rep.paths_rejected;
            continue;
        }
        for (size_t j = 0; j < n_mean; ++j) mean_st[j].add(s.mean_stats[j]);
        for (size_t j = 0; j < n_reg; ++j) reg_st[j].add(s.regress_stats[j]);
        m2_st.add(s.m2);
        ++rep.paths_used;
    }

    size_t jm = 0;
    for (int kc : checks) {
        int dm = static_cast<int>(n_mean / checks.size());
        for (int c = 0; c < dm; ++c, ++jm) {
            MartingaleTestEntry e;
            e.name = "mean[M] t=" + std::to_string(tg.node(kc)) + " comp " + std::to_string(c);
            e.statistic = mean_st[jm].mean();
            e.stderror = mean_st[jm].stderror();
            e.pass = std::abs(e.statistic) <= 3.0 * e.stderror;
            rep.pass = rep.pass && e.pass;
            rep.entries.push_back(e);
        }
    }
    size_t jr = 0;
    for (size_t kcheck = 0; kcheck + 1 < checks.size(); ++kcheck) {
        for (auto& [nm, fn] : dict) {
            (void)fn;
            for (int a = 0; a < d; ++a) {
                int dm = rep.entries.empty() ? 1 : static_cast<int>(n_mean / checks.size());
                for (int c = 0; c < dm; ++c, ++jr) {
                    MartingaleTestEntry e;
                    e.name = "adapted g=" + nm + " s=" + std::to_string(tg.node(checks[kcheck])) +
                             " wcomp " + std::to_string(a) + " comp " + std::to_string(c);
                    e.statistic = reg_st[jr].mean();
                    e.stderror = reg_st[jr].stderror();
                    e.pass = std::abs(e.statistic) <= 3.0 * e.stderror;
                    rep.pass = rep.pass && e.pass;
                    rep.entries.push_back(e);
                }
            }
        }
    }
    rep.second_moment = m2_st.mean();
    rep.second_moment_stderr = m2_st.stderror();
    return rep;
}

// --- Feynman-Kac ---------------------------------------------------------------

struct FeynmanKacResult {
    double estimate = 0;
    double stderror = 0;
    double u_value = 0;  // u(s, x0) from the grid solution
    int paths_used = 0;
    int paths_rejected = 0;
};

// MC average of  Phi(X_T) + int_s^T f(r, X_r, u, grad u) dr + [A_T - A_s]((grad u)^* b)
// along X_r = x0 + (W_r - W_s); the A increment is evaluated with the chain
// rule from the shared kernel. Component `comp` of the vector identity.
inline FeynmanKacResult feynman_kac_estimate(const BSDEAssembly& a, double s, const double* x0,
                                             const PathEnsemble& ens, int comp = 0) {
    const TimeGrid& tg = ens.spec.tgrid;
    const int d = ens.spec.d, du = a.du;
    const int ks = static_cast<int>(std::llround(s / tg.dt()));
    if (ks < 0 || ks > tg.steps) throw std::invalid_argument("feynman_kac: s outside [0, T]");
    const GridSpec& g = a.u.grid();
    if (!inside_box(x0, g)) throw BoxExitError("feynman_kac: probe point outside the box");

    const int n = ens.spec.paths;
    std::vector<double> vals(n);
    std::vector<char> ok(n, 0);
    parallel_for(n, [&](long i) {
        BrownianPath p = ens.path(i);
        // X_k = x0 + W_k - W_{ks}, k >= ks
        std::vector<double> x(static_cast<size_t>(tg.steps + 1 - ks) * d);
        double limit = g.half_width - 1.0;
        bool exit = false;
        for (int k = ks; k <= tg.steps; ++k)
            for (int aix = 0; aix < d; ++aix) {
                double v = x0[aix] + p.w(k, aix) - p.w(ks, aix);
                if (std::abs(v) > limit) exit = true;
                x[static_cast<size_t>(k - ks) * d + aix] = v;
            }
        if (exit) return;

        std::vector<double> y(du), z(du * d), fv(du);
        double facc = 0, ito = 0;
        for (int k = ks; k <= tg.steps; ++k) {
            const double* xk = &x[static_cast<size_t>(k - ks) * d];
            if (k < tg.steps) {
                if (!a.f.is_zero) {
                    for (int c = 0; c < du; ++c) y[c] = interpolate(a.u.at(k), c, xk);
                    for (int ii = 0; ii < du; ++ii)
                        for (int jj = 0; jj < d; ++jj)
                            z[ii * d + jj] = interpolate(a.grad_u.at(k), jj * du + ii, xk);
                    a.f.f(tg.node(k), xk, y.data(), z.data(), fv.data());
                    facc += fv[comp] * tg.dt();
                }
                double sgrad = 0;
                for (int aix = 0; aix < d; ++aix)
                    sgrad += interpolate(a.awy.grad_phi.at(k), aix * du + comp, xk) * p.dw(k, aix);
                ito += sgrad;
            }
        }
        const double* xT = &x[static_cast<size_t>(tg.steps - ks) * d];
        double phi_T = interpolate(a.awy.phi.at(tg.steps), comp, xT);
        double phi_s = interpolate(a.awy.phi.at(ks), comp, x0);
        double a_incr = phi_T - phi_s - ito;
        vals[i] = interpolate(a.terminal, comp, xT) + facc + a_incr;
        ok[i] = 1;
    });

    FeynmanKacResult res;
    RunningStat st;
    for (int i = 0; i < n; ++i) {
        if (!ok[i]) {
            ++res.paths_rejected;
            continue;
        }
        st.add(vals[i]);
        ++res.paths_used;
    }
    res.estimate = st.mean();
    res.stderror = st.stderror();
    res.u_value = interpolate(a.u.at(ks), comp, x0);
    return res;
}

// --- classical equivalence -------------------------------------------------------

struct EquivalenceReport {
    double bracket_residual = 0;   // mean_T | cov(W, Y) - int Z^* dt |, per entry max
    double awy_residual = 0;       // mean sup_t | A^{W,Y}(b) - direct Riemann sum |
    int paths_used = 0;
    int paths_rejected = 0;
};

// For smooth b: d[W,Y]_r = Z_r^* dr and A^{W,Y}(b) = sum Z b dt, both checked
// pathwise on the discrete estimators.
inline EquivalenceReport classical_equivalence_check(const BSDEAssembly& a, const TimeField& b,
                                                     const PathEnsemble& ens, int lag = 1) {
    const int n = ens.spec.paths;
    const TimeGrid& tg = ens.spec.tgrid;
    const int d = ens.spec.d, du = a.du;
    TimeField br = resample_time(b, tg);
    std::vector<double> r1(n, -1.0), r2(n, -1.0);
    parallel_for(n, [&](long i) {
        BrownianPath p = ens.path(i);
        BSDESolution sol;
        try {
            sol = assemble_solution(a, p);
        } catch (const BoxExitError&) {
            return;
        }
        // bracket: cov(W, Y)_{a,c} at T vs int (Z^*)_{a,c} dt = int z[c*d+a] dt
        PathFunctional w = brownian_as_functional(p);
        PathFunctional cov = covariation(w, sol.y, lag);
        double worst = 0;
        for (int aix = 0; aix < d; ++aix)
            for (int c = 0; c < du; ++c) {
                double zint = 0;
                for (int k = 0; k < tg.steps; ++k) zint += sol.z.value(k, c * d + aix) * tg.dt();
                worst = std::max(worst, std::abs(cov.value(tg.steps, aix * du + c) - zint));
            }
        r1[i] = worst;
        // A^{W,Y}(b) via chain rule vs direct sum Z b dt
        PathFunctional awy = apply_chain_rule(a.awy, p);
        double worst2 = 0;
        std::vector<double> direct(du, 0.0);
        for (int k = 0; k <= tg.steps; ++k) {
            for (int c = 0; c < du; ++c)
                worst2 = std::max(worst2, std::abs(awy.value(k, c) - direct[c]));
            if (k < tg.steps) {
                const double* x = &p.positions[static_cast<size_t>(k) * d];
                for (int c = 0; c < du; ++c) {
                    double s = 0;
                    for (int j = 0; j < d; ++j)
                        s += sol.z.value(k, c * d + j) * interpolate(br.at(k), j, x);
                    direct[c] += s * tg.dt();
                }
            }
        }
        r2[i] = worst2;
    });
    EquivalenceReport rep;
    RunningStat s1, s2;
    for (int i = 0; i < n; ++i) {
        if (r1[i] < 0) {
            ++rep.paths_rejected;
            continue;
        }
        s1.add(r1[i]);
        s2.add(r2[i]);
        ++rep.paths_used;
    }
    rep.bracket_residual = s1.mean();
    rep.awy_residual = s2.mean();
    return rep;
}

// --- uniqueness probe -------------------------------------------------------------

struct UniquenessProbeEntry {
    double epsilon = 0;
    double max_sigma_deviation = 0;  // max |stat| / stderr over test entries
    bool martingale_pass = true;
};

struct UniquenessProbeReport {
    std::vector<UniquenessProbeEntry> entries;
    double detection_threshold = -1;  // smallest probed epsilon that fails the test
};

// Perturb gamma = u + eps * cos-mode * (T - t)/T (terminal condition kept) and
// check that the assembled M fails the martingale test once eps is above the
// test resolution.
inline UniquenessProbeReport uniqueness_probe(const TimeField& u, const TimeField& b,
                                              const LipschitzDriver& f, const Field& terminal,
                                              const PathEnsemble& ens,
                                              const std::vector<double>& epsilons, int mode = 8) {
    UniquenessProbeReport rep;
    const GridSpec& g = u.grid();
    for (double eps : epsilons) {
        TimeField gamma = u;
        const double xi = g.freq(mode);
        for (int k = 0; k <= u.tgrid.steps; ++k) {
            double t = u.tgrid.node(k);
            double amp = eps * (u.tgrid.horizon - t) / u.tgrid.horizon;
            Field pert = make_field(g, u.channels(), [&](int, const double* x) {
                double v = amp;
                for (int aix = 0; aix < g.d; ++aix) v *= std::cos(xi * x[aix]);
                return v;
            });
            gamma.at(k) += pert;
        }
        BSDEAssembly assembly = build_bsde_assembly(gamma, b, f, terminal, ens.spec.tgrid);
        auto make_m = [&](const BrownianPath& p) { return assemble_solution(assembly, p).m; };
        MartingaleTestReport mt = martingale_test(make_m, ens, g);
        UniquenessProbeEntry e;
        e.epsilon = eps;
        e.martingale_pass = mt.pass;
        for (const auto& en : mt.entries)
            if (en.stderror > 0)
                e.max_sigma_deviation = std::max(e.max_sigma_deviation,
                                                 std::abs(en.statistic) / en.stderror);
        rep.entries.push_back(e);
        if (!mt.pass && (rep.detection_threshold < 0 || eps < rep.detection_threshold))
            rep.detection_threshold = eps;
    }
    return rep;
}

}  // namespace roughbsde
