#pragma once

// The occupation-time operator A^{W,W} and its relatives. For smooth
// integrands it is the left-Riemann time integral of l(r, W_r); for rough
// integrands it is evaluated through the chain-rule representation
//   A_t(l) = phi(t, W_t) - phi(0, W_0) - sum_k grad phi^*(t_k, W_k) dW_k,
// where phi solves the linear terminal-value heat equation driven by l.
// The Markov operator A^{W,Y} for Y = gamma(t, W_t) reduces to
// A^{W,W}((grad gamma)^* b).

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughbsde/mild_pde.hpp"
#include "roughbsde/parallel.hpp"
#include "roughbsde/paths.hpp"

namespace roughbsde {

enum class Provenance { SmoothIntegral, ChainRule, Composed };

// Continuous R^dim-valued process sampled on a time grid; value(0) = 0 for
// operator outputs.
struct PathFunctional {
    TimeGrid tgrid;
    int dim = 1;
    std::vector<double> values;  // (steps+1) * dim
    Provenance provenance = Provenance::SmoothIntegral;

    PathFunctional() = default;
    PathFunctional(const TimeGrid& tg, int dm, Provenance prov)
        : tgrid(tg), dim(dm), values(static_cast<size_t>(tg.nodes()) * dm, 0.0), provenance(prov) {}

    double value(int k, int i) const { return values[static_cast<size_t>(k) * dim + i]; }
    double& value(int k, int i) { return values[static_cast<size_t>(k) * dim + i]; }
    double sup_abs() const {
        double m = 0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

struct BoxExitError : std::runtime_error {
    explicit BoxExitError(const std::string& what) : std::runtime_error(what) {}
};

inline void require_inside_box(const BrownianPath& path, const GridSpec& g, double margin = 1.0) {
    const double limit = g.half_width - margin;
    if (path.max_abs_position() > limit)
        throw BoxExitError("path " + std::to_string(path.path_id) + " exits the box: max |W| = " +
                           std::to_string(path.max_abs_position()) + " > " + std::to_string(limit));
}

// --- covariation -------------------------------------------------------------

// Discrete eps-lagged covariation  (1/eps) int_0^t (Y_{s+eps}-Y_s)(X_{s+eps}-X_s) ds
// as a matrix-valued path, entry (i,j) at channel i*dimX + j. eps = lag * dt.
inline PathFunctional covariation(const PathFunctional& y, const PathFunctional& x, int lag) {
    if (y.tgrid.nodes() != x.tgrid.nodes()) throw std::invalid_argument("covariation: grid mismatch");
    if (lag < 1) throw std::invalid_argument("covariation: lag must be >= 1 step");
    const int m = y.tgrid.steps;
    const double dt = y.tgrid.dt();
    const double eps = lag * dt;
    PathFunctional out(y.tgrid, y.dim * x.dim, Provenance::Composed);
    std::vector<double> acc(y.dim * x.dim, 0.0);
    for (int k = 0; k < m; ++k) {
        int kl = std::min(k + lag, m);
        for (int i = 0; i < y.dim; ++i) {
            double dy = y.value(kl, i) - y.value(k, i);
            for (int j = 0; j < x.dim; ++j) {
                double dxv = x.value(kl, j) - x.value(k, j);
                acc[i * x.dim + j] += dy * dxv * dt / eps;
            }
        }
        for (int i = 0; i < y.dim * x.dim; ++i) out.value(k + 1, i) = acc[i];
    }
    return out;
}

inline PathFunctional brownian_as_functional(const BrownianPath& p) {
    PathFunctional out(p.tgrid, p.d, Provenance::Composed);
    out.values = p.positions;
    return out;
}

// --- smooth route ------------------------------------------------------------

using SpaceTimeFn = std::function<void(double t, const double* x, double* out)>;

// Left-Riemann discretization of int_0^t l(r, W_r) dr for pointwise l.
inline PathFunctional a_ww_smooth(const SpaceTimeFn& l, int dim, const BrownianPath& path) {
    PathFunctional out(path.tgrid, dim, Provenance::SmoothIntegral);
    const double dt = path.tgrid.dt();
    std::vector<double> val(dim), acc(dim, 0.0);
    for (int k = 0; k < path.tgrid.steps; ++k) {
        l(path.tgrid.node(k), &path.positions[static_cast<size_t>(k) * path.d], val.data());
        for (int i = 0; i < dim; ++i) {
            acc[i] += val[i] * dt;
            out.value(k + 1, i) = acc[i];
        }
    }
    return out;
}

// Same, for a grid-sampled integrand evaluated by interpolation.
inline PathFunctional a_ww_smooth(const TimeField& l, const BrownianPath& path) {
    const int dim = l.channels();
    const bool same_grid = l.tgrid.nodes() == path.tgrid.nodes() &&
                           std::abs(l.tgrid.horizon - path.tgrid.horizon) < 1e-12;
    PathFunctional out(path.tgrid, dim, Provenance::SmoothIntegral);
    const double dt = path.tgrid.dt();
    std::vector<double> acc(dim, 0.0);
    for (int k = 0; k < path.tgrid.steps; ++k) {
        const double* x = &path.positions[static_cast<size_t>(k) * path.d];
        for (int i = 0; i < dim; ++i) {
            double v = same_grid ? interpolate(l.at(k), i, x)
                                 : interpolate_time(l, i, path.tgrid.node(k), x);
            acc[i] += v * dt;
            out.value(k + 1, i) = acc[i];
        }
    }
    return out;
}

// --- rough route (chain rule) --------------------------------------------------

// phi and grad phi on the path's time grid; built once per integrand and
// shared across an ensemble.
struct ChainRuleKernel {
    TimeField phi;       // dl channels
    TimeField grad_phi;  // d * dl channels, plane (a*dl + c) = d_a phi_c
};

inline ChainRuleKernel build_chain_kernel(const TimeField& l, const Field& psi) {
    ChainRuleKernel k;
    k.phi = solve_linear_phi(l, psi);
    k.grad_phi = TimeField(l.tgrid, l.grid(), l.grid().d * l.channels());
    for (int j = 0; j <= l.tgrid.steps; ++j) k.grad_phi.at(j) = gradient(k.phi.at(j));
    return k;
}

// Resample a time field onto another uniform grid (linear in t). Used when
// the integrand is tabulated more coarsely than the path.
inline TimeField resample_time(const TimeField& l, const TimeGrid& tg) {
    if (l.tgrid.nodes() == tg.nodes() && std::abs(l.tgrid.horizon - tg.horizon) < 1e-12) return l;
    TimeField out(tg, l.grid(), l.channels());
    for (int k = 0; k <= tg.steps; ++k) {
        double t = tg.node(k);
        double s = t / l.tgrid.dt();
        int k0 = std::max(0, std::min(static_cast<int>(std::floor(s)), l.tgrid.steps - 1));
        double w = std::max(0.0, std::min(1.0, s - k0));
        Field f = l.at(k0);
        f *= (1 - w);
        Field g = l.at(k0 + 1);
        g *= w;
        f += g;
        out.at(k) = std::move(f);
    }
    return out;
}

// Euler-Ito evaluation of the chain rule along one path; grad phi enters at
// left endpoints (adapted evaluation).
inline PathFunctional apply_chain_rule(const ChainRuleKernel& ker, const BrownianPath& path) {
    const GridSpec& g = ker.phi.grid();
    require_inside_box(path, g);
    const int dl = ker.phi.channels();
    const int d = path.d;
    PathFunctional out(path.tgrid, dl, Provenance::ChainRule);
    std::vector<double> ito(dl, 0.0), phi0(dl);
    const double* x0 = &path.positions[0];
    for (int c = 0; c < dl; ++c) phi0[c] = interpolate(ker.phi.at(0), c, x0);
    for (int k = 0; k <= path.tgrid.steps; ++k) {
        const double* x = &path.positions[static_cast<size_t>(k) * d];
        for (int c = 0; c < dl; ++c)
            out.value(k, c) = interpolate(ker.phi.at(k), c, x) - phi0[c] - ito[c];
        if (k < path.tgrid.steps) {
            for (int c = 0; c < dl; ++c) {
                double s = 0;
                for (int a = 0; a < d; ++a)
                    s += interpolate(ker.grad_phi.at(k), a * dl + c, x) * path.dw(k, a);
                ito[c] += s;
            }
        }
    }
    return out;
}

// Martingale part sum_k grad phi^*(t_k, W_k) dW_k of the same representation
// (negative control for the orthogonality test).
inline PathFunctional chain_rule_martingale_part(const ChainRuleKernel& ker,
                                                 const BrownianPath& path) {
    const int dl = ker.phi.channels();
    const int d = path.d;
    require_inside_box(path, ker.phi.grid());
    PathFunctional out(path.tgrid, dl, Provenance::Composed);
    std::vector<double> ito(dl, 0.0);
    for (int k = 0; k < path.tgrid.steps; ++k) {
        const double* x = &path.positions[static_cast<size_t>(k) * d];
        for (int c = 0; c < dl; ++c) {
            double s = 0;
            for (int a = 0; a < d; ++a)
                s += interpolate(ker.grad_phi.at(k), a * dl + c, x) * path.dw(k, a);
            ito[c] += s;
            out.value(k + 1, c) = ito[c];
        }
    }
    return out;
}

// A^{W,W}(l) for l in C([0,T]; H^{-beta}_p) via the chain rule. The result
// does not depend on psi beyond the Euler tolerance; psi = 0 by default.
inline PathFunctional a_ww_rough(const TimeField& l, const BrownianPath& path, const Field* psi = nullptr) {
    TimeField lr = resample_time(l, path.tgrid);
    Field zero(l.grid(), l.channels());
    ChainRuleKernel ker = build_chain_kernel(lr, psi ? *psi : zero);
    return apply_chain_rule(ker, path);
}

// A^{W,Y}(b) = A^{W,W}((grad gamma)^* b) for Y_t = gamma(t, W_t).
inline TimeField a_wy_integrand(const TimeField& b, const TimeField& gamma) {
    if (b.tgrid.nodes() != gamma.tgrid.nodes())
        throw std::invalid_argument("a_wy: b and gamma must share a time grid");
    const CutoffSpec spec{nyquist_level(b.grid()), CutoffProfile::RaisedCosine};
    TimeField l(b.tgrid, b.grid(), gamma.channels());
    for (int k = 0; k <= b.tgrid.steps; ++k)
        l.at(k) = gradient_contraction(gradient(gamma.at(k)), b.at(k), spec);
    return l;
}

inline PathFunctional a_wy(const TimeField& b, const TimeField& gamma, const BrownianPath& path) {
    return a_ww_rough(a_wy_integrand(b, gamma), path);
}

// --- ensemble diagnostics ----------------------------------------------------

struct ConsistencyReport {
    double mean_sup_diff = 0.0;
    double max_sup_diff = 0.0;
    int paths_used = 0;
    int paths_rejected = 0;  // box exits
};

// Per-path sup_t | A_rough(g) - A_smooth(g) | for a bounded continuous grid
// integrand g; the rough route must reproduce the classical integral.
inline ConsistencyReport classical_consistency(const TimeField& g, const PathEnsemble& ens) {
    Field zero(g.grid(), g.channels());
    TimeField gr = resample_time(g, ens.spec.tgrid);
    ChainRuleKernel ker = build_chain_kernel(gr, zero);
    const int n = ens.spec.paths;
    std::vector<double> sup(n, -1.0);
    parallel_for(n, [&](long i) {
        BrownianPath p = ens.path(i);
        try {
            PathFunctional rough = apply_chain_rule(ker, p);
            PathFunctional smooth = a_ww_smooth(gr, p);
            double m = 0;
            for (size_t j = 0; j < rough.values.size(); ++j)
                m = std::max(m, std::abs(rough.values[j] - smooth.values[j]));
            sup[i] = m;
        } catch (const BoxExitError&) {
            sup[i] = -1.0;
        }
    });
    ConsistencyReport rep;
    RunningStat st;
    for (double v : sup) {
        if (v < 0) {
            ++rep.paths_rejected;
            continue;
        }
        st.add(v);
        rep.max_sup_diff = std::max(rep.max_sup_diff, v);
        ++rep.paths_used;
    }
    rep.mean_sup_diff = st.mean();
    return rep;
}

enum class TestMartingale { BrownianComponent, SigmaIntegral };

struct OrthogonalityReport {
    std::vector<double> bracket_mean;    // per (component of A) x (component of N)
    std::vector<double> bracket_stderr;
    bool pass = true;  // every entry within 3 standard errors of zero
    int paths_used = 0;
    int paths_rejected = 0;
};

namespace occupation_detail {

inline PathFunctional test_martingale(TestMartingale kind, const BrownianPath& p) {
    if (kind == TestMartingale::BrownianComponent) return brownian_as_functional(p);
    // N_t = sum_k sigma(W_k) dW_k with sigma = tanh, componentwise
    PathFunctional out(p.tgrid, p.d, Provenance::Composed);
    std::vector<double> acc(p.d, 0.0);
    for (int k = 0; k < p.tgrid.steps; ++k) {
        for (int a = 0; a < p.d; ++a) {
            acc[a] += std::tanh(p.w(k, a)) * p.dw(k, a);
            out.value(k + 1, a) = acc[a];
        }
    }
    return out;
}

}  // namespace occupation_detail

// Ensemble mean of [A(l), N]_T against zero at three standard errors. With
// negative_control the martingale part of the representation replaces A,
// which must be rejected.
inline OrthogonalityReport orthogonality_check(const TimeField& l, const PathEnsemble& ens,
                                               TestMartingale kind, int lag = 1,
                                               bool negative_control = false) {
    Field zero(l.grid(), l.channels());
    TimeField lr = resample_time(l, ens.spec.tgrid);
    ChainRuleKernel ker = build_chain_kernel(lr, zero);
    const int n = ens.spec.paths;
    const int dims = l.channels() * ens.spec.d;
    std::vector<std::vector<double>> slots(n);
    parallel_for(n, [&](long i) {
        BrownianPath p = ens.path(i);
        try {
            PathFunctional a = negative_control ? chain_rule_martingale_part(ker, p)
                                                : apply_chain_rule(ker, p);
            PathFunctional nmart = occupation_detail::test_martingale(kind, p);
            PathFunctional br = covariation(a, nmart, lag);
            slots[i].assign(dims, 0.0);
            for (int j = 0; j < dims; ++j) slots[i][j] = br.value(br.tgrid.steps, j);
        } catch (const BoxExitError&) {
            slots[i].clear();
        }
    });
    OrthogonalityReport rep;
    std::vector<RunningStat> st(dims);
    for (const auto& s : slots) {
        if (s.empty()) {
            ++rep.paths_rejected;
            continue;
        }
        for (int j = 0; j < dims; ++j) st[j].add(s[j]);
        ++rep.paths_used;
    }
    for (int j = 0; j < dims; ++j) {
        rep.bracket_mean.push_back(st[j].mean());
        rep.bracket_stderr.push_back(st[j].stderror());
        if (std::abs(st[j].mean()) > 3.0 * st[j].stderror()) rep.pass = false;
    }
    return rep;
}

}  // namespace roughbsde
