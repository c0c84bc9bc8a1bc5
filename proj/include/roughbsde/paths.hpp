#pragma once

// Discretized Brownian trajectories with reproducible per-path streams.
// Ensembles are lightweight: a path is materialized on demand from
// (seed, path id), so scanning 10^4 paths never holds them all in memory.

#include <cstdint>
#include <vector>

#include "roughbsde/rng.hpp"
#include "roughbsde/time_field.hpp"

namespace roughbsde {

struct BrownianPath {
    TimeGrid tgrid;
    int d = 1;
    uint64_t seed = 0;
    uint64_t path_id = 0;
    std::vector<double> increments;  // steps * d, dW_k ~ N(0, dt I)
    std::vector<double> positions;   // (steps+1) * d, W_0 = 0

    double w(int k, int a) const { return positions[static_cast<size_t>(k) * d + a]; }
    double dw(int k, int a) const { return increments[static_cast<size_t>(k) * d + a]; }
    double max_abs_position() const {
        double m = 0;
        for (double v : positions) m = std::max(m, std::abs(v));
        return m;
    }
};

struct EnsembleSpec {
    int paths = 1;
    TimeGrid tgrid;
    int d = 1;
    uint64_t seed = 0;
};

inline BrownianPath make_path(const EnsembleSpec& spec, uint64_t path_id) {
    BrownianPath p;
    p.tgrid = spec.tgrid;
    p.d = spec.d;
    p.seed = spec.seed;
    p.path_id = path_id;
    const int m = spec.tgrid.steps;
    const double sdt = std::sqrt(spec.tgrid.dt());
    p.increments.resize(static_cast<size_t>(m) * spec.d);
    p.positions.assign(static_cast<size_t>(m + 1) * spec.d, 0.0);
    RandomStream rs(spec.seed, 0x9d2c5680ULL ^ path_id);
    for (int k = 0; k < m; ++k)
        for (int a = 0; a < spec.d; ++a) {
            double g = sdt * rs.gaussian();
            p.increments[static_cast<size_t>(k) * spec.d + a] = g;
            p.positions[static_cast<size_t>(k + 1) * spec.d + a] =
                p.positions[static_cast<size_t>(k) * spec.d + a] + g;
        }
    return p;
}

struct PathEnsemble {
    EnsembleSpec spec;
    BrownianPath path(uint64_t i) const { return make_path(spec, i); }
};

inline PathEnsemble sample_ensemble(int paths, int steps, double horizon, int d, uint64_t seed) {
    if (paths < 1) throw std::invalid_argument("sample_ensemble: paths must be >= 1");
    return PathEnsemble{EnsembleSpec{paths, TimeGrid(horizon, steps), d, seed}};
}

// Streaming mean / stderr with compensated summation.
class RunningStat {
  public:
    void add(double x) {
        ++n_;
        add_comp(sum_, comp_sum_, x);
        add_comp(sum2_, comp_sum2_, x * x);
    }
    long count() const { return n_; }
    double mean() const { return n_ > 0 ? sum_ / n_ : 0.0; }
    double variance() const {
        if (n_ < 2) return 0.0;
        double m = mean();
        double v = (sum2_ - n_ * m * m) / (n_ - 1);
        return v > 0 ? v : 0.0;
    }
    double stderror() const { return n_ > 0 ? std::sqrt(variance() / n_) : 0.0; }

  private:
    static void add_comp(double& acc, double& comp, double x) {
        double y = x - comp;
        double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    long n_ = 0;
    double sum_ = 0, comp_sum_ = 0;
    double sum2_ = 0, comp_sum2_ = 0;
};

}  // namespace roughbsde
