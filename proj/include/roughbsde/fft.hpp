#pragma once

// Real-to-complex FFT backend on top of FFTW3. Plans and scratch buffers are
// cached per grid shape; FFTW's planner is not thread-safe, and executing a
// plan on its own buffers is not either, so every use of a cache entry is
// serialized by the entry mutex. Plans use FFTW_ESTIMATE so the chosen
// algorithm (and hence the bit pattern of results) does not depend on timing.

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace roughbsde::fft {

inline int spectral_size(int d, int n) {
    return d == 1 ? n / 2 + 1 : n * (n / 2 + 1);
}

namespace detail {

struct PlanEntry {
    std::mutex mtx;
    int d = 0, n = 0;
    double* real_buf = nullptr;
    fftw_complex* cplx_buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    PlanEntry(int d_, int n_) : d(d_), n(n_) {
        const int nn = d == 1 ? n : n * n;
        real_buf = fftw_alloc_real(nn);
        cplx_buf = fftw_alloc_complex(spectral_size(d, n));
        if (d == 1) {
            fwd = fftw_plan_dft_r2c_1d(n, real_buf, cplx_buf, FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r_1d(n, cplx_buf, real_buf, FFTW_ESTIMATE);
        } else {
            fwd = fftw_plan_dft_r2c_2d(n, n, real_buf, cplx_buf, FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r_2d(n, n, cplx_buf, real_buf, FFTW_ESTIMATE);
        }
        if (!fwd || !bwd) throw std::runtime_error("fftw plan creation failed");
    }
    ~PlanEntry() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real_buf);
        fftw_free(cplx_buf);
    }
    PlanEntry(const PlanEntry&) = delete;
    PlanEntry& operator=(const PlanEntry&) = delete;
};

inline PlanEntry& entry_for(int d, int n) {
    static std::mutex registry_mtx;
    static std::map<std::pair<int, int>, std::unique_ptr<PlanEntry>> registry;
    std::lock_guard<std::mutex> lk(registry_mtx);
    auto& slot = registry[{d, n}];
    if (!slot) slot = std::make_unique<PlanEntry>(d, n);
    return *slot;
}

}  // namespace detail

// Forward transform of one real plane; output scaled by 1/N^d so the bins are
// Fourier-series coefficients (f = sum_k c_k e^{i xi_k x} with Hermitian
// completion of the half-spectrum).
inline void forward(int d, int n, const double* in, std::complex<double>* out) {
    auto& e = detail::entry_for(d, n);
    std::lock_guard<std::mutex> lk(e.mtx);
    const int nn = d == 1 ? n : n * n;
    const int ns = spectral_size(d, n);
    std::memcpy(e.real_buf, in, sizeof(double) * nn);
    fftw_execute(e.fwd);
    const double scale = 1.0 / static_cast<double>(nn);
    for (int i = 0; i < ns; ++i)
        out[i] = scale * std::complex<double>(e.cplx_buf[i][0], e.cplx_buf[i][1]);
}

// Inverse of forward(); FFTW's c2r destroys its input, so we copy.
inline void inverse(int d, int n, const std::complex<double>* in, double* out) {
    auto& e = detail::entry_for(d, n);
    std::lock_guard<std::mutex> lk(e.mtx);
    const int nn = d == 1 ? n : n * n;
    const int ns = spectral_size(d, n);
    for (int i = 0; i < ns; ++i) {
        e.cplx_buf[i][0] = in[i].real();
        e.cplx_buf[i][1] = in[i].imag();
    }
    fftw_execute(e.bwd);
    std::memcpy(out, e.real_buf, sizeof(double) * nn);
}

}  // namespace roughbsde::fft
