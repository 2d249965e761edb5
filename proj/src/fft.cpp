// fft.cpp

#include "aecbench/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace aecbench {

namespace {
std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("RealFft: size must be positive");
    std::lock_guard<std::mutex> lock(planner_mutex());
    real_ = fftw_alloc_real(n_);
    auto *spec = fftw_alloc_complex(bins());
    spec_ = spec;
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec, real_, FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw std::runtime_error("RealFft: planning failed");
}

RealFft::~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(real_);
    fftw_free(spec_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
    if (in.size() > n_ || out.size() < bins()) throw std::invalid_argument("RealFft::forward: size mismatch");
    std::copy(in.begin(), in.end(), real_);
    std::fill(real_ + in.size(), real_ + n_, 0.0);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    auto *spec = static_cast<fftw_complex *>(spec_);
    for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec[k][0], spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    if (in.size() < bins() || out.size() < n_) throw std::invalid_argument("RealFft::inverse: size mismatch");
    auto *spec = static_cast<fftw_complex *>(spec_);
    for (std::size_t k = 0; k < bins(); ++k) {
        spec[k][0] = in[k].real();
        spec[k][1] = in[k].imag();
    }
    // Hermitian input: DC and Nyquist must be real for a real output.
    spec[0][1] = 0.0;
    if (n_ % 2 == 0) spec[n_ / 2][1] = 0.0;
    fftw_execute(static_cast<fftw_plan>(inv_));
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

std::size_t next_fast_size(std::size_t n) {
    std::size_t best = 1;
    while (best < n) best <<= 1;
    for (std::size_t p5 = 1; p5 <= best; p5 *= 5)
        for (std::size_t p35 = p5; p35 <= best; p35 *= 3) {
            std::size_t v = p35;
            while (v < n) v <<= 1;
            best = std::min(best, v);
        }
    return best;
}

}  // namespace aecbench
