// fft.hpp
// Thin RAII wrapper over FFTW real transforms.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace aecbench {

// Unnormalized real-to-complex forward and complex-to-real inverse transforms
// of a fixed size. Planning uses FFTW_ESTIMATE so that results do not depend on
// timing measurements. Instances are not shareable between threads; plan
// creation itself is serialized internally.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft &) = delete;
    RealFft &operator=(const RealFft &) = delete;

    std::size_t size() const { return n_; }
    std::size_t bins() const { return n_ / 2 + 1; }

    // `in` is zero-padded to size(); `out` receives bins() values.
    void forward(std::span<const double> in, std::span<std::complex<double>> out);
    // `out` receives size() values scaled by 1/size().
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
    std::size_t n_;
    double *real_ = nullptr;
    void *spec_ = nullptr;
    void *fwd_ = nullptr;
    void *inv_ = nullptr;
};

// Smallest 2^a 3^b 5^c >= n.
std::size_t next_fast_size(std::size_t n);

}  // namespace aecbench
