// masking.hpp
// Time-frequency masks, oracle targets, mask application and the MSK1 file
// format shared with external estimators.

#pragma once

#include "aecbench/signal.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace aecbench {

enum class MaskKind : std::uint16_t { kMagnitudeMask = 0, kComplexSpectrum = 1 };
enum class MaskSource { kOracle, kFile };

// Per-channel T-F masks (real, in [0, 1]) or complex spectral targets, stored
// as 32-bit floats in (frame, bin, channel) order. Complex values interleave
// real and imaginary parts.
struct MaskSet {
    MaskKind kind = MaskKind::kMagnitudeMask;
    MaskSource source = MaskSource::kOracle;
    std::uint32_t frames = 0;
    std::uint32_t bins = 0;
    std::uint32_t channels = 0;
    std::vector<float> values;

    std::size_t cells() const { return std::size_t{frames} * bins * channels; }
    std::size_t index(std::size_t t, std::size_t f, std::size_t c) const { return (t * bins + f) * channels + c; }
    float mask(std::size_t t, std::size_t f, std::size_t c) const { return values[index(t, f, c)]; }
    std::complex<float> spectrum(std::size_t t, std::size_t f, std::size_t c) const {
        const auto i = 2 * index(t, f, c);
        return {values[i], values[i + 1]};
    }
    bool matches(const Spectrogram &s) const {
        return frames == s.frames() && bins == s.bins() && channels == s.channels();
    }

    // Magnitude-mask or complex-spectrum set shaped like `s`.
    static MaskSet zeros_like(const Spectrogram &s, MaskKind kind);
    // Complex spectrum holding `s` (rounded to float).
    static MaskSet from_spectrogram(const Spectrogram &s, MaskSource source = MaskSource::kOracle);

    friend bool operator==(const MaskSet &, const MaskSet &) = default;
};

// min(1, |S| / |Y|) per cell, 0 where |Y| = 0. Throws std::invalid_argument on
// shape mismatch.
MaskSet oracle_smm(const Spectrogram &S, const Spectrogram &Y);

// Complex spectral target: the near-end spectrum itself.
MaskSet oracle_complex(const Spectrogram &S);

// Magnitude masks scale |Y| and keep the phase of Y; complex spectra replace Y
// outright (configuration and length are taken from Y).
Spectrogram apply_mask(const Spectrogram &Y, const MaskSet &m);

struct MaskFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MaskFormatError : MaskFileError {
    using MaskFileError::MaskFileError;
};
struct MaskDimensionError : MaskFileError {
    using MaskFileError::MaskFileError;
};
struct MaskTruncatedError : MaskFileError {
    using MaskFileError::MaskFileError;
};

inline constexpr std::uint16_t kMaskFileVersion = 1;
// Refuses payloads above this many floats (4 GiB of data).
inline constexpr std::uint64_t kMaxMaskFloats = std::uint64_t{1} << 30;

// MSK1 layout, little-endian: magic "MSK1", u16 version, u16 kind, u32 frames,
// u32 bins, u32 channels, float32 payload.
void save_masks(const MaskSet &m, const std::filesystem::path &path);
// Magnitude masks are clipped to [0, 1] on load (NaN becomes 0).
MaskSet load_masks(const std::filesystem::path &path);

}  // namespace aecbench
