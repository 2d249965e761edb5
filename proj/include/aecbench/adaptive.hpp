// adaptive.hpp
// NLMS echo canceller baselines. These are plain NLMS and stereo NLMS with
// half-wave rectifier decorrelation, not the joint-optimized NLMS family.

#pragma once

#include "aecbench/signal.hpp"

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace aecbench {

inline constexpr std::size_t kMaxNlmsTaps = 8192;

struct NlmsConfig {
    std::size_t taps = 512;
    double mu = 0.5;
    double epsilon = 1e-2;
    // Record every path's taps each `trace_interval` samples; 0 disables.
    std::size_t trace_interval = 0;
};

// Thrown when a tap or the error signal becomes non-finite.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string &what, std::size_t sample) : std::runtime_error(what), sample(sample) {}
    std::size_t sample;
};

struct TapTrace {
    std::size_t interval = 0;
    std::size_t paths = 0;
    std::size_t taps = 0;
    // snapshot -> path-major taps (paths * taps values)
    std::vector<std::vector<float>> snapshots;
};

struct NlmsResult {
    Waveform error;
    // Final filter per reference channel.
    std::vector<std::vector<double>> taps;
    TapTrace trace;
};

// e(n) = y(n) - h^T x(n); h += mu e(n) x(n) / (|x(n)|^2 + eps). Adapts
// continuously, with no double-talk control.
NlmsResult nlms_cancel(const Waveform &mic, const Waveform &farend, const NlmsConfig &cfg = {});

struct Decorrelation {
    // Half-wave rectifier strength; 0 means off.
    double alpha = 0.0;
};

// Two filters sharing one normalization |x1(n)|^2 + |x2(n)|^2. With alpha > 0
// each far-end channel is adapted on x + alpha (x + |x|) / 2, which must be
// the signal actually fed to the loudspeakers (see half_wave_preprocess).
NlmsResult stereo_nlms_cancel(const Waveform &mic, const Waveform &farend, const NlmsConfig &cfg = {},
                              Decorrelation decorrelation = {});

// |h_hat - h| / |h| over all paths concatenated; true responses are truncated
// or zero-padded to the estimate length.
double misalignment(const std::vector<std::vector<double>> &estimate, const std::vector<std::vector<double>> &truth);

// Binary dump: "TAPT", u16 version, u16 reserved, u32 paths, u32 taps,
// u32 snapshots, u32 interval, then float32 taps snapshot-major, path-major.
void save_tap_trace(const TapTrace &trace, const std::filesystem::path &path);

}  // namespace aecbench
