// adaptive.cpp

#include "aecbench/adaptive.hpp"

#include "aecbench/mixer.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>

namespace aecbench {

namespace {

// Multichannel NLMS over the references in `x` (one channel per filter).
NlmsResult run_nlms(const Waveform &mic, const Waveform &x, const NlmsConfig &cfg) {
    if (mic.channels() != 1) throw std::invalid_argument("nlms: microphone input must be mono");
    if (mic.length() != x.length()) throw std::invalid_argument("nlms: microphone and far-end lengths differ");
    if (cfg.taps == 0 || cfg.taps > kMaxNlmsTaps)
        throw std::invalid_argument("nlms: filter length must be in [1, " + std::to_string(kMaxNlmsTaps) + "]");
    if (!(cfg.mu > 0 && cfg.mu < 2)) throw std::invalid_argument("nlms: step size must be in (0, 2)");
    if (!(cfg.epsilon > 0)) throw std::invalid_argument("nlms: regularization must be positive");

    const std::size_t P = x.channels();
    const std::size_t K = cfg.taps;
    const std::size_t N = mic.length();
    NlmsResult res;
    res.error = Waveform(1, N, mic.sample_rate());
    res.taps.assign(P, std::vector<double>(K, 0.0));
    res.trace.interval = cfg.trace_interval;
    res.trace.paths = P;
    res.trace.taps = K;

    // Reversed history stored twice so that a contiguous K-window always
    // exists: hist[p][pos .. pos + K) holds x(n), x(n-1), ..., x(n-K+1).
    std::vector<std::vector<double>> hist(P, std::vector<double>(2 * K, 0.0));
    std::size_t pos = K;
    const auto &y = mic.channel(0);
    auto &e = res.error.channel(0);
    for (std::size_t n = 0; n < N; ++n) {
        pos = pos == 0 ? K - 1 : pos - 1;
        for (std::size_t p = 0; p < P; ++p) {
            hist[p][pos] = x(p, n);
            hist[p][pos + K] = x(p, n);
        }
        double yhat = 0.0, power = 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            const double *xp = hist[p].data() + pos;
            const double *h = res.taps[p].data();
            for (std::size_t k = 0; k < K; ++k) {
                yhat += h[k] * xp[k];
                power += xp[k] * xp[k];
            }
        }
        const double err = y[n] - yhat;
        e[n] = err;
        if (!std::isfinite(err))
            throw DivergenceError("nlms: diverged at sample " + std::to_string(n), n);
        const double step = cfg.mu * err / (power + cfg.epsilon);
        if (step != 0.0) {
            for (std::size_t p = 0; p < P; ++p) {
                const double *xp = hist[p].data() + pos;
                double *h = res.taps[p].data();
                for (std::size_t k = 0; k < K; ++k) h[k] += step * xp[k];
            }
        }
        if (!std::isfinite(step))
            throw DivergenceError("nlms: non-finite update at sample " + std::to_string(n), n);
        if (cfg.trace_interval > 0 && (n + 1) % cfg.trace_interval == 0) {
            std::vector<float> snap;
            snap.reserve(P * K);
            for (const auto &h : res.taps)
                for (double v : h) snap.push_back(static_cast<float>(v));
            res.trace.snapshots.push_back(std::move(snap));
        }
    }
    for (const auto &h : res.taps)
        for (double v : h)
            if (!std::isfinite(v)) throw DivergenceError("nlms: non-finite taps at end of signal", N);
    return res;
}

}  // namespace

NlmsResult nlms_cancel(const Waveform &mic, const Waveform &farend, const NlmsConfig &cfg) {
    if (farend.channels() != 1) throw std::invalid_argument("nlms_cancel: far-end input must be mono");
    return run_nlms(mic, farend, cfg);
}

NlmsResult stereo_nlms_cancel(const Waveform &mic, const Waveform &farend, const NlmsConfig &cfg,
                              Decorrelation decorrelation) {
    if (farend.channels() != 2) throw std::invalid_argument("stereo_nlms_cancel: far-end input must have two channels");
    if (decorrelation.alpha < 0) throw std::invalid_argument("stereo_nlms_cancel: alpha must be nonnegative");
    return run_nlms(mic, half_wave_preprocess(farend, decorrelation.alpha), cfg);
}

double misalignment(const std::vector<std::vector<double>> &estimate, const std::vector<std::vector<double>> &truth) {
    if (estimate.size() != truth.size()) throw std::invalid_argument("misalignment: path counts differ");
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < estimate.size(); ++p) {
        const auto &h_hat = estimate[p];
        const auto &h = truth[p];
        for (std::size_t k = 0; k < h_hat.size(); ++k) {
            const double ht = k < h.size() ? h[k] : 0.0;
            num += (h_hat[k] - ht) * (h_hat[k] - ht);
            den += ht * ht;
        }
    }
    if (!(den > 0)) throw std::invalid_argument("misalignment: true response is zero");
    return std::sqrt(num / den);
}

namespace {
template <typename T>
void put(std::ostream &os, T v) {
    os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
}  // namespace

void save_tap_trace(const TapTrace &trace, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_tap_trace: cannot create " + path.string());
    out.write("TAPT", 4);
    put<std::uint16_t>(out, 1);
    put<std::uint16_t>(out, 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(trace.paths));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(trace.taps));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(trace.snapshots.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(trace.interval));
    for (const auto &s : trace.snapshots)
        out.write(reinterpret_cast<const char *>(s.data()), static_cast<std::streamsize>(s.size() * sizeof(float)));
    if (!out) throw std::runtime_error("save_tap_trace: write failed for " + path.string());
}

}  // namespace aecbench
