// signal.cpp

#include "aecbench/signal.hpp"

#include "aecbench/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace aecbench {

Waveform::Waveform(std::size_t channels, std::size_t length, int sample_rate)
    : samples_(channels, std::vector<double>(length, 0.0)), sample_rate_(sample_rate) {
    if (channels == 0) throw std::invalid_argument("Waveform: need at least one channel");
    if (sample_rate <= 0) throw std::invalid_argument("Waveform: sample rate must be positive");
}

Waveform::Waveform(std::vector<std::vector<double>> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (samples_.empty()) throw std::invalid_argument("Waveform: need at least one channel");
    if (sample_rate <= 0) throw std::invalid_argument("Waveform: sample rate must be positive");
    for (const auto &ch : samples_)
        if (ch.size() != samples_[0].size())
            throw std::invalid_argument("Waveform: channels must have equal length");
}

Waveform Waveform::mono(std::vector<double> samples, int sample_rate) {
    std::vector<std::vector<double>> s;
    s.push_back(std::move(samples));
    return Waveform(std::move(s), sample_rate);
}

Waveform Waveform::select(std::size_t c) const { return mono(channel(c), sample_rate_); }

Waveform &Waveform::operator+=(const Waveform &other) {
    if (other.channels() != channels() || other.length() != length() || other.sample_rate_ != sample_rate_)
        throw std::invalid_argument("Waveform::operator+=: shape mismatch");
    for (std::size_t c = 0; c < channels(); ++c)
        for (std::size_t n = 0; n < length(); ++n) samples_[c][n] += other.samples_[c][n];
    return *this;
}

Waveform &Waveform::operator*=(double gain) {
    for (auto &ch : samples_)
        for (auto &v : ch) v *= gain;
    return *this;
}

Waveform operator+(Waveform a, const Waveform &b) { return a += b; }
Waveform operator*(Waveform a, double gain) { return a *= gain; }

std::vector<double> make_window(WindowType type, std::size_t len) {
    std::vector<double> w(len, 1.0);
    if (type == WindowType::kSqrtHann) {
        // Periodic Hann, so that the squared window overlap-adds to exactly 1 at 50% hop.
        for (std::size_t n = 0; n < len; ++n)
            w[n] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / len));
    }
    return w;
}

namespace {

std::vector<double> overlap_sum(const StftConfig &cfg) {
    const auto w = make_window(cfg.window, cfg.frame_len);
    std::vector<double> sum(cfg.hop, 0.0);
    for (std::size_t n = 0; n < cfg.frame_len; ++n) sum[n % cfg.hop] += w[n] * w[n];
    return sum;
}

}  // namespace

void validate(const StftConfig &cfg) {
    if (cfg.hop == 0 || cfg.hop > cfg.frame_len || cfg.frame_len > cfg.fft_size)
        throw std::invalid_argument("StftConfig: require 0 < hop <= frame_len <= fft_size");
    const auto sum = overlap_sum(cfg);
    for (double v : sum)
        if (std::abs(v - sum[0]) > 1e-10 || sum[0] <= 0.0)
            throw std::invalid_argument("StftConfig: window does not satisfy constant overlap-add at hop " +
                                        std::to_string(cfg.hop));
}

double cola_gain(const StftConfig &cfg) { return overlap_sum(cfg)[0]; }

Spectrogram::Spectrogram(std::size_t frames, std::size_t channels, StftConfig cfg, int sample_rate,
                         std::size_t signal_length)
    : frames_(frames),
      bins_(cfg.bins()),
      channels_(channels),
      cfg_(cfg),
      sample_rate_(sample_rate),
      signal_length_(signal_length),
      data_(frames * cfg.bins() * channels) {}

Spectrogram Spectrogram::zeros_like(std::size_t channels) const {
    return Spectrogram(frames_, channels, cfg_, sample_rate_, signal_length_);
}

Spectrogram Spectrogram::select(std::size_t c) const {
    if (c >= channels_) throw std::out_of_range("Spectrogram::select: channel out of range");
    Spectrogram out = zeros_like(1);
    for (std::size_t t = 0; t < frames_; ++t)
        for (std::size_t f = 0; f < bins_; ++f) out(t, f, 0) = (*this)(t, f, c);
    return out;
}

bool Spectrogram::same_shape(const Spectrogram &other) const {
    return frames_ == other.frames_ && bins_ == other.bins_ && channels_ == other.channels_;
}

std::size_t frame_count(std::size_t length, const StftConfig &cfg) {
    if (length < cfg.frame_len) return 0;
    return 1 + (length - cfg.frame_len + cfg.hop - 1) / cfg.hop;
}

Spectrogram stft(const Waveform &w, const StftConfig &cfg) {
    validate(cfg);
    if (w.length() < cfg.frame_len)
        throw std::invalid_argument("stft: signal of " + std::to_string(w.length()) +
                                    " samples is shorter than one frame");
    const std::size_t frames = frame_count(w.length(), cfg);
    Spectrogram s(frames, w.channels(), cfg, w.sample_rate(), w.length());
    const auto win = make_window(cfg.window, cfg.frame_len);
    RealFft fft(cfg.fft_size);
    std::vector<double> buf(cfg.frame_len);
    std::vector<cdouble> spec(cfg.bins());
    for (std::size_t c = 0; c < w.channels(); ++c) {
        const auto &x = w.channel(c);
        for (std::size_t t = 0; t < frames; ++t) {
            const std::size_t start = t * cfg.hop;
            for (std::size_t n = 0; n < cfg.frame_len; ++n)
                buf[n] = start + n < x.size() ? x[start + n] * win[n] : 0.0;
            fft.forward(buf, spec);
            for (std::size_t f = 0; f < cfg.bins(); ++f) s(t, f, c) = spec[f];
        }
    }
    return s;
}

Waveform istft(const Spectrogram &s) {
    const auto &cfg = s.config();
    validate(cfg);
    if (s.bins() != cfg.bins() || s.data().size() != s.frames() * s.bins() * s.channels())
        throw std::invalid_argument("istft: spectrogram dimensions do not match its configuration");
    if (s.channels() == 0 || s.frames() == 0) throw std::invalid_argument("istft: empty spectrogram");
    const std::size_t padded = (s.frames() - 1) * cfg.hop + cfg.frame_len;
    const std::size_t out_len = s.signal_length() > 0 ? std::min(s.signal_length(), padded) : padded;
    const auto win = make_window(cfg.window, cfg.frame_len);
    const double norm = 1.0 / cola_gain(cfg);

    Waveform out(s.channels(), out_len, s.sample_rate());
    RealFft fft(cfg.fft_size);
    std::vector<cdouble> spec(cfg.bins());
    std::vector<double> frame(cfg.fft_size);
    for (std::size_t c = 0; c < s.channels(); ++c) {
        auto &y = out.channel(c);
        for (std::size_t t = 0; t < s.frames(); ++t) {
            for (std::size_t f = 0; f < cfg.bins(); ++f) spec[f] = s(t, f, c);
            fft.inverse(spec, frame);
            const std::size_t start = t * cfg.hop;
            for (std::size_t n = 0; n < cfg.frame_len && start + n < out_len; ++n)
                y[start + n] += frame[n] * win[n] * norm;
        }
    }
    return out;
}

MagnitudePhase magnitude_phase(const Spectrogram &s) {
    MagnitudePhase mp;
    mp.magnitude.reserve(s.data().size());
    mp.phase.reserve(s.data().size());
    for (const auto &v : s.data()) {
        mp.magnitude.push_back(std::abs(v));
        mp.phase.push_back(v == cdouble{} ? 0.0 : std::arg(v));
    }
    return mp;
}

}  // namespace aecbench
