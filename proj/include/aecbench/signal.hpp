// signal.hpp
// Waveforms, STFT analysis/synthesis and spectral views.

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace aecbench {

using cdouble = std::complex<double>;

// Time-domain multichannel buffer. Channels are stored separately and all
// have the same length.
class Waveform {
public:
    Waveform() = default;
    Waveform(std::size_t channels, std::size_t length, int sample_rate);
    Waveform(std::vector<std::vector<double>> samples, int sample_rate);

    static Waveform mono(std::vector<double> samples, int sample_rate);

    std::size_t channels() const { return samples_.size(); }
    std::size_t length() const { return samples_.empty() ? 0 : samples_[0].size(); }
    int sample_rate() const { return sample_rate_; }
    bool empty() const { return length() == 0; }

    const std::vector<double> &channel(std::size_t c) const { return samples_.at(c); }
    std::vector<double> &channel(std::size_t c) { return samples_.at(c); }
    double operator()(std::size_t c, std::size_t n) const { return samples_[c][n]; }
    double &operator()(std::size_t c, std::size_t n) { return samples_[c][n]; }

    // New single-channel waveform holding channel c.
    Waveform select(std::size_t c) const;

    Waveform &operator+=(const Waveform &other);
    Waveform &operator*=(double gain);

    friend bool operator==(const Waveform &, const Waveform &) = default;

private:
    std::vector<std::vector<double>> samples_;
    int sample_rate_ = 0;
};

Waveform operator+(Waveform a, const Waveform &b);
Waveform operator*(Waveform a, double gain);

enum class WindowType { kSqrtHann, kRectangular };

// Frame/hop/FFT sizes plus the window used for both analysis and synthesis.
struct StftConfig {
    std::size_t frame_len = 320;
    std::size_t hop = 160;
    std::size_t fft_size = 320;
    WindowType window = WindowType::kSqrtHann;

    std::size_t bins() const { return fft_size / 2 + 1; }

    friend bool operator==(const StftConfig &, const StftConfig &) = default;
};

// 20 ms frames, 10 ms hop, 320-point transform at 16 kHz.
inline StftConfig default_stft_config() { return StftConfig{}; }

std::vector<double> make_window(WindowType type, std::size_t len);

// Throws std::invalid_argument unless hop <= frame_len <= fft_size and the
// analysis*synthesis window product overlap-adds to a constant.
void validate(const StftConfig &cfg);

// Interior value of sum_k w(n - k*hop)^2; the overlap-add normalizer.
double cola_gain(const StftConfig &cfg);

// Complex STFT tensor indexed (frame, bin, channel), stored row-major in that
// order. `signal_length` records the source waveform length so that istft can
// truncate the zero-padded tail.
class Spectrogram {
public:
    Spectrogram() = default;
    Spectrogram(std::size_t frames, std::size_t channels, StftConfig cfg, int sample_rate,
                std::size_t signal_length);

    std::size_t frames() const { return frames_; }
    std::size_t bins() const { return bins_; }
    std::size_t channels() const { return channels_; }
    const StftConfig &config() const { return cfg_; }
    int sample_rate() const { return sample_rate_; }
    std::size_t signal_length() const { return signal_length_; }

    std::size_t index(std::size_t t, std::size_t f, std::size_t c) const {
        return (t * bins_ + f) * channels_ + c;
    }
    cdouble operator()(std::size_t t, std::size_t f, std::size_t c) const { return data_[index(t, f, c)]; }
    cdouble &operator()(std::size_t t, std::size_t f, std::size_t c) { return data_[index(t, f, c)]; }

    const std::vector<cdouble> &data() const { return data_; }
    std::vector<cdouble> &data() { return data_; }

    // Same layout, no data.
    Spectrogram zeros_like(std::size_t channels) const;
    Spectrogram select(std::size_t c) const;
    bool same_shape(const Spectrogram &other) const;

private:
    std::size_t frames_ = 0;
    std::size_t bins_ = 0;
    std::size_t channels_ = 0;
    StftConfig cfg_;
    int sample_rate_ = 0;
    std::size_t signal_length_ = 0;
    std::vector<cdouble> data_;
};

// Number of frames for a signal of `length` samples: the last partial frame is
// zero-padded, i.e. 1 + ceil((length - frame_len) / hop).
std::size_t frame_count(std::size_t length, const StftConfig &cfg);

Spectrogram stft(const Waveform &w, const StftConfig &cfg = default_stft_config());
Waveform istft(const Spectrogram &s);

struct MagnitudePhase {
    std::vector<double> magnitude;
    std::vector<double> phase;
};

// Elementwise modulus and argument in the Spectrogram's storage order; the
// phase of an exactly zero cell is 0.
MagnitudePhase magnitude_phase(const Spectrogram &s);

}  // namespace aecbench
