#include "aecbench/fft.hpp"
#include "aecbench/signal.hpp"
#include "aecbench/wav.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace aecbench;

namespace {

Waveform noise_wave(std::uint64_t seed, std::size_t n, std::size_t channels = 1) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> ch;
    for (std::size_t c = 0; c < channels; ++c) ch.push_back(oracle::white(rng, n));
    return Waveform(std::move(ch), 16000);
}

double interior_rel_error(const Waveform &a, const Waveform &b, std::size_t margin) {
    double num = 0, den = 0;
    for (std::size_t c = 0; c < a.channels(); ++c)
        for (std::size_t n = margin; n + margin < a.length(); ++n) {
            const double d = a(c, n) - b(c, n);
            num += d * d;
            den += a(c, n) * a(c, n);
        }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("fft forward and inverse agree with the direct DFT") {
    std::mt19937_64 rng(3);
    for (std::size_t n : {8u, 45u, 320u, 512u}) {
        const auto x = oracle::white(rng, n);
        RealFft fft(n);
        std::vector<cdouble> X(fft.bins());
        fft.forward(x, X);
        const auto ref = oracle::dft(x, n);
        for (std::size_t k = 0; k < X.size(); ++k) CHECK(std::abs(X[k] - ref[k]) < 1e-9);
        std::vector<double> back(n);
        fft.inverse(X, back);
        for (std::size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }
    CHECK(next_fast_size(1) == 1);
    CHECK(next_fast_size(7) == 8);
    CHECK(next_fast_size(1025) == 1080);
}

TEST_CASE("default configuration gives 161 bins and a constant overlap-add") {
    const StftConfig cfg;
    CHECK(cfg.bins() == 161);
    CHECK_NOTHROW(validate(cfg));
    const auto w = make_window(cfg.window, cfg.frame_len);
    for (std::size_t n = 0; n < cfg.hop; ++n)
        CHECK(std::abs(w[n] * w[n] + w[n + cfg.hop] * w[n + cfg.hop] - cola_gain(cfg)) < 1e-10);

    const auto s = stft(noise_wave(1, 16000));
    CHECK(s.bins() == 161);
    CHECK(s.frames() == frame_count(16000, cfg));
    CHECK(frame_count(16000, cfg) == 99);
    CHECK(frame_count(16001, cfg) == 100);

    StftConfig bad;
    bad.hop = 100;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = StftConfig{};
    bad.fft_size = 256;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("silence in, silence out") {
    const Waveform z(2, 16000, 16000);
    const auto s = stft(z);
    for (const auto &v : s.data()) CHECK(v == cdouble(0.0, 0.0));
    const auto back = istft(s);
    CHECK(back == z);
}

TEST_CASE("bin-centred sinusoid matches a per-frame DFT oracle") {
    StftConfig cfg;
    cfg.window = WindowType::kRectangular;
    const std::size_t k = 17;
    const std::size_t len = 4000;
    std::vector<double> x(len);
    for (std::size_t n = 0; n < len; ++n)
        x[n] = std::cos(2.0 * oracle::kPi * static_cast<double>(k) * static_cast<double>(n) / cfg.fft_size);
    const auto s = stft(Waveform::mono(x, 16000), cfg);
    double worst = 0.0;
    for (std::size_t t = 0; t < s.frames(); ++t) {
        std::vector<double> frame(cfg.frame_len, 0.0);
        for (std::size_t n = 0; n < cfg.frame_len; ++n)
            if (t * cfg.hop + n < len) frame[n] = x[t * cfg.hop + n];
        const auto ref = oracle::dft(frame, cfg.fft_size);
        for (std::size_t f = 0; f < s.bins(); ++f) worst = std::max(worst, std::abs(s(t, f, 0) - ref[f]));
    }
    CHECK(worst <= 1e-9);
    // full frames put all energy at bin k
    CHECK(std::abs(s(0, k, 0)) == doctest::Approx(160.0).epsilon(1e-9));
    CHECK(std::abs(s(0, k + 1, 0)) < 1e-9);
}

TEST_CASE("round trip restores noise and speech-shaped signals") {
    const auto x = noise_wave(7, 64000, 2);
    const auto y = istft(stft(x));
    REQUIRE(y.length() == x.length());
    CHECK(interior_rel_error(x, y, 320) <= 1e-8);

    // lowpassed noise
    auto w = noise_wave(8, 32000);
    auto &c = w.channel(0);
    double state = 0;
    for (auto &v : c) v = state = 0.95 * state + 0.05 * v;
    const auto back = istft(stft(w));
    double ein = 0, eout = 0;
    for (std::size_t n = 320; n + 320 < c.size(); ++n) {
        ein += c[n] * c[n];
        eout += back(0, n) * back(0, n);
    }
    CHECK(eout / ein >= 0.999);
    CHECK(eout / ein <= 1.001);
}

TEST_CASE("Parseval: spectral energy is fft_size times windowed energy") {
    const StftConfig cfg;
    const auto x = noise_wave(11, 8000);
    const auto s = stft(x);
    const auto win = make_window(cfg.window, cfg.frame_len);
    double time_e = 0, spec_e = 0;
    for (std::size_t t = 0; t < s.frames(); ++t) {
        for (std::size_t n = 0; n < cfg.frame_len; ++n) {
            const std::size_t i = t * cfg.hop + n;
            const double v = i < x.length() ? x(0, i) * win[n] : 0.0;
            time_e += v * v;
        }
        for (std::size_t f = 0; f < s.bins(); ++f) {
            const double wgt = (f == 0 || f == s.bins() - 1) ? 1.0 : 2.0;
            spec_e += wgt * std::norm(s(t, f, 0));
        }
    }
    CHECK(std::abs(spec_e / (cfg.fft_size * time_e) - 1.0) <= 1e-6);
}

TEST_CASE("stft is linear") {
    const auto x = noise_wave(21, 6000);
    const auto y = noise_wave(22, 6000);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = u(rng), b = u(rng);
        const auto lhs = stft(x * a + y * b);
        const auto sx = stft(x), sy = stft(y);
        double worst = 0;
        for (std::size_t i = 0; i < lhs.data().size(); ++i)
            worst = std::max(worst, std::abs(lhs.data()[i] - (a * sx.data()[i] + b * sy.data()[i])));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("tail handling: zero-padded last frame and truncated output") {
    const auto x = noise_wave(31, 1000);
    const auto s = stft(x);
    CHECK(s.frames() == 6);  // 1 + ceil(680 / 160)
    CHECK(s.signal_length() == 1000);
    CHECK(istft(s).length() == 1000);
    CHECK_THROWS_AS(stft(noise_wave(1, 100)), std::invalid_argument);
}

TEST_CASE("magnitude and phase") {
    Spectrogram s(1, 1, StftConfig{}, 16000, 320);
    s(0, 0, 0) = {3, 4};
    s(0, 1, 0) = {0, 0};
    s(0, 2, 0) = {-1, 0};
    const auto mp = magnitude_phase(s);
    CHECK(mp.magnitude[0] == 5.0);
    CHECK(mp.magnitude[1] == 0.0);
    CHECK(mp.phase[1] == 0.0);
    CHECK(mp.phase[2] == doctest::Approx(oracle::kPi));

    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    Spectrogram r(10, 3, StftConfig{}, 16000, 0);
    for (auto &v : r.data()) v = {g(rng), g(rng)};
    const auto m = magnitude_phase(r);
    for (std::size_t i = 0; i < r.data().size(); ++i)
        CHECK(std::abs(std::polar(m.magnitude[i], m.phase[i]) - r.data()[i]) <= 1e-12);
}

TEST_CASE("wav round trip in both sample formats") {
    const auto dir = std::filesystem::temp_directory_path() / "aecbench_wav_test";
    std::filesystem::create_directories(dir);
    auto x = noise_wave(41, 500, 3);
    x *= 0.2;
    // float32 is exact after one rounding
    write_wav(dir / "f.wav", x);
    const auto f = read_wav(dir / "f.wav");
    CHECK(f.channels() == 3);
    CHECK(f.sample_rate() == 16000);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t n = 0; n < 500; ++n) CHECK(f(c, n) == static_cast<double>(static_cast<float>(x(c, n))));
    write_wav(dir / "p.wav", x, WavFormat::kPcm16);
    const auto p = read_wav(dir / "p.wav");
    for (std::size_t n = 0; n < 500; ++n) CHECK(std::abs(p(1, n) - x(1, n)) <= 1.0 / 32768);

    std::ofstream(dir / "junk.wav") << "not a wave file";
    CHECK_THROWS_AS(read_wav(dir / "junk.wav"), WavError);
    std::filesystem::remove_all(dir);
}
