// wav.cpp

#include "aecbench/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace aecbench {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T get(const std::vector<char> &buf, std::size_t pos) {
    if (pos + sizeof(T) > buf.size()) throw WavError("wav: truncated header");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    return v;
}

template <typename T>
void put(std::ostream &os, T v) {
    os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

}  // namespace

Waveform read_wav(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WavError("wav: cannot open " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw WavError("wav: not a RIFF/WAVE file: " + path.string());

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t data_pos = 0, data_len = 0;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::uint32_t len = get<std::uint32_t>(buf, pos + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(buf.data() + pos, "fmt ", 4) == 0) {
            format = get<std::uint16_t>(buf, body);
            channels = get<std::uint16_t>(buf, body + 2);
            rate = get<std::uint32_t>(buf, body + 4);
            bits = get<std::uint16_t>(buf, body + 14);
            if (format == kFormatExtensible) format = get<std::uint16_t>(buf, body + 24);
            have_fmt = true;
        } else if (std::memcmp(buf.data() + pos, "data", 4) == 0) {
            data_pos = body;
            data_len = std::min<std::size_t>(len, buf.size() - body);
            break;
        }
        pos = body + len + (len & 1u);
    }
    if (!have_fmt || data_pos == 0) throw WavError("wav: missing fmt or data chunk: " + path.string());
    if (channels == 0 || rate == 0) throw WavError("wav: invalid channel count or sample rate");
    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool f32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !f32) throw WavError("wav: unsupported sample format (need 16-bit PCM or 32-bit float)");

    const std::size_t width = bits / 8;
    const std::size_t frames = data_len / (width * channels);
    Waveform w(channels, frames, static_cast<int>(rate));
    const char *p = buf.data() + data_pos;
    for (std::size_t n = 0; n < frames; ++n)
        for (std::size_t c = 0; c < channels; ++c, p += width) {
            if (pcm16) {
                std::int16_t v;
                std::memcpy(&v, p, 2);
                w(c, n) = v / 32768.0;
            } else {
                float v;
                std::memcpy(&v, p, 4);
                w(c, n) = v;
            }
        }
    return w;
}

void write_wav(const std::filesystem::path &path, const Waveform &w, WavFormat format) {
    if (w.channels() == 0) throw WavError("wav: nothing to write");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw WavError("wav: cannot create " + path.string());
    const std::uint16_t channels = static_cast<std::uint16_t>(w.channels());
    const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
    const std::uint32_t rate = static_cast<std::uint32_t>(w.sample_rate());
    const std::uint32_t block = channels * bits / 8;
    const std::uint32_t data_len = static_cast<std::uint32_t>(w.length() * block);

    out.write("RIFF", 4);
    put<std::uint32_t>(out, 36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put<std::uint32_t>(out, 16);
    put<std::uint16_t>(out, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
    put<std::uint16_t>(out, channels);
    put<std::uint32_t>(out, rate);
    put<std::uint32_t>(out, rate * block);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(block));
    put<std::uint16_t>(out, bits);
    out.write("data", 4);
    put<std::uint32_t>(out, data_len);
    for (std::size_t n = 0; n < w.length(); ++n)
        for (std::size_t c = 0; c < w.channels(); ++c) {
            if (format == WavFormat::kPcm16) {
                const double v = std::clamp(w(c, n), -1.0, 1.0);
                put<std::int16_t>(out, static_cast<std::int16_t>(std::lround(std::min(v * 32768.0, 32767.0))));
            } else {
                put<float>(out, static_cast<float>(w(c, n)));
            }
        }
    if (!out) throw WavError("wav: write failed: " + path.string());
}

}  // namespace aecbench
