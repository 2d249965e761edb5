// masking.cpp

#include "aecbench/masking.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace aecbench {

static_assert(std::endian::native == std::endian::little, "mask file I/O assumes a little-endian host");

MaskSet MaskSet::zeros_like(const Spectrogram &s, MaskKind kind) {
    MaskSet m;
    m.kind = kind;
    m.frames = static_cast<std::uint32_t>(s.frames());
    m.bins = static_cast<std::uint32_t>(s.bins());
    m.channels = static_cast<std::uint32_t>(s.channels());
    m.values.assign(m.cells() * (kind == MaskKind::kComplexSpectrum ? 2 : 1), 0.0f);
    return m;
}

MaskSet MaskSet::from_spectrogram(const Spectrogram &s, MaskSource source) {
    MaskSet m = zeros_like(s, MaskKind::kComplexSpectrum);
    m.source = source;
    for (std::size_t i = 0; i < s.data().size(); ++i) {
        m.values[2 * i] = static_cast<float>(s.data()[i].real());
        m.values[2 * i + 1] = static_cast<float>(s.data()[i].imag());
    }
    return m;
}

MaskSet oracle_smm(const Spectrogram &S, const Spectrogram &Y) {
    if (!S.same_shape(Y)) throw std::invalid_argument("oracle_smm: spectrogram shapes differ");
    MaskSet m = MaskSet::zeros_like(Y, MaskKind::kMagnitudeMask);
    for (std::size_t i = 0; i < Y.data().size(); ++i) {
        const double y = std::abs(Y.data()[i]);
        m.values[i] = y > 0.0 ? static_cast<float>(std::min(1.0, std::abs(S.data()[i]) / y)) : 0.0f;
    }
    return m;
}

MaskSet oracle_complex(const Spectrogram &S) { return MaskSet::from_spectrogram(S); }

Spectrogram apply_mask(const Spectrogram &Y, const MaskSet &m) {
    if (!m.matches(Y))
        throw std::invalid_argument("apply_mask: mask is " + std::to_string(m.frames) + "x" + std::to_string(m.bins) +
                                    "x" + std::to_string(m.channels) + ", spectrogram is " +
                                    std::to_string(Y.frames()) + "x" + std::to_string(Y.bins()) + "x" +
                                    std::to_string(Y.channels()));
    const std::size_t width = m.kind == MaskKind::kComplexSpectrum ? 2 : 1;
    if (m.values.size() != m.cells() * width) throw std::invalid_argument("apply_mask: payload size mismatch");
    Spectrogram out = Y;
    auto &d = out.data();
    if (m.kind == MaskKind::kMagnitudeMask) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= static_cast<double>(m.values[i]);
    } else {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = {m.values[2 * i], m.values[2 * i + 1]};
    }
    return out;
}

namespace {

constexpr char kMagic[4] = {'M', 'S', 'K', '1'};
constexpr std::size_t kHeaderSize = 4 + 2 + 2 + 4 + 4 + 4;

template <typename T>
void put(std::ostream &os, T v) {
    os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
T get(const char *p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

}  // namespace

void save_masks(const MaskSet &m, const std::filesystem::path &path) {
    const std::size_t width = m.kind == MaskKind::kComplexSpectrum ? 2 : 1;
    if (m.values.size() != m.cells() * width) throw std::invalid_argument("save_masks: payload size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MaskFileError("save_masks: cannot create " + path.string());
    out.write(kMagic, 4);
    put<std::uint16_t>(out, kMaskFileVersion);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(m.kind));
    put<std::uint32_t>(out, m.frames);
    put<std::uint32_t>(out, m.bins);
    put<std::uint32_t>(out, m.channels);
    out.write(reinterpret_cast<const char *>(m.values.data()),
              static_cast<std::streamsize>(m.values.size() * sizeof(float)));
    if (!out) throw MaskFileError("save_masks: write failed for " + path.string());
}

MaskSet load_masks(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MaskFileError("load_masks: cannot open " + path.string());
    char header[kHeaderSize];
    in.read(header, kHeaderSize);
    if (in.gcount() >= 4 && std::memcmp(header, kMagic, 4) != 0)
        throw MaskFormatError("load_masks: bad magic in " + path.string());
    if (in.gcount() != static_cast<std::streamsize>(kHeaderSize))
        throw MaskTruncatedError("load_masks: truncated header in " + path.string());
    const auto version = get<std::uint16_t>(header + 4);
    if (version != kMaskFileVersion)
        throw MaskFormatError("load_masks: unsupported version " + std::to_string(version));
    const auto kind = get<std::uint16_t>(header + 6);
    if (kind > 1) throw MaskFormatError("load_masks: unknown kind " + std::to_string(kind));

    MaskSet m;
    m.kind = static_cast<MaskKind>(kind);
    m.source = MaskSource::kFile;
    m.frames = get<std::uint32_t>(header + 8);
    m.bins = get<std::uint32_t>(header + 12);
    m.channels = get<std::uint32_t>(header + 16);
    const std::uint64_t width = m.kind == MaskKind::kComplexSpectrum ? 2 : 1;
    // Each factor < 2^32, so check the product stepwise against the cap.
    std::uint64_t floats = width;
    for (std::uint64_t dim : {std::uint64_t{m.frames}, std::uint64_t{m.bins}, std::uint64_t{m.channels}}) {
        if (dim != 0 && floats > kMaxMaskFloats / dim)
            throw MaskDimensionError("load_masks: dimensions overflow the payload limit");
        floats *= dim;
    }
    m.values.resize(floats);
    in.read(reinterpret_cast<char *>(m.values.data()), static_cast<std::streamsize>(floats * sizeof(float)));
    if (static_cast<std::uint64_t>(in.gcount()) != floats * sizeof(float))
        throw MaskTruncatedError("load_masks: payload truncated in " + path.string());
    if (m.kind == MaskKind::kMagnitudeMask)
        for (auto &v : m.values) v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
    return m;
}

}  // namespace aecbench
