// wav.hpp
// RIFF/WAVE reader and writer: 16-bit PCM and 32-bit IEEE float, interleaved.

#pragma once

#include "aecbench/signal.hpp"

#include <filesystem>
#include <stdexcept>

namespace aecbench {

struct WavError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class WavFormat { kPcm16, kFloat32 };

// PCM samples are scaled to [-1, 1); float samples are read as-is.
Waveform read_wav(const std::filesystem::path &path);

// PCM output is clipped to [-1, 1] before quantization.
void write_wav(const std::filesystem::path &path, const Waveform &w, WavFormat format = WavFormat::kFloat32);

}  // namespace aecbench
