// mixer.hpp
// Loudspeaker nonlinearity, level calibration over double-talk, diffuse noise
// and assembly of complete echo cancellation scenes.

#pragma once

#include "aecbench/roomsim.hpp"
#include "aecbench/signal.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace aecbench {

// Scaled error function f(x) = int_0^x exp(-z^2 / (2 eta^2)) dz. eta2 = +inf is
// the linear loudspeaker.
struct SefConfig {
    double eta2 = std::numeric_limits<double>::infinity();

    bool linear() const { return std::isinf(eta2); }
    static SefConfig linear_config() { return {}; }
};

void validate(const SefConfig &cfg);
double sef(double x, const SefConfig &cfg);
Waveform sef_apply(const Waveform &x, const SefConfig &cfg);

enum class SegmentLabel { kFarendSingleTalk, kDoubleTalk, kNearendSingleTalk };

std::string to_string(SegmentLabel label);
SegmentLabel segment_label_from_string(const std::string &s);

// Half-open sample range [start, end).
struct Segment {
    SegmentLabel label;
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - start; }
    friend bool operator==(const Segment &, const Segment &) = default;
};

struct Timeline {
    std::vector<Segment> segments;

    // All samples carrying `label`, in order.
    std::vector<Segment> find(SegmentLabel label) const;
    std::size_t count(SegmentLabel label) const;
    friend bool operator==(const Timeline &, const Timeline &) = default;
};

// Leading far-end single talk over `single_talk_fraction` of the signal, double
// talk for the rest.
Timeline default_timeline(std::size_t length, double single_talk_fraction = 0.4);

// Sum of squares over every channel of `w`, restricted to `label` samples.
double segment_energy(const Waveform &w, const Timeline &tl, SegmentLabel label);

// Gain g such that 10 log10(E_s / (g^2 E_d)) equals the target over double-talk.
// Throws std::invalid_argument on an empty segment or zero energy.
double scale_echo_to_ser(const Waveform &s, const Waveform &d, const Timeline &tl, double target_ser_db);
double scale_noise_to_snr(const Waveform &s, const Waveform &v, const Timeline &tl, double target_snr_db);

struct DiffuseNoiseOptions {
    std::size_t sources = 36;
    // Ring radius around the array centre; clamped to fit the room.
    double radius = 2.0;
    RirOptions rir;
};

// Spatially diffuse noise: independent white noise point sources on a
// horizontal ring around the microphones, each filtered by its image-method
// response to every microphone. One microphone gets plain white noise.
Waveform diffuse_noise(const ArrayGeometry &geometry, const RoomSpec &room, std::size_t length, int sample_rate,
                       std::mt19937_64 &rng, const DiffuseNoiseOptions &opts = {});

struct VoiceOptions {
    double f0_low = 100.0;
    double f0_high = 150.0;
    double unvoiced_probability = 0.2;
    double rms = 0.1;
};

// Speech-like test signal: syllable-rate amplitude modulation of a glottal
// pulse train (or noise for unvoiced syllables) filtered by three formant
// resonators, separated by short pauses.
std::vector<double> synth_speech(std::size_t length, int sample_rate, std::mt19937_64 &rng,
                                 const VoiceOptions &voice = {});

// Half-wave rectifier decorrelation x + alpha (x + |x|) / 2, per channel.
Waveform half_wave_preprocess(const Waveform &x, double alpha);

enum class Setup { kSingle, kMcaec, kMmaec };

std::string to_string(Setup s);
Setup setup_from_string(const std::string &s);

enum class NoiseKind { kDiffuse, kWhite, kNone };

struct SceneOptions {
    Setup setup = Setup::kMmaec;
    double ser_db = 3.5;
    // Absent when no noise is added.
    std::optional<double> snr_db = 10.0;
    SefConfig sef;
    NoiseKind noise = NoiseKind::kDiffuse;
    double single_talk_fraction = 0.4;
    // Half-wave decorrelation applied to the loudspeaker feeds before the
    // nonlinearity; 0 disables it.
    double feed_alpha = 0.0;
    // Reference microphone for level calibration.
    std::size_t reference_mic = 0;
    std::uint64_t seed = 0;
    RirOptions rir;
    DiffuseNoiseOptions diffuse;
};

// A synthesized experiment instance. Every component is stored at float32
// precision so that WAV export reproduces it exactly, and `mic` is the double
// sum echoes + nearend + noise in that order.
struct Scene {
    SceneOptions options;
    RoomSpec room{5, 6, 3, 0.35};
    ArrayGeometry geometry;
    Timeline timeline;
    Waveform farend;                // L channels, before preprocessing and nonlinearity
    std::vector<Waveform> echoes;   // one M-channel waveform per loudspeaker
    Waveform nearend;               // M channels, reverberant at each mic
    Waveform noise;                 // M channels
    Waveform mic;                   // M channels
    std::vector<Rir> rirs;          // loudspeaker paths, then near-end paths

    std::size_t num_mics() const { return mic.channels(); }
    std::size_t num_loudspeakers() const { return farend.channels(); }
    int sample_rate() const { return mic.sample_rate(); }
    // Sum of all echo paths at every mic.
    Waveform total_echo() const;
    // Echo plus noise at every mic.
    Waveform interference() const;
};

// Builds a scene. `farend` carries one channel per loudspeaker and `nearend_dry`
// one channel; both must have the same length, and the near-end signal is
// silenced over the far-end single-talk region.
Scene make_scene(const SceneOptions &opts, const RoomSpec &room, const ArrayGeometry &geometry,
                 const Waveform &farend, const Waveform &nearend_dry);

// Rebuilds mic from its components and compares bit-for-bit.
bool check_decomposition(const Scene &scene);

// Directory of float32 WAVs (mic, farend, nearend, noise, echo_<i>) plus
// manifest.json.
void save_scene(const Scene &scene, const std::filesystem::path &dir);
Scene load_scene(const std::filesystem::path &dir);

}  // namespace aecbench
