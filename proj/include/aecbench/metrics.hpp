// metrics.hpp
// ERLE over far-end single talk, SI-SDR over double talk, and level checks on
// synthesized scenes.

#pragma once

#include "aecbench/mixer.hpp"
#include "aecbench/signal.hpp"

#include <optional>
#include <vector>

namespace aecbench {

// Scores are clamped to +/- this value so perfect oracles stay finite.
inline constexpr double kScoreCapDb = 80.0;

struct ScoreReport {
    std::optional<double> erle_db;
    std::optional<double> si_sdr_db;
    std::optional<double> realized_ser_db;
    std::optional<double> realized_snr_db;
    std::vector<Segment> segments;
};

// 10 log10(sum y^2 / sum s_hat^2) over far-end single-talk samples; absent
// when that segment is empty or the mic is silent there.
std::optional<double> erle(const Waveform &mic, const Waveform &enhanced, const Timeline &tl);

// Scale-invariant SDR of `estimate` against `reference` over double-talk
// samples. Absent for an empty segment; throws std::invalid_argument for a
// zero reference.
std::optional<double> si_sdr(const Waveform &reference, const Waveform &estimate, const Timeline &tl);

// Same, over an explicit label.
std::optional<double> si_sdr(const Waveform &reference, const Waveform &estimate, const Timeline &tl,
                             SegmentLabel label);

// Realized SER and SNR at the scene's reference microphone over double talk.
ScoreReport verify_scene(const Scene &scene);

}  // namespace aecbench
