// metrics.cpp

#include "aecbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aecbench {

namespace {

double clamp_db(double v) {
    if (std::isnan(v)) return -kScoreCapDb;
    return std::clamp(v, -kScoreCapDb, kScoreCapDb);
}

void check_pair(const Waveform &a, const Waveform &b, const char *what) {
    if (a.channels() != 1 || b.channels() != 1) throw std::invalid_argument(std::string(what) + ": mono inputs required");
    if (a.length() != b.length()) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

}  // namespace

std::optional<double> erle(const Waveform &mic, const Waveform &enhanced, const Timeline &tl) {
    check_pair(mic, enhanced, "erle");
    if (tl.count(SegmentLabel::kFarendSingleTalk) == 0) return std::nullopt;
    const double ey = segment_energy(mic, tl, SegmentLabel::kFarendSingleTalk);
    const double es = segment_energy(enhanced, tl, SegmentLabel::kFarendSingleTalk);
    if (!(ey > 0)) return std::nullopt;
    if (!(es > 0)) return kScoreCapDb;
    return clamp_db(10.0 * std::log10(ey / es));
}

std::optional<double> si_sdr(const Waveform &reference, const Waveform &estimate, const Timeline &tl,
                             SegmentLabel label) {
    check_pair(reference, estimate, "si_sdr");
    if (tl.count(label) == 0) return std::nullopt;
    double rr = 0.0, re = 0.0;
    for (const auto &seg : tl.find(label))
        for (std::size_t n = seg.start; n < seg.end; ++n) {
            rr += reference(0, n) * reference(0, n);
            re += reference(0, n) * estimate(0, n);
        }
    if (!(rr > 0)) throw std::invalid_argument("si_sdr: reference is zero over the segment");
    const double a = re / rr;
    double target = 0.0, residual = 0.0;
    for (const auto &seg : tl.find(label))
        for (std::size_t n = seg.start; n < seg.end; ++n) {
            const double t = a * reference(0, n);
            const double r = estimate(0, n) - t;
            target += t * t;
            residual += r * r;
        }
    if (!(target > 0)) return -kScoreCapDb;
    if (!(residual > 0)) return kScoreCapDb;
    return clamp_db(10.0 * std::log10(target / residual));
}

std::optional<double> si_sdr(const Waveform &reference, const Waveform &estimate, const Timeline &tl) {
    return si_sdr(reference, estimate, tl, SegmentLabel::kDoubleTalk);
}

ScoreReport verify_scene(const Scene &scene) {
    if (scene.echoes.empty() || scene.nearend.empty() || scene.noise.empty() || scene.mic.empty())
        throw std::invalid_argument("verify_scene: scene is missing components");
    const std::size_t ref = scene.options.reference_mic;
    const auto &tl = scene.timeline;
    ScoreReport r;
    r.segments = tl.segments;
    const double es = segment_energy(scene.nearend.select(ref), tl, SegmentLabel::kDoubleTalk);
    const double ed = segment_energy(scene.total_echo().select(ref), tl, SegmentLabel::kDoubleTalk);
    const double ev = segment_energy(scene.noise.select(ref), tl, SegmentLabel::kDoubleTalk);
    if (es > 0 && ed > 0) r.realized_ser_db = 10.0 * std::log10(es / ed);
    if (es > 0 && ev > 0) r.realized_snr_db = 10.0 * std::log10(es / ev);
    return r;
}

}  // namespace aecbench
