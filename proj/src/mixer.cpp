// mixer.cpp

#include "aecbench/mixer.hpp"

#include "aecbench/wav.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace aecbench {

void validate(const SefConfig &cfg) {
    if (!(cfg.eta2 > 0)) throw std::invalid_argument("SefConfig: eta2 must be positive or infinite");
}

double sef(double x, const SefConfig &cfg) {
    if (cfg.linear()) return x;
    const double eta = std::sqrt(cfg.eta2);
    return eta * std::sqrt(std::numbers::pi / 2.0) * std::erf(x / (eta * std::numbers::sqrt2));
}

Waveform sef_apply(const Waveform &x, const SefConfig &cfg) {
    validate(cfg);
    if (cfg.linear()) return x;
    Waveform y = x;
    for (std::size_t c = 0; c < y.channels(); ++c)
        for (auto &v : y.channel(c)) v = sef(v, cfg);
    return y;
}

std::string to_string(SegmentLabel label) {
    switch (label) {
        case SegmentLabel::kFarendSingleTalk: return "farend_single_talk";
        case SegmentLabel::kDoubleTalk: return "double_talk";
        case SegmentLabel::kNearendSingleTalk: return "nearend_single_talk";
    }
    return "?";
}

SegmentLabel segment_label_from_string(const std::string &s) {
    for (auto l : {SegmentLabel::kFarendSingleTalk, SegmentLabel::kDoubleTalk, SegmentLabel::kNearendSingleTalk})
        if (to_string(l) == s) return l;
    throw std::invalid_argument("unknown segment label: " + s);
}

std::vector<Segment> Timeline::find(SegmentLabel label) const {
    std::vector<Segment> out;
    for (const auto &s : segments)
        if (s.label == label) out.push_back(s);
    return out;
}

std::size_t Timeline::count(SegmentLabel label) const {
    std::size_t n = 0;
    for (const auto &s : find(label)) n += s.size();
    return n;
}

Timeline default_timeline(std::size_t length, double single_talk_fraction) {
    if (single_talk_fraction < 0 || single_talk_fraction > 1)
        throw std::invalid_argument("default_timeline: fraction must be in [0, 1]");
    const auto split = static_cast<std::size_t>(std::llround(single_talk_fraction * static_cast<double>(length)));
    Timeline tl;
    if (split > 0) tl.segments.push_back({SegmentLabel::kFarendSingleTalk, 0, split});
    if (split < length) tl.segments.push_back({SegmentLabel::kDoubleTalk, split, length});
    return tl;
}

double segment_energy(const Waveform &w, const Timeline &tl, SegmentLabel label) {
    double e = 0.0;
    for (const auto &seg : tl.find(label)) {
        if (seg.end > w.length()) throw std::invalid_argument("segment_energy: segment exceeds signal length");
        for (std::size_t c = 0; c < w.channels(); ++c)
            for (std::size_t n = seg.start; n < seg.end; ++n) e += w(c, n) * w(c, n);
    }
    return e;
}

namespace {

double ratio_gain(const Waveform &s, const Waveform &other, const Timeline &tl, double target_db, const char *what) {
    if (tl.count(SegmentLabel::kDoubleTalk) == 0)
        throw std::invalid_argument(std::string(what) + ": double-talk segment is empty");
    const double es = segment_energy(s, tl, SegmentLabel::kDoubleTalk);
    const double eo = segment_energy(other, tl, SegmentLabel::kDoubleTalk);
    if (!(es > 0) || !(eo > 0)) throw std::invalid_argument(std::string(what) + ": zero energy over double-talk");
    // target = 10 log10(es / (g^2 eo))
    return std::sqrt(es / eo * std::pow(10.0, -target_db / 10.0));
}

}  // namespace

double scale_echo_to_ser(const Waveform &s, const Waveform &d, const Timeline &tl, double target_ser_db) {
    return ratio_gain(s, d, tl, target_ser_db, "scale_echo_to_ser");
}

double scale_noise_to_snr(const Waveform &s, const Waveform &v, const Timeline &tl, double target_snr_db) {
    return ratio_gain(s, v, tl, target_snr_db, "scale_noise_to_snr");
}

Waveform diffuse_noise(const ArrayGeometry &geometry, const RoomSpec &room, std::size_t length, int sample_rate,
                       std::mt19937_64 &rng, const DiffuseNoiseOptions &opts) {
    if (geometry.mics.empty()) throw std::invalid_argument("diffuse_noise: no microphones");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t m_count = geometry.mics.size();
    Waveform out(m_count, length, sample_rate);
    if (m_count == 1) {
        for (auto &v : out.channel(0)) v = gauss(rng);
        return out;
    }
    const Point3 centre = geometry.mic_center();
    const double room_margin = std::min({centre.x, room.width() - centre.x, centre.y, room.length() - centre.y});
    const double radius = std::min(opts.radius, 0.9 * room_margin);
    RirOptions rir_opts = opts.rir;
    rir_opts.sample_rate = sample_rate;
    std::vector<double> src(length);
    for (std::size_t k = 0; k < opts.sources; ++k) {
        const double az = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(opts.sources);
        const Point3 pos{centre.x + radius * std::cos(az), centre.y + radius * std::sin(az), centre.z};
        for (auto &v : src) v = gauss(rng);
        for (std::size_t m = 0; m < m_count; ++m) {
            const Rir rir = image_rir(room, pos, geometry.mics[m], rir_opts);
            const auto y = convolve(src, rir.taps);
            auto &ch = out.channel(m);
            for (std::size_t n = 0; n < length; ++n) ch[n] += y[n];
        }
    }
    out *= 1.0 / std::sqrt(static_cast<double>(opts.sources));
    return out;
}

namespace {

// Two-pole resonator with unit gain at its centre frequency (approximately).
struct Resonator {
    double a1 = 0, a2 = 0, g = 1, y1 = 0, y2 = 0;

    void tune(double freq, double bandwidth, double fs) {
        const double r = std::exp(-std::numbers::pi * bandwidth / fs);
        a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
        a2 = -r * r;
        g = 1.0 - r;
    }
    double step(double x) {
        const double y = g * x + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        return y;
    }
};

}  // namespace

std::vector<double> synth_speech(std::size_t length, int sample_rate, std::mt19937_64 &rng, const VoiceOptions &voice) {
    const double fs = sample_rate;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };

    std::vector<double> out(length, 0.0);
    std::array<Resonator, 3> formants;
    double glottal = 0.0, phase = 0.0;
    std::size_t pos = static_cast<std::size_t>(between(0.0, 0.1) * fs);
    while (pos < length) {
        const auto syllable = static_cast<std::size_t>(between(0.12, 0.30) * fs);
        const bool voiced = uni(rng) >= voice.unvoiced_probability;
        const double f0_start = between(voice.f0_low, voice.f0_high);
        const double f0_end = f0_start * between(0.85, 1.15);
        formants[0].tune(between(300, 800), 80, fs);
        formants[1].tune(between(900, 2300), 120, fs);
        formants[2].tune(between(2400, 3400), 160, fs);
        // stressed and unstressed syllables differ by up to 15 dB
        const double level = std::pow(10.0, -between(0.0, 15.0) / 20.0);
        for (std::size_t i = 0; i < syllable && pos + i < length; ++i) {
            const double frac = static_cast<double>(i) / syllable;
            double excitation;
            if (voiced) {
                phase += (f0_start + (f0_end - f0_start) * frac) / fs;
                double pulse = 0.0;
                if (phase >= 1.0) {
                    phase -= 1.0;
                    pulse = 1.0;
                }
                // One-pole glottal roll-off plus a little aspiration.
                glottal = 0.9 * glottal + pulse;
                excitation = glottal + 0.02 * gauss(rng);
            } else {
                excitation = 0.3 * gauss(rng);
            }
            double y = excitation;
            if (voiced) {
                y = formants[0].step(y) + 0.6 * formants[1].step(y) + 0.3 * formants[2].step(y);
            } else {
                y = formants[2].step(y) + 0.5 * formants[1].step(y);
            }
            // fast onset, slower decay, peaking a quarter of the way in
            double env = level * (frac < 0.25 ? std::sin(2 * std::numbers::pi * frac)
                                              : std::cos(std::numbers::pi * (frac - 0.25) / 1.5));
            out[pos + i] = env * y;
        }
        pos += syllable;
        const double pause = uni(rng) < 0.15 ? between(0.2, 0.4) : between(0.03, 0.12);
        pos += static_cast<std::size_t>(pause * fs);
    }
    double energy = 0.0;
    for (double v : out) energy += v * v;
    if (energy > 0) {
        const double g = voice.rms / std::sqrt(energy / static_cast<double>(length));
        for (auto &v : out) v *= g;
    }
    return out;
}

Waveform half_wave_preprocess(const Waveform &x, double alpha) {
    Waveform y = x;
    if (alpha == 0.0) return y;
    for (std::size_t c = 0; c < y.channels(); ++c)
        for (auto &v : y.channel(c)) v = v + alpha * (v + std::abs(v)) / 2.0;
    return y;
}

std::string to_string(Setup s) {
    switch (s) {
        case Setup::kSingle: return "single";
        case Setup::kMcaec: return "mcaec";
        case Setup::kMmaec: return "mmaec";
    }
    return "?";
}

Setup setup_from_string(const std::string &s) {
    for (auto v : {Setup::kSingle, Setup::kMcaec, Setup::kMmaec})
        if (to_string(v) == s) return v;
    throw std::invalid_argument("unknown setup: " + s);
}

Waveform Scene::total_echo() const {
    if (echoes.empty()) throw std::logic_error("Scene::total_echo: no echo paths");
    Waveform d(echoes[0].channels(), echoes[0].length(), echoes[0].sample_rate());
    for (const auto &e : echoes) d += e;
    return d;
}

Waveform Scene::interference() const { return total_echo() + noise; }

namespace {

void quantize(Waveform &w) {
    for (std::size_t c = 0; c < w.channels(); ++c)
        for (auto &v : w.channel(c)) v = static_cast<double>(static_cast<float>(v));
}

Waveform assemble_mic(const std::vector<Waveform> &echoes, const Waveform &nearend, const Waveform &noise) {
    Waveform mic(nearend.channels(), nearend.length(), nearend.sample_rate());
    for (std::size_t c = 0; c < mic.channels(); ++c)
        for (std::size_t n = 0; n < mic.length(); ++n) {
            double v = 0.0;
            for (const auto &e : echoes) v += e(c, n);
            v += nearend(c, n);
            v += noise(c, n);
            mic(c, n) = v;
        }
    return mic;
}

void check_setup(Setup setup, std::size_t loudspeakers, std::size_t mics) {
    const bool ok = (setup == Setup::kSingle && loudspeakers == 1 && mics == 1) ||
                    (setup == Setup::kMcaec && loudspeakers == 2 && mics == 2) ||
                    (setup == Setup::kMmaec && loudspeakers == 1 && mics >= 2);
    if (!ok)
        throw std::invalid_argument("make_scene: " + to_string(setup) + " setup cannot use " +
                                    std::to_string(loudspeakers) + " loudspeaker(s) and " + std::to_string(mics) +
                                    " microphone(s)");
}

}  // namespace

Scene make_scene(const SceneOptions &opts, const RoomSpec &room, const ArrayGeometry &geometry, const Waveform &farend,
                 const Waveform &nearend_dry) {
    check_setup(opts.setup, geometry.loudspeakers.size(), geometry.mics.size());
    check_inside(room, geometry);
    validate(opts.sef);
    if (farend.channels() != geometry.loudspeakers.size())
        throw std::invalid_argument("make_scene: far-end channel count does not match loudspeakers");
    if (nearend_dry.channels() != 1) throw std::invalid_argument("make_scene: near-end source must be mono");
    if (farend.length() != nearend_dry.length() || farend.sample_rate() != nearend_dry.sample_rate())
        throw std::invalid_argument("make_scene: far-end and near-end signals differ in length or rate");
    if (opts.reference_mic >= geometry.mics.size()) throw std::invalid_argument("make_scene: bad reference mic");

    const std::size_t len = farend.length();
    const int fs = farend.sample_rate();
    const std::size_t m_count = geometry.mics.size();
    RirOptions rir_opts = opts.rir;
    rir_opts.sample_rate = fs;

    Scene scene;
    scene.options = opts;
    scene.room = room;
    scene.geometry = geometry;
    scene.timeline = default_timeline(len, opts.single_talk_fraction);
    if (scene.timeline.count(SegmentLabel::kDoubleTalk) == 0)
        throw std::invalid_argument("make_scene: signal too short for a double-talk region");
    scene.farend = farend;
    quantize(scene.farend);

    const Waveform feed = sef_apply(half_wave_preprocess(scene.farend, opts.feed_alpha), opts.sef);
    for (std::size_t i = 0; i < geometry.loudspeakers.size(); ++i) {
        Waveform echo(m_count, len, fs);
        for (std::size_t m = 0; m < m_count; ++m) {
            Rir rir = image_rir(room, geometry.loudspeakers[i], geometry.mics[m], rir_opts);
            echo.channel(m) = convolve(feed.channel(i), rir.taps);
            scene.rirs.push_back(std::move(rir));
        }
        scene.echoes.push_back(std::move(echo));
    }

    std::vector<double> dry = nearend_dry.channel(0);
    for (const auto &seg : scene.timeline.find(SegmentLabel::kFarendSingleTalk))
        std::fill(dry.begin() + static_cast<long>(seg.start), dry.begin() + static_cast<long>(seg.end), 0.0);
    scene.nearend = Waveform(m_count, len, fs);
    for (std::size_t m = 0; m < m_count; ++m) {
        Rir rir = image_rir(room, geometry.nearend, geometry.mics[m], rir_opts);
        scene.nearend.channel(m) = convolve(dry, rir.taps);
        scene.rirs.push_back(std::move(rir));
    }

    std::mt19937_64 rng(opts.seed ^ 0x6e6f697365ULL);
    switch (opts.noise) {
        case NoiseKind::kDiffuse: {
            DiffuseNoiseOptions d = opts.diffuse;
            d.rir = rir_opts;
            scene.noise = diffuse_noise(geometry, room, len, fs, rng, d);
            break;
        }
        case NoiseKind::kWhite: {
            scene.noise = Waveform(m_count, len, fs);
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (std::size_t m = 0; m < m_count; ++m)
                for (auto &v : scene.noise.channel(m)) v = gauss(rng);
            break;
        }
        case NoiseKind::kNone: scene.noise = Waveform(m_count, len, fs); break;
    }

    const std::size_t ref = opts.reference_mic;
    const Waveform s_ref = scene.nearend.select(ref);
    const double echo_gain = scale_echo_to_ser(s_ref, scene.total_echo().select(ref), scene.timeline, opts.ser_db);
    for (auto &e : scene.echoes) e *= echo_gain;
    if (opts.noise == NoiseKind::kNone || !opts.snr_db) {
        scene.options.snr_db.reset();
        scene.noise = Waveform(m_count, len, fs);
    } else {
        scene.noise *= scale_noise_to_snr(s_ref, scene.noise.select(ref), scene.timeline, *opts.snr_db);
    }

    for (auto &e : scene.echoes) quantize(e);
    quantize(scene.nearend);
    quantize(scene.noise);
    scene.mic = assemble_mic(scene.echoes, scene.nearend, scene.noise);
    return scene;
}

bool check_decomposition(const Scene &scene) {
    return scene.mic == assemble_mic(scene.echoes, scene.nearend, scene.noise);
}

namespace {

nlohmann::json point_json(const Point3 &p) { return {p.x, p.y, p.z}; }
Point3 json_point(const nlohmann::json &j) { return {j.at(0), j.at(1), j.at(2)}; }

std::string noise_name(NoiseKind k) {
    switch (k) {
        case NoiseKind::kDiffuse: return "diffuse";
        case NoiseKind::kWhite: return "white";
        case NoiseKind::kNone: return "none";
    }
    return "?";
}

NoiseKind noise_from_name(const std::string &s) {
    for (auto k : {NoiseKind::kDiffuse, NoiseKind::kWhite, NoiseKind::kNone})
        if (noise_name(k) == s) return k;
    throw std::invalid_argument("unknown noise kind: " + s);
}

}  // namespace

void save_scene(const Scene &scene, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    write_wav(dir / "mic.wav", scene.mic);
    write_wav(dir / "farend.wav", scene.farend);
    write_wav(dir / "nearend.wav", scene.nearend);
    write_wav(dir / "noise.wav", scene.noise);
    for (std::size_t i = 0; i < scene.echoes.size(); ++i)
        write_wav(dir / ("echo_" + std::to_string(i) + ".wav"), scene.echoes[i]);

    const auto &o = scene.options;
    nlohmann::json segments = nlohmann::json::array();
    for (const auto &s : scene.timeline.segments)
        segments.push_back({{"label", to_string(s.label)}, {"start", s.start}, {"end", s.end}});
    nlohmann::json mics = nlohmann::json::array(), speakers = nlohmann::json::array();
    for (const auto &p : scene.geometry.mics) mics.push_back(point_json(p));
    for (const auto &p : scene.geometry.loudspeakers) speakers.push_back(point_json(p));
    nlohmann::json m = {
        {"setup", to_string(o.setup)},
        {"sample_rate", scene.sample_rate()},
        {"ser_db", o.ser_db},
        {"snr_db", o.snr_db ? nlohmann::json(*o.snr_db) : nlohmann::json(nullptr)},
        {"eta2", o.sef.linear() ? nlohmann::json("inf") : nlohmann::json(o.sef.eta2)},
        {"segments", segments},
        {"seed", o.seed},
        {"geometry", {{"mics", mics}, {"loudspeakers", speakers}, {"nearend", point_json(scene.geometry.nearend)}}},
        {"room", {{"dims", scene.room.dims()}, {"t60", scene.room.t60()}, {"speed_of_sound", scene.room.speed_of_sound()}}},
        {"noise", noise_name(o.noise)},
        {"feed_alpha", o.feed_alpha},
        {"single_talk_fraction", o.single_talk_fraction},
        {"reference_mic", o.reference_mic},
        {"rir_length", o.rir.length},
        {"num_mics", scene.num_mics()},
        {"num_loudspeakers", scene.num_loudspeakers()},
    };
    std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

Scene load_scene(const std::filesystem::path &dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("load_scene: missing manifest in " + dir.string());
    const auto m = nlohmann::json::parse(in);

    Scene scene;
    auto &o = scene.options;
    o.setup = setup_from_string(m.at("setup"));
    o.ser_db = m.at("ser_db");
    if (m.at("snr_db").is_null()) o.snr_db.reset();
    else o.snr_db = m.at("snr_db").get<double>();
    o.sef.eta2 = m.at("eta2").is_string() ? std::numeric_limits<double>::infinity() : m.at("eta2").get<double>();
    o.seed = m.at("seed");
    o.noise = noise_from_name(m.value("noise", "diffuse"));
    o.feed_alpha = m.value("feed_alpha", 0.0);
    o.single_talk_fraction = m.value("single_talk_fraction", 0.4);
    o.reference_mic = m.value("reference_mic", std::size_t{0});
    o.rir.length = m.value("rir_length", std::size_t{512});
    o.rir.sample_rate = m.at("sample_rate");
    const auto &room = m.at("room");
    scene.room = RoomSpec(room.at("dims").at(0), room.at("dims").at(1), room.at("dims").at(2), room.at("t60"),
                          room.value("speed_of_sound", 343.0));
    for (const auto &p : m.at("geometry").at("mics")) scene.geometry.mics.push_back(json_point(p));
    for (const auto &p : m.at("geometry").at("loudspeakers")) scene.geometry.loudspeakers.push_back(json_point(p));
    scene.geometry.nearend = json_point(m.at("geometry").at("nearend"));
    for (const auto &s : m.at("segments"))
        scene.timeline.segments.push_back({segment_label_from_string(s.at("label")), s.at("start"), s.at("end")});

    scene.farend = read_wav(dir / "farend.wav");
    scene.nearend = read_wav(dir / "nearend.wav");
    scene.noise = read_wav(dir / "noise.wav");
    const std::size_t speakers = m.at("num_loudspeakers");
    for (std::size_t i = 0; i < speakers; ++i) scene.echoes.push_back(read_wav(dir / ("echo_" + std::to_string(i) + ".wav")));
    // mic.wav is float32 and therefore lossy; the exact mixture is the sum of
    // the stored components.
    scene.mic = assemble_mic(scene.echoes, scene.nearend, scene.noise);
    return scene;
}

}  // namespace aecbench
