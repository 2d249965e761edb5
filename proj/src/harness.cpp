// harness.cpp

#include "aecbench/harness.hpp"

#include "aecbench/beamform.hpp"
#include "aecbench/masking.hpp"
#include "aecbench/metrics.hpp"
#include "aecbench/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace aecbench {

std::vector<RoomEntry> test_rooms() {
    return {{"room1", 3, 4, 3}, {"room2", 5, 6, 3}, {"room3", 11, 14, 3}};
}

std::vector<RoomEntry> training_rooms() {
    std::vector<RoomEntry> rooms;
    for (int a : {4, 6, 8, 10})
        for (int b : {5, 7, 9, 11, 13})
            rooms.push_back({"train_" + std::to_string(a) + "x" + std::to_string(b), double(a), double(b), 3.0});
    return rooms;
}

void validate(const ExperimentConfig &cfg) {
    if (cfg.rooms.empty() || cfg.t60s.empty() || cfg.ser_dbs.empty() || cfg.eta2s.empty() || cfg.seeds.empty() ||
        cfg.pipelines.empty())
        throw std::invalid_argument("experiment config: rooms, t60, ser, eta2, seeds and pipelines must be nonempty");
    if (cfg.noise != NoiseKind::kNone && cfg.snr_dbs.empty())
        throw std::invalid_argument("experiment config: snr set is empty but noise is enabled");
    std::set<std::uint64_t> unique(cfg.seeds.begin(), cfg.seeds.end());
    if (unique.size() != cfg.seeds.size()) throw std::invalid_argument("experiment config: seeds must be unique");
    if (!(cfg.duration_s > 0) || cfg.sample_rate <= 0 || cfg.rir_length == 0)
        throw std::invalid_argument("experiment config: invalid duration, sample rate or RIR length");
    if (cfg.positions_per_room == 0) throw std::invalid_argument("experiment config: positions_per_room must be >= 1");
    for (double e : cfg.eta2s) validate(SefConfig{e});
}

namespace {

std::string eta_string(double eta2) {
    if (std::isinf(eta2)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eta2);
    return buf;
}

double eta_from_json(const nlohmann::json &j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        return std::stod(s);
    }
    return j.get<double>();
}

std::string noise_name(NoiseKind k) {
    return k == NoiseKind::kDiffuse ? "diffuse" : k == NoiseKind::kWhite ? "white" : "none";
}

NoiseKind noise_kind(const std::string &s) {
    if (s == "diffuse") return NoiseKind::kDiffuse;
    if (s == "white") return NoiseKind::kWhite;
    if (s == "none") return NoiseKind::kNone;
    throw std::invalid_argument("unknown noise kind: " + s);
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json &j) {
    ExperimentConfig cfg;
    if (j.contains("setup")) cfg.setup = setup_from_string(j.at("setup"));
    if (j.contains("rooms")) {
        cfg.rooms.clear();
        for (const auto &r : j.at("rooms")) {
            if (r.is_string()) {
                const auto name = r.get<std::string>();
                if (name == "test") {
                    for (auto &t : test_rooms()) cfg.rooms.push_back(t);
                    continue;
                }
                if (name == "training") {
                    for (auto &t : training_rooms()) cfg.rooms.push_back(t);
                    continue;
                }
                bool found = false;
                for (auto &t : test_rooms())
                    if (t.label == name) {
                        cfg.rooms.push_back(t);
                        found = true;
                    }
                if (!found) throw std::invalid_argument("unknown room: " + name);
            } else {
                const auto &d = r.at("dims");
                cfg.rooms.push_back({r.value("label", std::string("room")), d.at(0), d.at(1), d.at(2)});
            }
        }
    }
    auto doubles = [&](const char *key, std::vector<double> &out) {
        if (j.contains(key)) out = j.at(key).get<std::vector<double>>();
    };
    doubles("t60", cfg.t60s);
    doubles("ser_db", cfg.ser_dbs);
    doubles("snr_db", cfg.snr_dbs);
    if (j.contains("eta2")) {
        cfg.eta2s.clear();
        for (const auto &e : j.at("eta2")) cfg.eta2s.push_back(eta_from_json(e));
    }
    if (j.contains("seeds")) {
        const auto &s = j.at("seeds");
        if (s.is_object()) {
            const std::uint64_t first = s.value("first", std::uint64_t{1});
            const std::uint64_t count = s.at("count");
            for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(first + i);
        } else {
            cfg.seeds = s.get<std::vector<std::uint64_t>>();
        }
    }
    if (j.contains("pipelines")) cfg.pipelines = j.at("pipelines").get<std::vector<std::string>>();
    if (j.contains("noise")) cfg.noise = noise_kind(j.at("noise"));
    cfg.duration_s = j.value("duration_s", cfg.duration_s);
    cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
    cfg.rir_length = j.value("rir_length", cfg.rir_length);
    cfg.single_talk_fraction = j.value("single_talk_fraction", cfg.single_talk_fraction);
    cfg.decorrelation_alpha = j.value("decorrelation_alpha", cfg.decorrelation_alpha);
    cfg.positions_per_room = j.value("positions_per_room", cfg.positions_per_room);
    if (j.contains("nlms")) {
        const auto &n = j.at("nlms");
        cfg.nlms.taps = n.value("taps", cfg.nlms.taps);
        cfg.nlms.mu = n.value("mu", cfg.nlms.mu);
        cfg.nlms.epsilon = n.value("epsilon", cfg.nlms.epsilon);
    }
    if (j.contains("mask_dir")) cfg.mask_dir = j.at("mask_dir").get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.keep_wavs = j.value("keep_wavs", cfg.keep_wavs);
    return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig &cfg) {
    nlohmann::json rooms = nlohmann::json::array();
    for (const auto &r : cfg.rooms) rooms.push_back({{"label", r.label}, {"dims", {r.width, r.length, r.height}}});
    nlohmann::json etas = nlohmann::json::array();
    for (double e : cfg.eta2s) etas.push_back(std::isinf(e) ? nlohmann::json("inf") : nlohmann::json(e));
    return {{"setup", to_string(cfg.setup)},
            {"rooms", rooms},
            {"t60", cfg.t60s},
            {"ser_db", cfg.ser_dbs},
            {"snr_db", cfg.snr_dbs},
            {"eta2", etas},
            {"seeds", cfg.seeds},
            {"pipelines", cfg.pipelines},
            {"noise", noise_name(cfg.noise)},
            {"duration_s", cfg.duration_s},
            {"sample_rate", cfg.sample_rate},
            {"rir_length", cfg.rir_length},
            {"single_talk_fraction", cfg.single_talk_fraction},
            {"decorrelation_alpha", cfg.decorrelation_alpha},
            {"positions_per_room", cfg.positions_per_room},
            {"nlms", {{"taps", cfg.nlms.taps}, {"mu", cfg.nlms.mu}, {"epsilon", cfg.nlms.epsilon}}},
            {"mask_dir", cfg.mask_dir.string()},
            {"output_dir", cfg.output_dir.string()},
            {"keep_wavs", cfg.keep_wavs}};
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    return config_from_json(nlohmann::json::parse(in));
}

std::string scene_id(const RoomEntry &room, double eta2, std::uint64_t seed) {
    return room.label + "_eta" + eta_string(eta2) + "_s" + std::to_string(seed);
}

namespace {

template <typename T>
const T &pick(const std::vector<T> &v, std::mt19937_64 &rng) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

VoiceOptions random_voice(std::mt19937_64 &rng) {
    VoiceOptions v;
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
        v.f0_low = 90;
        v.f0_high = 140;
    } else {
        v.f0_low = 170;
        v.f0_high = 250;
    }
    return v;
}

void normalize_peak(Waveform &w, double peak) {
    double m = 0.0;
    for (std::size_t c = 0; c < w.channels(); ++c)
        for (double v : w.channel(c)) m = std::max(m, std::abs(v));
    if (m > 0) w *= peak / m;
}

// Stereo far-end: one talker picked up by two microphones in a fixed
// transmission room, which makes the channels strongly correlated.
Waveform stereo_farend(const std::vector<double> &dry, int fs, std::size_t rir_len, std::mt19937_64 &rng) {
    const RoomSpec room(4.5, 5.5, 3.0, 0.3);
    std::uniform_real_distribution<double> ux(1.0, 3.5), uy(1.0, 2.0);
    const Point3 talker{ux(rng), uy(rng), 1.6};
    const std::array<Point3, 2> pickups{Point3{1.85, 4.0, 1.5}, Point3{2.65, 4.0, 1.5}};
    RirOptions opts;
    opts.length = rir_len;
    opts.sample_rate = fs;
    Waveform out(2, dry.size(), fs);
    for (std::size_t c = 0; c < 2; ++c) out.channel(c) = convolve(dry, image_rir(room, talker, pickups[c], opts).taps);
    return out;
}

}  // namespace

Scene build_scene(const ExperimentConfig &cfg, std::size_t room_index, double eta2, std::uint64_t seed) {
    const auto &entry = cfg.rooms.at(room_index);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(room_index), 0x5ce7eu};
    std::mt19937_64 rng(seq);

    const double t60 = pick(cfg.t60s, rng);
    const double ser = pick(cfg.ser_dbs, rng);
    const std::optional<double> snr =
        cfg.noise == NoiseKind::kNone ? std::nullopt : std::optional<double>(pick(cfg.snr_dbs, rng));
    const RoomSpec room(entry.width, entry.length, entry.height, t60);

    // The talker/loudspeaker placement comes from a fixed pool per room.
    const std::size_t position = std::uniform_int_distribution<std::size_t>(0, cfg.positions_per_room - 1)(rng);
    std::seed_seq geo_seq{static_cast<std::uint32_t>(room_index), static_cast<std::uint32_t>(position), 0x9e0u};
    std::mt19937_64 geo_rng(geo_seq);
    ArrayGeometry geometry;
    switch (cfg.setup) {
        case Setup::kMcaec: geometry = mcaec_geometry(room, geo_rng); break;
        case Setup::kMmaec: geometry = mmaec_geometry(room, geo_rng); break;
        case Setup::kSingle: geometry = single_geometry(room, geo_rng); break;
    }

    const auto length = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.sample_rate));
    const VoiceOptions far_voice = random_voice(rng);
    const VoiceOptions near_voice = random_voice(rng);
    const auto far_dry = synth_speech(length, cfg.sample_rate, rng, far_voice);
    Waveform farend = cfg.setup == Setup::kMcaec ? stereo_farend(far_dry, cfg.sample_rate, cfg.rir_length, rng)
                                                 : Waveform::mono(far_dry, cfg.sample_rate);
    normalize_peak(farend, 0.9);
    const Waveform nearend = Waveform::mono(synth_speech(length, cfg.sample_rate, rng, near_voice), cfg.sample_rate);

    SceneOptions opts;
    opts.setup = cfg.setup;
    opts.ser_db = ser;
    opts.snr_db = snr;
    opts.sef = SefConfig{eta2};
    opts.noise = cfg.noise;
    opts.single_talk_fraction = cfg.single_talk_fraction;
    opts.feed_alpha = cfg.setup == Setup::kMcaec ? cfg.decorrelation_alpha : 0.0;
    opts.seed = rng();
    opts.rir.length = cfg.rir_length;
    opts.rir.sample_rate = cfg.sample_rate;
    return make_scene(opts, room, geometry, farend, nearend);
}

namespace {

struct PipelineSpec {
    std::string base;
    std::string stage;
};

PipelineSpec parse_pipeline(const std::string &name) {
    PipelineSpec p;
    const auto plus = name.find('+');
    p.base = name.substr(0, plus);
    if (plus != std::string::npos) p.stage = name.substr(plus + 1);
    static const std::set<std::string> bases{"unprocessed", "nlms", "stereo_nlms", "oracle_smm", "oracle_complex",
                                             "file_mask"};
    static const std::set<std::string> stages{"", "on_mic", "post_filter", "ideal_bf"};
    if (!bases.count(p.base) || !stages.count(p.stage)) throw std::invalid_argument("unknown pipeline: " + name);
    return p;
}

MaskSet load_scene_masks(const ExperimentConfig &cfg, const std::string &id, const Spectrogram &Y) {
    if (cfg.mask_dir.empty()) throw std::invalid_argument("file_mask pipeline needs mask_dir");
    const auto whole = cfg.mask_dir / (id + ".msk");
    if (std::filesystem::exists(whole)) return load_masks(whole);
    // One single-channel file per microphone.
    MaskSet merged;
    for (std::size_t c = 0; c < Y.channels(); ++c) {
        const auto m = load_masks(cfg.mask_dir / (id + "_mic" + std::to_string(c + 1) + ".msk"));
        if (m.channels != 1 || m.frames != Y.frames() || m.bins != Y.bins())
            throw std::invalid_argument("mask file for " + id + " mic " + std::to_string(c + 1) + " has wrong shape");
        if (c == 0) {
            merged = MaskSet::zeros_like(Y, m.kind);
            merged.source = MaskSource::kFile;
        } else if (m.kind != merged.kind) {
            throw std::invalid_argument("mask files for " + id + " mix kinds");
        }
        const std::size_t width = m.kind == MaskKind::kComplexSpectrum ? 2 : 1;
        for (std::size_t t = 0; t < Y.frames(); ++t)
            for (std::size_t f = 0; f < Y.bins(); ++f)
                for (std::size_t k = 0; k < width; ++k)
                    merged.values[merged.index(t, f, c) * width + k] = m.values[m.index(t, f, 0) * width + k];
    }
    return merged;
}

Waveform run_adaptive(const Scene &scene, const ExperimentConfig &cfg, bool stereo) {
    const bool two_speakers = scene.num_loudspeakers() == 2;
    if (stereo != two_speakers)
        throw std::invalid_argument(stereo ? "stereo_nlms needs a two-loudspeaker scene"
                                           : "nlms needs a one-loudspeaker scene (use stereo_nlms)");
    Waveform out(scene.num_mics(), scene.mic.length(), scene.sample_rate());
    for (std::size_t m = 0; m < scene.num_mics(); ++m) {
        const Waveform y = scene.mic.select(m);
        const auto res = stereo ? stereo_nlms_cancel(y, scene.farend, cfg.nlms, {scene.options.feed_alpha})
                                : nlms_cancel(y, scene.farend, cfg.nlms);
        out.channel(m) = res.error.channel(0);
    }
    return out;
}

}  // namespace

PipelineOutput run_pipeline(const std::string &pipeline, const Scene &scene, const ExperimentConfig &cfg,
                            const std::string &id) {
    const auto spec = parse_pipeline(pipeline);
    const Spectrogram Y = stft(scene.mic);
    Spectrogram S_hat;
    Waveform estimate;
    if (spec.base == "unprocessed") {
        S_hat = Y;
        estimate = scene.mic;
    } else if (spec.base == "nlms" || spec.base == "stereo_nlms") {
        estimate = run_adaptive(scene, cfg, spec.base == "stereo_nlms");
        S_hat = stft(estimate);
    } else {
        MaskSet masks;
        if (spec.base == "oracle_smm") masks = oracle_smm(stft(scene.nearend), Y);
        else if (spec.base == "oracle_complex") masks = oracle_complex(stft(scene.nearend));
        else masks = load_scene_masks(cfg, id, Y);
        S_hat = apply_mask(Y, masks);
        estimate = istft(S_hat);
    }
    if (spec.stage.empty()) return {estimate, false};

    if (scene.num_mics() < 2) throw std::invalid_argument("beamforming needs at least two microphones");
    BeamformerWeights w;
    Spectrogram out;
    if (spec.stage == "ideal_bf") {
        w = mask_driven_mvdr(stft(scene.nearend), Y);
        out = apply_beamformer(w, S_hat, BeamformMode::kPostFilter);
    } else {
        w = mask_driven_mvdr(S_hat, Y);
        out = spec.stage == "on_mic" ? apply_beamformer(w, Y, BeamformMode::kOnMic)
                                     : apply_beamformer(w, S_hat, BeamformMode::kPostFilter);
    }
    return {istft(out), true};
}

ExperimentResult run_experiment(const ExperimentConfig &cfg) {
    validate(cfg);
    for (const auto &p : cfg.pipelines) parse_pipeline(p);
    ExperimentResult result;
    for (std::size_t r = 0; r < cfg.rooms.size(); ++r)
        for (double eta2 : cfg.eta2s)
            for (std::uint64_t seed : cfg.seeds) {
                const std::string id = scene_id(cfg.rooms[r], eta2, seed);
                std::optional<Scene> scene;
                std::string scene_error;
                try {
                    scene = build_scene(cfg, r, eta2, seed);
                    if (!check_decomposition(*scene)) throw std::runtime_error("scene decomposition check failed");
                    if (cfg.keep_wavs && !cfg.output_dir.empty()) save_scene(*scene, cfg.output_dir / "scenes" / id);
                } catch (const std::exception &e) {
                    scene.reset();
                    scene_error = e.what();
                }
                for (const auto &pipeline : cfg.pipelines) {
                    SceneScore base{cfg.rooms[r].label, eta2, seed, pipeline, 1, {}, {}, scene_error};
                    if (!scene) {
                        result.scores.push_back(base);
                        continue;
                    }
                    const std::size_t ref = scene->options.reference_mic;
                    try {
                        const auto out = run_pipeline(pipeline, *scene, cfg, id);
                        if (cfg.keep_wavs && !cfg.output_dir.empty()) {
                            auto name = pipeline;
                            std::replace(name.begin(), name.end(), '+', '-');
                            write_wav(cfg.output_dir / "scenes" / id / (name + ".wav"), out.signal);
                        }
                        // Beamformers and multi-mic arrays are scored at the
                        // reference mic; the two-mic stereo setup at each mic.
                        std::vector<std::size_t> mics;
                        if (out.beamformed || cfg.setup != Setup::kMcaec) mics = {ref};
                        else
                            for (std::size_t m = 0; m < scene->num_mics(); ++m) mics.push_back(m);
                        for (std::size_t m : mics) {
                            SceneScore s = base;
                            s.mic = m + 1;
                            const Waveform est = out.signal.select(out.beamformed ? 0 : m);
                            if (pipeline != "unprocessed") s.erle_db = erle(scene->mic.select(m), est, scene->timeline);
                            s.si_sdr_db = si_sdr(scene->nearend.select(m), est, scene->timeline);
                            result.scores.push_back(s);
                        }
                    } catch (const std::exception &e) {
                        base.mic = ref + 1;
                        base.error = e.what();
                        result.scores.push_back(base);
                    }
                }
            }

    // Summary rows in first-appearance order.
    struct Acc {
        SummaryRow erle, sdr;
        double erle_sum = 0, sdr_sum = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Acc> acc;
    for (const auto &s : result.scores) {
        const std::string key = s.room + "|" + eta_string(s.eta2) + "|" + s.pipeline + "|" + std::to_string(s.mic);
        if (!acc.count(key)) {
            order.push_back(key);
            Acc a;
            a.erle = {s.room, s.eta2, s.pipeline, s.mic, "erle_db", {}, 0, 0};
            a.sdr = {s.room, s.eta2, s.pipeline, s.mic, "si_sdr_db", {}, 0, 0};
            acc[key] = a;
        }
        auto &a = acc[key];
        if (!s.error.empty()) {
            ++a.erle.failures;
            ++a.sdr.failures;
            continue;
        }
        if (s.erle_db) {
            a.erle_sum += *s.erle_db;
            ++a.erle.count;
        }
        if (s.si_sdr_db) {
            a.sdr_sum += *s.si_sdr_db;
            ++a.sdr.count;
        }
    }
    for (const auto &key : order) {
        auto &a = acc[key];
        if (a.erle.count) a.erle.mean = a.erle_sum / static_cast<double>(a.erle.count);
        if (a.sdr.count) a.sdr.mean = a.sdr_sum / static_cast<double>(a.sdr.count);
        result.summary.push_back(a.erle);
        result.summary.push_back(a.sdr);
    }
    return result;
}

namespace {

std::string fmt(const std::optional<double> &v, const char *spec) {
    if (!v) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, *v);
    return buf;
}

std::string pipeline_label(const std::string &p) {
    if (p.rfind("nlms", 0) == 0 || p.rfind("stereo_nlms", 0) == 0) return p + " [NLMS stand-in]";
    return p;
}

}  // namespace

std::string render_table(const ExperimentResult &r) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-14s %-6s %-34s %-4s %10s %28s %6s %6s\n", "room", "eta2", "pipeline", "mic",
                  "ERLE(dB)", "SI-SDR(dB, PESQ out of scope)", "n", "fail");
    os << line;
    for (std::size_t i = 0; i + 1 < r.summary.size(); i += 2) {
        const auto &e = r.summary[i];
        const auto &s = r.summary[i + 1];
        std::snprintf(line, sizeof line, "%-14s %-6s %-34s %-4zu %10s %28s %6zu %6zu\n", e.room.c_str(),
                      eta_string(e.eta2).c_str(), pipeline_label(e.pipeline).c_str(), e.mic,
                      fmt(e.mean, "%.2f").c_str(), fmt(s.mean, "%.2f").c_str(), s.count, s.failures);
        os << line;
    }
    return os.str();
}

std::string render_csv(const ExperimentResult &r) {
    std::ostringstream os;
    os << "room,eta2,pipeline,mic,metric,mean,count,failures\n";
    for (const auto &row : r.summary)
        os << row.room << ',' << eta_string(row.eta2) << ',' << row.pipeline << ',' << row.mic << ',' << row.metric
           << ',' << fmt(row.mean, "%.17g") << ',' << row.count << ',' << row.failures << '\n';
    return os.str();
}

std::string render_scores_csv(const ExperimentResult &r) {
    std::ostringstream os;
    os << "room,eta2,seed,pipeline,mic,erle_db,si_sdr_db,error\n";
    for (const auto &s : r.scores) {
        std::string err = s.error;
        std::replace(err.begin(), err.end(), ',', ';');
        os << s.room << ',' << eta_string(s.eta2) << ',' << s.seed << ',' << s.pipeline << ',' << s.mic << ','
           << fmt(s.erle_db, "%.17g") << ',' << fmt(s.si_sdr_db, "%.17g") << ',' << err << '\n';
    }
    return os.str();
}

std::vector<FeatureEntry> export_features(const ExperimentConfig &cfg, const std::filesystem::path &out_dir,
                                          MicSelection selection) {
    validate(cfg);
    std::filesystem::create_directories(out_dir);
    std::vector<FeatureEntry> entries;
    for (std::size_t r = 0; r < cfg.rooms.size(); ++r)
        for (double eta2 : cfg.eta2s)
            for (std::uint64_t seed : cfg.seeds) {
                const std::string id = scene_id(cfg.rooms[r], eta2, seed);
                const Scene scene = build_scene(cfg, r, eta2, seed);
                if (!check_decomposition(scene)) throw std::runtime_error("scene decomposition check failed: " + id);
                if (cfg.keep_wavs) save_scene(scene, out_dir / "scenes" / id);
                const Spectrogram Y = stft(scene.mic);
                const Spectrogram S = stft(scene.nearend);
                const Spectrogram X = stft(scene.farend);
                const MaskSet target_all = oracle_smm(S, Y);

                std::vector<std::size_t> mics;
                if (selection == MicSelection::kAll) {
                    for (std::size_t m = 0; m < scene.num_mics(); ++m) mics.push_back(m);
                } else {
                    std::mt19937_64 rng(scene.options.seed ^ 0x6d6963ULL);
                    mics.push_back(std::uniform_int_distribution<std::size_t>(0, scene.num_mics() - 1)(rng));
                }
                for (std::size_t m : mics) {
                    Spectrogram feat = Y.zeros_like(1 + X.channels());
                    MaskSet target = MaskSet::zeros_like(Y.select(m), MaskKind::kMagnitudeMask);
                    for (std::size_t t = 0; t < Y.frames(); ++t)
                        for (std::size_t f = 0; f < Y.bins(); ++f) {
                            feat(t, f, 0) = Y(t, f, m);
                            for (std::size_t l = 0; l < X.channels(); ++l) feat(t, f, 1 + l) = X(t, f, l);
                            target.values[target.index(t, f, 0)] = target_all.mask(t, f, m);
                        }
                    FeatureEntry e;
                    e.scene = id;
                    e.setup = cfg.setup;
                    e.mic = m + 1;
                    const std::string stem = id + "_mic" + std::to_string(m + 1);
                    e.features = stem + ".features.msk";
                    e.target = stem + ".target.msk";
                    save_masks(MaskSet::from_spectrogram(feat), out_dir / e.features);
                    save_masks(target, out_dir / e.target);
                    entries.push_back(e);
                }
            }

    nlohmann::json list = nlohmann::json::array();
    for (const auto &e : entries)
        list.push_back({{"features", e.features.string()},
                        {"target", e.target.string()},
                        {"scene", e.scene},
                        {"setup", to_string(e.setup)},
                        {"mic", e.mic}});
    const auto Ycfg = default_stft_config();
    nlohmann::json manifest = {{"setup", to_string(cfg.setup)},
                               {"sample_rate", cfg.sample_rate},
                               {"stft", {{"frame_len", Ycfg.frame_len}, {"hop", Ycfg.hop}, {"fft_size", Ycfg.fft_size},
                                         {"window", "sqrt_hann"}}},
                               {"feature_channels", cfg.setup == Setup::kMcaec ? 3 : 2},
                               {"entries", list}};
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
    return entries;
}

}  // namespace aecbench
