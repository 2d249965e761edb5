#include "aecbench/metrics.hpp"
#include "aecbench/mixer.hpp"
#include "aecbench/signal.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

using namespace aecbench;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sources {
    Waveform farend, nearend;
};

Sources sources(std::uint64_t seed, std::size_t len, std::size_t loudspeakers = 1) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> far;
    for (std::size_t i = 0; i < loudspeakers; ++i) far.push_back(synth_speech(len, 16000, rng));
    auto near = synth_speech(len, 16000, rng, {170, 250, 0.2, 0.1});
    return {Waveform(far, 16000), Waveform::mono(near, 16000)};
}

Scene small_scene(std::uint64_t seed, SceneOptions opts = {}, std::size_t len = 24000) {
    const RoomSpec room(5, 6, 3, 0.35);
    std::mt19937_64 rng(seed);
    const auto g = opts.setup == Setup::kMcaec ? mcaec_geometry(room, rng) : mmaec_geometry(room, rng);
    const auto src = sources(seed + 100, len, g.loudspeakers.size());
    opts.seed = seed;
    return make_scene(opts, room, g, src.farend, src.nearend);
}

}  // namespace

TEST_CASE("loudspeaker curve against quadrature") {
    CHECK(sef(0.0, {0.1}) == 0.0);
    CHECK(std::abs(sef(0.5, {0.1}) - oracle::sef_quadrature(0.5, 0.1)) <= 1e-8);
    for (double x : {-2.0, -0.3, 0.0, 0.7, 1.9}) CHECK(sef(x, {kInf}) == x);
    for (double eta2 : {0.1, 0.5, 1.0, 10.0}) {
        const double bound = std::sqrt(eta2) * std::sqrt(oracle::kPi / 2);
        double prev = -INFINITY;
        for (int i = -400; i <= 400; ++i) {
            const double x = i / 200.0;
            const double y = sef(x, {eta2});
            CHECK(y == -sef(-x, {eta2}));
            CHECK(y >= prev);
            CHECK(std::abs(y) <= bound);
            prev = y;
        }
    }
    CHECK_THROWS_AS(validate(SefConfig{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(SefConfig{-1.0}), std::invalid_argument);
    const auto w = Waveform::mono({0.1, -0.4, 0.9}, 16000);
    CHECK(sef_apply(w, {}) == w);
}

TEST_CASE("timeline: leading single talk then double talk") {
    const auto tl = default_timeline(1000, 0.4);
    REQUIRE(tl.segments.size() == 2);
    CHECK(tl.segments[0] == Segment{SegmentLabel::kFarendSingleTalk, 0, 400});
    CHECK(tl.segments[1] == Segment{SegmentLabel::kDoubleTalk, 400, 1000});
    CHECK(tl.count(SegmentLabel::kNearendSingleTalk) == 0);
    for (auto l : {SegmentLabel::kFarendSingleTalk, SegmentLabel::kDoubleTalk, SegmentLabel::kNearendSingleTalk})
        CHECK(segment_label_from_string(to_string(l)) == l);
}

TEST_CASE("gain staging examples") {
    const auto tl = default_timeline(1000, 0.4);
    Waveform s(1, 1000, 16000), d(1, 1000, 16000);
    std::mt19937_64 rng(2);
    const auto a = oracle::white(rng, 1000);
    for (std::size_t n = 0; n < 1000; ++n) {
        s(0, n) = a[n];
        d(0, n) = n % 2 ? a[n] : -a[n];
    }
    CHECK(scale_echo_to_ser(s, d, tl, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scale_echo_to_ser(s, d, tl, -6.0) == doctest::Approx(1.9953).epsilon(1e-4));
    CHECK(scale_noise_to_snr(s, d, tl, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    const auto v = Waveform::mono(oracle::white(rng, 1000), 16000);
    for (double snr : {8.0, 10.0, 12.0, 14.0}) {
        const double g = scale_noise_to_snr(s, v, tl, snr);
        const double realized = 10 * std::log10(segment_energy(s, tl, SegmentLabel::kDoubleTalk) /
                                                segment_energy(v * g, tl, SegmentLabel::kDoubleTalk));
        CHECK(std::abs(realized - snr) <= 1e-6);
    }
    CHECK_THROWS_AS(scale_echo_to_ser(s, Waveform(1, 1000, 16000), tl, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(scale_echo_to_ser(s, d, default_timeline(1000, 1.0), 0.0), std::invalid_argument);
}

TEST_CASE("diffuse noise: coherence falls with frequency, energies are stable") {
    const RoomSpec room(5, 6, 3, 0.35);
    double low = 0, high = 0;
    std::vector<double> energy;
    std::vector<std::vector<double>> first;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 grng(seed);
        const auto g = mmaec_geometry(room, grng);
        std::mt19937_64 rng(1000 + seed);
        const auto v = diffuse_noise(g, room, 32000, 16000, rng);
        REQUIRE(v.channels() == 4);
        const auto V = stft(v);
        auto msc = [&](std::size_t f) {
            cdouble cross = 0;
            double p0 = 0, p1 = 0;
            for (std::size_t t = 0; t < V.frames(); ++t) {
                cross += V(t, f, 0) * std::conj(V(t, f, 1));
                p0 += std::norm(V(t, f, 0));
                p1 += std::norm(V(t, f, 1));
            }
            return std::norm(cross) / (p0 * p1);
        };
        low += msc(4);    // 200 Hz
        high += msc(120); // 6 kHz
        if (seed < 2) {
            double e = 0;
            for (std::size_t c = 0; c < 4; ++c)
                for (double x : v.channel(c)) e += x * x;
            energy.push_back(e);
            first.push_back(v.channel(0));
        }
    }
    CHECK(low / 10 > high / 10);
    CHECK(first[0] != first[1]);
    CHECK(std::abs(10 * std::log10(energy[0] / energy[1])) <= 1.0);

    ArrayGeometry one;
    one.mics = {room.center()};
    std::mt19937_64 rng(1);
    CHECK(diffuse_noise(one, room, 100, 16000, rng).channels() == 1);
}

TEST_CASE("scene decomposition, levels and component counts") {
    SceneOptions o;
    const auto sc = small_scene(4, o);
    CHECK(check_decomposition(sc));
    CHECK(sc.num_mics() == 4);
    CHECK(sc.num_loudspeakers() == 1);
    CHECK(sc.rirs.size() == 8);
    const auto rep = verify_scene(sc);
    CHECK(std::abs(*rep.realized_ser_db - 3.5) <= 0.01);
    CHECK(std::abs(*rep.realized_snr_db - 10.0) <= 0.01);

    // mic minus components is exactly zero
    for (std::size_t c = 0; c < sc.num_mics(); ++c)
        for (std::size_t n = 0; n < sc.mic.length(); n += 7)
            CHECK(sc.mic(c, n) - (sc.echoes[0](c, n) + sc.nearend(c, n) + sc.noise(c, n)) == 0.0);

    // near-end silent over far-end single talk
    for (const auto &seg : sc.timeline.find(SegmentLabel::kFarendSingleTalk))
        for (std::size_t n = seg.start; n < seg.end; ++n) CHECK(sc.nearend(0, n) == 0.0);

    SceneOptions mc;
    mc.setup = Setup::kMcaec;
    const auto two = small_scene(5, mc);
    CHECK(two.echoes.size() == 2);
    CHECK(two.num_mics() == 2);
    CHECK(check_decomposition(two));

    // echo rescaled by 2 costs 6.02 dB of SER
    auto louder = sc;
    for (auto &e : louder.echoes) e *= 2.0;
    CHECK(verify_scene(sc).realized_ser_db.value() - verify_scene(louder).realized_ser_db.value() ==
          doctest::Approx(20 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("degenerate scene: no noise, no near-end") {
    const RoomSpec room(5, 6, 3, 0.35);
    std::mt19937_64 rng(3);
    const auto g = mmaec_geometry(room, rng);
    const auto src = sources(8, 16000);
    SceneOptions o;
    o.noise = NoiseKind::kNone;
    o.single_talk_fraction = 0.4;
    // a near-end source that is zero everywhere cannot be calibrated
    CHECK_THROWS_AS(make_scene(o, room, g, src.farend, Waveform(1, 16000, 16000)), std::invalid_argument);
    const auto sc = make_scene(o, room, g, src.farend, src.nearend);
    CHECK(!sc.options.snr_db);
    CHECK(!verify_scene(sc).realized_snr_db);
    // over far-end single talk the mic is pure echo
    for (std::size_t n = 0; n < 6400; ++n) CHECK(sc.mic(0, n) == sc.echoes[0](0, n));
    CHECK(erle(sc.mic.select(0), Waveform(1, 16000, 16000), sc.timeline) == kScoreCapDb);
}

TEST_CASE("scene errors") {
    const RoomSpec room(5, 6, 3, 0.35);
    std::mt19937_64 rng(3);
    const auto g = mmaec_geometry(room, rng);
    const auto src = sources(8, 16000, 2);
    SceneOptions o;
    CHECK_THROWS_AS(make_scene(o, room, g, src.farend, src.nearend), std::invalid_argument);
    o.setup = Setup::kMcaec;
    CHECK_THROWS_AS(make_scene(o, room, g, src.farend.select(0), src.nearend), std::invalid_argument);
    const RoomSpec small(3, 4, 3, 0.35);
    const auto g2 = mmaec_geometry(RoomSpec(11, 14, 3, 0.35), rng);
    o.setup = Setup::kMmaec;
    CHECK_THROWS_AS(make_scene(o, small, g2, src.farend.select(0), src.nearend), std::invalid_argument);
}

TEST_CASE("half-wave preprocessing") {
    const auto x = Waveform::mono({-1.0, 0.0, 0.5}, 16000);
    const auto y = half_wave_preprocess(x, 0.5);
    CHECK(y(0, 0) == -1.0);
    CHECK(y(0, 1) == 0.0);
    CHECK(y(0, 2) == 0.75);
    CHECK(half_wave_preprocess(x, 0.0) == x);
}

TEST_CASE("scene export and reload") {
    const auto dir = std::filesystem::temp_directory_path() / "aecbench_scene_test";
    std::filesystem::remove_all(dir);
    const auto sc = small_scene(6);
    save_scene(sc, dir);
    for (const char *f : {"mic.wav", "farend.wav", "nearend.wav", "noise.wav", "echo_0.wav", "manifest.json"})
        CHECK(std::filesystem::exists(dir / f));
    const auto back = load_scene(dir);
    CHECK(back.mic == sc.mic);
    CHECK(back.nearend == sc.nearend);
    CHECK(back.timeline == sc.timeline);
    CHECK(back.options.ser_db == sc.options.ser_db);
    CHECK(back.options.seed == sc.options.seed);
    CHECK(std::isinf(back.options.sef.eta2));
    std::filesystem::remove_all(dir);
}
