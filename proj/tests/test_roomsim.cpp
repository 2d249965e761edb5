#include "aecbench/harness.hpp"
#include "aecbench/roomsim.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

using namespace aecbench;

TEST_CASE("room construction and Sabine absorption") {
    const RoomSpec room(5, 6, 3, 0.35);
    CHECK(room.volume() == doctest::Approx(90));
    CHECK(room.surface() == doctest::Approx(2 * (30 + 15 + 18)));
    const double alpha = 24 * std::log(10.0) * 90 / (343 * 126 * 0.35);
    CHECK(room.absorption() == doctest::Approx(alpha));
    CHECK(room.reflection() == doctest::Approx(std::sqrt(1 - alpha)));
    CHECK(room.center() == Point3{2.5, 3, 1.5});

    CHECK_THROWS_AS(RoomSpec(0, 6, 3, 0.35), std::invalid_argument);
    CHECK_THROWS_AS(RoomSpec(5, 6, 3, -1), std::invalid_argument);
    // a tiny T60 in a big room needs more than total absorption
    CHECK_THROWS_AS(RoomSpec(11, 14, 3, 0.05), std::invalid_argument);
}

TEST_CASE("free field gives one tap at the direct delay with 1/(4 pi d) gain") {
    const RoomSpec room(5, 6, 3, 0.35);
    RirOptions opts;
    opts.reflection = 0.0;
    opts.highpass = false;
    for (double d : {0.5, 1.0, 2.0}) {
        const Point3 src{1, 1, 1.5}, mic{1 + d, 1, 1.5};
        const auto rir = image_rir(room, src, mic, opts);
        std::size_t nonzero = 0, where = 0;
        for (std::size_t i = 0; i < rir.taps.size(); ++i)
            if (rir.taps[i] != 0.0) {
                ++nonzero;
                where = i;
            }
        CHECK(nonzero == 1);
        CHECK(where == static_cast<std::size_t>(std::lround(d * 16000 / 343)));
        CHECK(rir.taps[where] == doctest::Approx(1.0 / (4 * oracle::kPi * d)));

        // the DC-blocking filter keeps the leading tap and rings below it
        auto hp = opts;
        hp.highpass = true;
        const auto f = image_rir(room, src, mic, hp);
        CHECK(f.taps[where] == rir.taps[where]);
        for (std::size_t i = 0; i < where; ++i) CHECK(f.taps[i] == 0.0);
        for (std::size_t i = where + 1; i < f.taps.size(); ++i) CHECK(std::abs(f.taps[i]) < f.taps[where]);
    }
}

TEST_CASE("one metre at 16 kHz lands at tap 46 or 47") {
    const RoomSpec room(5, 6, 3, 0.35);
    const Point3 src{2, 3, 1.5}, mic{3, 3, 1.5};
    CHECK(direct_delay(src, mic, 16000) == doctest::Approx(16000.0 / 343));
    for (bool frac : {false, true}) {
        RirOptions o;
        o.fractional_delay = frac;
        const auto rir = image_rir(room, src, mic, o);
        const auto peak = std::max_element(rir.taps.begin(), rir.taps.end(),
                                           [](double a, double b) { return std::abs(a) < std::abs(b); }) -
                          rir.taps.begin();
        CHECK((peak == 46 || peak == 47));
        if (frac) continue;
        // sinc side lobes precede the peak; rounding does not
        std::size_t first = 0;
        while (rir.taps[first] == 0.0) ++first;
        CHECK(std::abs(static_cast<double>(first) - 16000.0 / 343) <= 1.0);
    }
}

TEST_CASE("Schroeder decay matches the configured T60") {
    const RoomSpec room(5, 6, 3, 0.35);
    RirOptions o;
    o.length = 8000;
    const auto rir = image_rir(room, {1.3, 2.1, 1.4}, {3.2, 3.9, 1.6}, o);
    const double t60 = oracle::schroeder_t60(rir.taps, 16000);
    CHECK(t60 >= 0.8 * 0.35);
    CHECK(t60 <= 1.2 * 0.35);

    // the default 512-tap response is finite and its decay curve never rises
    const auto shortr = image_rir(room, {1.3, 2.1, 1.4}, {3.2, 3.9, 1.6});
    CHECK(shortr.taps.size() == 512);
    double acc = 0, prev = INFINITY;
    for (std::size_t i = shortr.taps.size(); i-- > 0;) {
        CHECK(std::isfinite(shortr.taps[i]));
        acc += shortr.taps[i] * shortr.taps[i];
    }
    double rest = acc;
    for (double v : shortr.taps) {
        CHECK(rest <= prev);
        prev = rest;
        rest -= v * v;
    }
}

TEST_CASE("rir errors and determinism") {
    const RoomSpec room(5, 6, 3, 0.35);
    CHECK_THROWS_AS(image_rir(room, {6, 1, 1}, {1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(image_rir(room, {1, 1, 1}, {1, 1, 1}), std::invalid_argument);
    RirOptions tiny;
    tiny.length = 20;
    CHECK_THROWS_AS(image_rir(room, {1, 1, 1}, {4, 5, 2}, tiny), std::invalid_argument);
    const auto a = image_rir(room, {1, 1, 1}, {4, 5, 2});
    const auto b = image_rir(room, {1, 1, 1}, {4, 5, 2});
    CHECK(a.taps == b.taps);
    // limiting the order only removes contributions
    RirOptions o0;
    o0.max_order = 0;
    o0.highpass = false;
    const auto direct = image_rir(room, {1, 1, 1}, {4, 5, 2}, o0);
    CHECK(std::count_if(direct.taps.begin(), direct.taps.end(), [](double v) { return v != 0; }) == 1);
}

TEST_CASE("convolution against the naive oracle") {
    std::mt19937_64 rng(9);
    const auto x = oracle::white(rng, 16000);
    const auto h = oracle::white(rng, 512);
    const auto fast = convolve(x, h);
    const auto slow = oracle::naive_convolve(x, h);
    REQUIRE(fast.size() == x.size());
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
    CHECK(worst <= 1e-10);

    // identity and shift kernels
    Rir delta{std::vector<double>(512, 0.0), 16000, {}, {}};
    delta.taps[0] = 1.0;
    const auto w = Waveform::mono(x, 16000);
    CHECK(convolve(w, delta) == w);
    delta.taps[0] = 0.0;
    delta.taps[37] = 1.0;
    const auto shifted = convolve(w, delta);
    for (std::size_t n = 0; n < 37; ++n) CHECK(shifted(0, n) == 0.0);
    for (std::size_t n = 37; n < x.size(); n += 97) CHECK(shifted(0, n) == doctest::Approx(x[n - 37]).epsilon(1e-12));

    // distributes over addition
    const auto y = oracle::white(rng, 16000);
    std::vector<double> xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xy[i] = x[i] + y[i];
    const auto lhs = convolve(xy, h);
    const auto ry = convolve(y, h);
    worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - fast[i] - ry[i]));
    CHECK(worst <= 1e-10);

    Rir other = delta;
    other.sample_rate = 8000;
    CHECK_THROWS_AS(convolve(w, other), std::invalid_argument);
}

TEST_CASE("two-loudspeaker layout over the training grid") {
    for (const auto &r : training_rooms()) {
        const RoomSpec room(r.width, r.length, r.height, 0.35);
        std::mt19937_64 rng(17);
        const auto g = mcaec_geometry(room, rng);
        REQUIRE(g.mics.size() == 2);
        REQUIRE(g.loudspeakers.size() == 2);
        CHECK(distance(g.mics[0], g.mics[1]) == doctest::Approx(0.10).epsilon(1e-12));
        CHECK(distance(g.loudspeakers[0], g.loudspeakers[1]) == doctest::Approx(1.2).epsilon(1e-12));
        CHECK(std::abs(distance(g.nearend, g.mic_center()) - 1.0) <= 1e-9);
        CHECK(g.mics[0].z == kMcaecHeight);
        CHECK(g.loudspeakers[0].z == kMcaecHeight + 0.5);
        CHECK_NOTHROW(check_inside(room, g));
    }
    CHECK(training_rooms().size() == 20);
}

TEST_CASE("four-mic array layout") {
    for (const auto &r : test_rooms()) {
        const RoomSpec room(r.width, r.length, r.height, 0.35);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            std::mt19937_64 rng(seed);
            const auto g = mmaec_geometry(room, rng);
            REQUIRE(g.mics.size() == 4);
            const auto c = g.mic_center();
            CHECK(distance(c, room.center()) <= 1e-9);
            for (std::size_t i = 0; i + 1 < 4; ++i)
                CHECK(distance(g.mics[i], g.mics[i + 1]) == doctest::Approx(0.04).epsilon(1e-12));
            CHECK(std::abs(distance(g.loudspeakers[0], c) - 0.6) <= 1e-9);
            CHECK(std::abs(distance(g.nearend, c) - 1.0) <= 1e-9);
            CHECK_NOTHROW(check_inside(room, g));
        }
    }
}

TEST_CASE("rir export and import") {
    const auto dir = std::filesystem::temp_directory_path() / "aecbench_rir_test";
    std::filesystem::create_directories(dir);
    const RoomSpec room(5, 6, 3, 0.35);
    const auto rir = image_rir(room, {1, 2, 1.5}, {3, 3, 1.2});
    save_rir(dir / "h.wav", rir);
    CHECK(std::filesystem::exists(dir / "h.wav.json"));
    const auto back = load_rir(dir / "h.wav");
    CHECK(back.sample_rate == 16000);
    CHECK(back.src == rir.src);
    CHECK(back.mic == rir.mic);
    REQUIRE(back.taps.size() == rir.taps.size());
    for (std::size_t i = 0; i < rir.taps.size(); ++i)
        CHECK(back.taps[i] == static_cast<double>(static_cast<float>(rir.taps[i])));
    std::filesystem::remove_all(dir);
}
