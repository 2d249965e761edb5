#include "aecbench/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace aecbench;

namespace {

Waveform noise(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    return Waveform::mono(oracle::white(rng, n), 16000);
}

}  // namespace

TEST_CASE("erle examples") {
    const auto tl = default_timeline(10000);
    const auto y = noise(1, 10000);
    CHECK(*erle(y, y, tl) == 0.0);
    CHECK(*erle(y, y * 0.1, tl) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(*erle(y, Waveform(1, 10000, 16000), tl) == kScoreCapDb);
    // scaling the output by g moves ERLE by -20 log10 g
    for (double g : {0.5, 2.0, 13.0})
        CHECK(*erle(y, y * (0.1 * g), tl) == doctest::Approx(20.0 - 20 * std::log10(g)).epsilon(1e-12));
    CHECK(!erle(y, y, default_timeline(10000, 0.0)));
    CHECK(!erle(Waveform(1, 10000, 16000), y, tl));
    CHECK_THROWS_AS(erle(y, noise(2, 9999), tl), std::invalid_argument);
}

TEST_CASE("si-sdr examples") {
    const auto tl = default_timeline(10000);
    const auto s = noise(3, 10000);
    CHECK(*si_sdr(s, s, tl) == kScoreCapDb);
    CHECK(*si_sdr(s, s * 0.3, tl) == *si_sdr(s, s, tl));

    // orthogonal perturbation of equal power over the scored segment
    auto v = noise(4, 10000);
    double sv = 0, ss = 0;
    for (std::size_t n = 4000; n < 10000; ++n) {
        sv += s(0, n) * v(0, n);
        ss += s(0, n) * s(0, n);
    }
    for (std::size_t n = 0; n < 10000; ++n) v(0, n) -= sv / ss * s(0, n);
    double vv = 0;
    for (std::size_t n = 4000; n < 10000; ++n) vv += v(0, n) * v(0, n);
    v *= std::sqrt(ss / vv);
    CHECK(std::abs(*si_sdr(s, s + v, tl)) <= 0.1);

    // positive scaling of the estimate is invisible
    const auto e = s + v * 0.3;
    for (double g : {0.01, 0.7, 42.0}) CHECK(*si_sdr(s, e * g, tl) == doctest::Approx(*si_sdr(s, e, tl)).epsilon(1e-10));

    // only the double-talk samples count
    auto e2 = e;
    for (std::size_t n = 0; n < 4000; ++n) e2(0, n) = 1e3;
    CHECK(*si_sdr(s, e2, tl) == *si_sdr(s, e, tl));

    // widening the segment into silence cannot push a perfect estimate past the cap
    auto padded = s;
    for (std::size_t n = 0; n < 4000; ++n) padded(0, n) = 0.0;
    CHECK(*si_sdr(padded, padded, default_timeline(10000, 0.1)) <= kScoreCapDb);

    CHECK_THROWS_AS(si_sdr(Waveform(1, 10000, 16000), s, tl), std::invalid_argument);
    CHECK(!si_sdr(s, s, default_timeline(10000, 1.0)));
    CHECK(*si_sdr(s, Waveform(1, 10000, 16000), tl) == -kScoreCapDb);
}
