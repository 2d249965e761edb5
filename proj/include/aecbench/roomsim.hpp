// roomsim.hpp
// Image-method room impulse responses, convolution, and the array layouts used
// by the two-loudspeaker and multi-microphone echo cancellation setups.

#pragma once

#include "aecbench/signal.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace aecbench {

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend bool operator==(const Point3 &, const Point3 &) = default;
};

double distance(const Point3 &a, const Point3 &b);

// Shoebox room with uniform frequency-independent wall absorption derived from
// T60 through Sabine's formula.
class RoomSpec {
public:
    // Throws std::invalid_argument for non-positive dimensions or T60, or when
    // the implied absorption coefficient falls outside (0, 1].
    RoomSpec(double width, double length, double height, double t60, double speed_of_sound = 343.0);

    double width() const { return dims_[0]; }
    double length() const { return dims_[1]; }
    double height() const { return dims_[2]; }
    const std::array<double, 3> &dims() const { return dims_; }
    double t60() const { return t60_; }
    double speed_of_sound() const { return c_; }
    Point3 center() const { return {dims_[0] / 2, dims_[1] / 2, dims_[2] / 2}; }

    double volume() const;
    double surface() const;
    // Sabine: alpha = 24 ln(10) V / (c S T60).
    double absorption() const;
    // Pressure reflection coefficient sqrt(1 - alpha).
    double reflection() const;

    bool contains(const Point3 &p) const;

private:
    std::array<double, 3> dims_;
    double t60_;
    double c_;
};

struct RirOptions {
    std::size_t length = 512;
    int sample_rate = 16000;
    // Maximum reflection order; negative means unlimited, in which case only
    // images whose delay falls inside `length` taps contribute.
    int max_order = -1;
    // Hann-windowed sinc placement instead of nearest-sample rounding.
    bool fractional_delay = false;
    // Overrides the Sabine reflection coefficient (0 gives a free-field response).
    std::optional<double> reflection;
    // 100 Hz high-pass after synthesis. Same-sign images pile up at DC otherwise
    // and stretch the decay well past the configured T60.
    bool highpass = true;
};

struct Rir {
    std::vector<double> taps;
    int sample_rate = 0;
    Point3 src;
    Point3 mic;
};

// Direct-path delay in (fractional) samples.
double direct_delay(const Point3 &src, const Point3 &mic, int sample_rate, double speed_of_sound = 343.0);

Rir image_rir(const RoomSpec &room, const Point3 &src, const Point3 &mic, const RirOptions &opts = {});

// Linear convolution truncated to the input length.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);
// Every channel of `w` convolved with `rir`; output length equals input length.
Waveform convolve(const Waveform &w, const Rir &rir);

struct ArrayGeometry {
    std::vector<Point3> mics;
    std::vector<Point3> loudspeakers;
    Point3 nearend;

    Point3 mic_center() const;
};

// Height at which the two-loudspeaker layout is placed.
inline constexpr double kMcaecHeight = 1.5;

// Two microphones 10 cm apart and two loudspeakers 1.2 m apart, centred on the
// room's horizontal centre at 1.5 m (loudspeakers 0.5 m higher), near-end
// talker 1 m from the microphone pair at a random azimuth.
ArrayGeometry mcaec_geometry(const RoomSpec &room, std::mt19937_64 &rng);

// Four-microphone uniform linear array with 4 cm spacing centred in the room,
// one loudspeaker 0.6 m and the near-end talker 1 m from the array centre at
// random azimuths in the array's horizontal plane.
ArrayGeometry mmaec_geometry(const RoomSpec &room, std::mt19937_64 &rng, std::size_t mics = 4,
                             double spacing = 0.04);

// One microphone at the room centre, loudspeaker and talker as for mmaec.
ArrayGeometry single_geometry(const RoomSpec &room, std::mt19937_64 &rng);

// Throws std::invalid_argument if any point lies on or outside the room.
void check_inside(const RoomSpec &room, const ArrayGeometry &g);

// Float32 WAV of the taps plus `<path>.json` with geometry.
void save_rir(const std::filesystem::path &path, const Rir &rir);
Rir load_rir(const std::filesystem::path &path);

}  // namespace aecbench
