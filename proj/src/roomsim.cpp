// roomsim.cpp

#include "aecbench/roomsim.hpp"

#include "aecbench/fft.hpp"
#include "aecbench/wav.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

namespace aecbench {

double distance(const Point3 &a, const Point3 &b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

RoomSpec::RoomSpec(double width, double length, double height, double t60, double speed_of_sound)
    : dims_{width, length, height}, t60_(t60), c_(speed_of_sound) {
    if (!(width > 0 && length > 0 && height > 0)) throw std::invalid_argument("RoomSpec: dimensions must be positive");
    if (!(t60 > 0)) throw std::invalid_argument("RoomSpec: t60 must be positive");
    if (!(speed_of_sound > 0)) throw std::invalid_argument("RoomSpec: speed of sound must be positive");
    const double alpha = absorption();
    if (!(alpha > 0 && alpha <= 1))
        throw std::invalid_argument("RoomSpec: t60 " + std::to_string(t60) +
                                    " s is unrealizable for this room (Sabine absorption " + std::to_string(alpha) +
                                    ")");
}

double RoomSpec::volume() const { return dims_[0] * dims_[1] * dims_[2]; }

double RoomSpec::surface() const {
    return 2.0 * (dims_[0] * dims_[1] + dims_[0] * dims_[2] + dims_[1] * dims_[2]);
}

double RoomSpec::absorption() const { return 24.0 * std::log(10.0) * volume() / (c_ * surface() * t60_); }

double RoomSpec::reflection() const { return std::sqrt(1.0 - absorption()); }

bool RoomSpec::contains(const Point3 &p) const {
    return p.x > 0 && p.x < dims_[0] && p.y > 0 && p.y < dims_[1] && p.z > 0 && p.z < dims_[2];
}

double direct_delay(const Point3 &src, const Point3 &mic, int sample_rate, double speed_of_sound) {
    return distance(src, mic) / speed_of_sound * sample_rate;
}

Rir image_rir(const RoomSpec &room, const Point3 &src, const Point3 &mic, const RirOptions &opts) {
    if (!room.contains(src) || !room.contains(mic)) throw std::invalid_argument("image_rir: source or mic outside room");
    if (src == mic) throw std::invalid_argument("image_rir: source and mic coincide");
    if (opts.sample_rate <= 0 || opts.length == 0) throw std::invalid_argument("image_rir: invalid length or rate");
    const double c = room.speed_of_sound();
    const double fs = opts.sample_rate;
    if (direct_delay(src, mic, opts.sample_rate, c) >= static_cast<double>(opts.length))
        throw std::invalid_argument("image_rir: length shorter than the direct-path delay");

    const double beta = opts.reflection.value_or(room.reflection());
    const auto &L = room.dims();
    const std::array<double, 3> s{src.x, src.y, src.z};
    const std::array<double, 3> r{mic.x, mic.y, mic.z};
    const double max_dist = static_cast<double>(opts.length) / fs * c;
    std::array<int, 3> range{};
    for (int a = 0; a < 3; ++a) range[a] = static_cast<int>(std::ceil(max_dist / (2.0 * L[a]))) + 1;

    // Hann-windowed sinc support, as in common image-method generators.
    const int tw = 2 * static_cast<int>(std::lround(0.004 * fs));

    Rir rir{std::vector<double>(opts.length, 0.0), opts.sample_rate, src, mic};
    auto &h = rir.taps;
    const auto len = static_cast<long>(opts.length);

    for (int mx = -range[0]; mx <= range[0]; ++mx)
        for (int my = -range[1]; my <= range[1]; ++my)
            for (int mz = -range[2]; mz <= range[2]; ++mz)
                for (int q = 0; q <= 1; ++q)
                    for (int j = 0; j <= 1; ++j)
                        for (int k = 0; k <= 1; ++k) {
                            const std::array<int, 3> lattice{mx, my, mz};
                            const std::array<int, 3> mirror{q, j, k};
                            std::array<double, 3> d{};
                            int order = 0, bounces = 0;
                            for (int a = 0; a < 3; ++a) {
                                d[a] = (1 - 2 * mirror[a]) * s[a] - r[a] + 2.0 * lattice[a] * L[a];
                                order += std::abs(2 * lattice[a] - mirror[a]);
                                bounces += std::abs(lattice[a] - mirror[a]) + std::abs(lattice[a]);
                            }
                            if (opts.max_order >= 0 && order > opts.max_order) continue;
                            const double dist = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
                            const double fdist = dist / c * fs;
                            if (fdist >= static_cast<double>(len)) continue;
                            const double gain = (bounces == 0 ? 1.0 : std::pow(beta, bounces)) /
                                                (4.0 * std::numbers::pi * dist);
                            if (gain == 0.0) continue;
                            if (!opts.fractional_delay) {
                                const long n = std::lround(fdist);
                                if (n < len) h[n] += gain;
                                continue;
                            }
                            const long start = static_cast<long>(std::floor(fdist)) - tw / 2 + 1;
                            const double frac = fdist - std::floor(fdist);
                            for (int n = 0; n < tw; ++n) {
                                const long idx = start + n;
                                if (idx < 0 || idx >= len) continue;
                                const double t = (n - tw / 2 + 1) - frac;
                                const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
                                h[idx] += gain * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * t / tw)) * sinc;
                            }
                        }
    if (opts.highpass) {
        // Allen and Berkley's second-order section: zeros at DC, poles near 100 Hz.
        const double w = 2.0 * std::numbers::pi * 100.0 / fs;
        const double r1 = std::exp(-w), b1 = 2.0 * r1 * std::cos(w), b2 = -r1 * r1, a1 = -(1.0 + r1);
        double y0 = 0, y1 = 0, y2 = 0;
        for (auto &v : h) {
            y2 = y1;
            y1 = y0;
            y0 = b1 * y1 + b2 * y2 + v;
            v = y0 + a1 * y1 + r1 * y2;
        }
    }
    return rir;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
    std::vector<double> y(x.size(), 0.0);
    if (x.empty() || h.empty()) return y;
    // Output before the first nonzero input sample is exactly zero; keep it so.
    const auto first = std::find_if(x.begin(), x.end(), [](double v) { return v != 0.0; });
    if (first == x.end()) return y;
    if (first != x.begin()) {
        const auto lead = static_cast<std::size_t>(first - x.begin());
        const auto tail = convolve(x.subspan(lead), h);
        std::copy(tail.begin(), tail.end(), y.begin() + static_cast<std::ptrdiff_t>(lead));
        return y;
    }
    const std::size_t k = std::min(h.size(), x.size());
    std::vector<std::size_t> nz;
    for (std::size_t m = 0; m < k && nz.size() <= 32; ++m)
        if (h[m] != 0.0) nz.push_back(m);
    // Sparse kernels (free field, pure delays) stay exact in direct form.
    if (nz.size() <= 32) {
        for (std::size_t m : nz)
            for (std::size_t n = m; n < x.size(); ++n) y[n] += h[m] * x[n - m];
        return y;
    }
    // Short inputs: direct form is cheaper than the transform.
    if (x.size() * k < 1u << 16) {
        for (std::size_t n = 0; n < x.size(); ++n) {
            double acc = 0.0;
            for (std::size_t m = 0; m < k && m <= n; ++m) acc += h[m] * x[n - m];
            y[n] = acc;
        }
        return y;
    }
    const std::size_t n_fft = next_fast_size(x.size() + k - 1);
    RealFft fft(n_fft);
    std::vector<std::complex<double>> X(fft.bins()), H(fft.bins());
    fft.forward(x, X);
    fft.forward(h.first(k), H);
    for (std::size_t i = 0; i < X.size(); ++i) X[i] *= H[i];
    std::vector<double> full(n_fft);
    fft.inverse(X, full);
    std::copy_n(full.begin(), x.size(), y.begin());
    return y;
}

Waveform convolve(const Waveform &w, const Rir &rir) {
    if (w.sample_rate() != rir.sample_rate)
        throw std::invalid_argument("convolve: sample rate mismatch (" + std::to_string(w.sample_rate()) + " vs " +
                                    std::to_string(rir.sample_rate) + ")");
    Waveform out(w.channels(), w.length(), w.sample_rate());
    for (std::size_t c = 0; c < w.channels(); ++c) out.channel(c) = convolve(w.channel(c), rir.taps);
    return out;
}

Point3 ArrayGeometry::mic_center() const {
    Point3 p;
    for (const auto &m : mics) {
        p.x += m.x;
        p.y += m.y;
        p.z += m.z;
    }
    const double n = static_cast<double>(mics.size());
    return {p.x / n, p.y / n, p.z / n};
}

void check_inside(const RoomSpec &room, const ArrayGeometry &g) {
    auto check = [&](const Point3 &p, const char *what) {
        if (!room.contains(p)) throw std::invalid_argument(std::string("geometry: ") + what + " lies outside the room");
    };
    for (const auto &m : g.mics) check(m, "microphone");
    for (const auto &l : g.loudspeakers) check(l, "loudspeaker");
    check(g.nearend, "near-end talker");
}

namespace {

Point3 on_circle(const Point3 &centre, double radius, double azimuth) {
    return {centre.x + radius * std::cos(azimuth), centre.y + radius * std::sin(azimuth), centre.z};
}

double random_azimuth(std::mt19937_64 &rng) {
    return std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
}

}  // namespace

ArrayGeometry mcaec_geometry(const RoomSpec &room, std::mt19937_64 &rng) {
    const double x = room.width() / 2, y = room.length() / 2, z = kMcaecHeight;
    ArrayGeometry g;
    g.mics = {{x, y + 0.05, z}, {x, y - 0.05, z}};
    g.loudspeakers = {{x, y + 0.6, z + 0.5}, {x, y - 0.6, z + 0.5}};
    g.nearend = on_circle(g.mic_center(), 1.0, random_azimuth(rng));
    check_inside(room, g);
    return g;
}

ArrayGeometry mmaec_geometry(const RoomSpec &room, std::mt19937_64 &rng, std::size_t mics, double spacing) {
    if (mics == 0) throw std::invalid_argument("mmaec_geometry: need at least one microphone");
    const Point3 centre = room.center();
    ArrayGeometry g;
    for (std::size_t m = 0; m < mics; ++m) {
        const double offset = (static_cast<double>(m) - (mics - 1) / 2.0) * spacing;
        g.mics.push_back({centre.x + offset, centre.y, centre.z});
    }
    g.loudspeakers = {on_circle(centre, 0.6, random_azimuth(rng))};
    g.nearend = on_circle(centre, 1.0, random_azimuth(rng));
    check_inside(room, g);
    return g;
}

ArrayGeometry single_geometry(const RoomSpec &room, std::mt19937_64 &rng) { return mmaec_geometry(room, rng, 1); }

void save_rir(const std::filesystem::path &path, const Rir &rir) {
    write_wav(path, Waveform::mono(rir.taps, rir.sample_rate), WavFormat::kFloat32);
    nlohmann::json meta = {{"sample_rate", rir.sample_rate},
                           {"length", rir.taps.size()},
                           {"src", {rir.src.x, rir.src.y, rir.src.z}},
                           {"mic", {rir.mic.x, rir.mic.y, rir.mic.z}}};
    std::ofstream(path.string() + ".json") << meta.dump(2) << '\n';
}

Rir load_rir(const std::filesystem::path &path) {
    const Waveform w = read_wav(path);
    std::ifstream in(path.string() + ".json");
    if (!in) throw std::runtime_error("load_rir: missing sidecar " + path.string() + ".json");
    const auto meta = nlohmann::json::parse(in);
    auto point = [](const nlohmann::json &j) { return Point3{j.at(0), j.at(1), j.at(2)}; };
    return Rir{w.channel(0), w.sample_rate(), point(meta.at("src")), point(meta.at("mic"))};
}

}  // namespace aecbench
