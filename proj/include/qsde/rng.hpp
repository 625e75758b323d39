#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace qsde {

// Deterministic random stream. All variates are generated from raw
// mt19937_64 output through fixed algorithms (Box-Muller, Bailey's polar
// method), so a given seed produces the same sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Uniform on (0, 1), never exactly 0 or 1.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached so one normal costs one uniform pair every other call.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    // Student-t with nu > 0 degrees of freedom, Bailey's polar method.
    double student_t(double nu) {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double w = u * u + v * v;
            if (w > 0.0 && w < 1.0) {
                return u * std::sqrt(nu * (std::pow(w, -2.0 / nu) - 1.0) / w);
            }
        }
    }

    // Derive an independent substream. splitmix64 scrambling keeps
    // substreams decorrelated even for adjacent stream ids.
    Rng substream(std::uint64_t stream_id) const {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace qsde
