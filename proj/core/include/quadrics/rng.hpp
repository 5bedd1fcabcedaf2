#pragma once

#include <cmath>
#include <cstdint>

#include "quadrics/types.hpp"

namespace quadrics {

/// splitmix64; used to derive independent sub-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Small deterministic generator (xoshiro-free, splitmix-based) with the few
/// distributions this project needs. Identical output on any platform, which keeps
/// seeded detections and sweeps byte-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x853c49e6748fea9bull) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// unbiased-enough integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// standard normal via Box-Muller (stateless pairing)
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Vec3 normal3() { return Vec3(normal(), normal(), normal()); }

    Vec3 unit_vector() {
        Vec3 v = normal3();
        while (v.norm() < 1e-9) v = normal3();
        return v.normalized();
    }

    /// uniform inside the unit ball
    Vec3 in_unit_ball() { return std::cbrt(uniform()) * unit_vector(); }

private:
    std::uint64_t state_;
};

}  // namespace quadrics
