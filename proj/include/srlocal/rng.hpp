#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace srlocal {

// splitmix64 step; also used to derive decorrelated stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic child seed for stream `stream` of a base seed. Chaining two
// calls gives independent (base, a, b) streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    std::uint64_t a = splitmix64(s);
    return a ^ splitmix64(s);
}

// mt19937_64 with explicit output mappings. The standard distributions are
// implementation-defined, so uniform/gaussian are mapped by hand to keep
// streams reproducible across library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(derive_seed(seed, 0)) {}

    // Uniform on [0,1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // Standard normal via Box-Muller (cosine branch only; no state cached).
    double gaussian() {
        double u1 = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace srlocal
