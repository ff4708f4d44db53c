#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace anderson {

/// SplitMix64 step; used to hash seeds into stream identifiers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Documented stream splitting: stream_id = hash(master_seed, task_index).
inline std::uint64_t stream_id(std::uint64_t master_seed, std::uint64_t task_index) {
    std::uint64_t s = master_seed;
    std::uint64_t a = splitmix64(s);
    s ^= task_index + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    return a ^ splitmix64(s);
}

/// Deterministic random stream: mt19937_64 plus an explicit Box-Muller
/// transform, so draws are bit-reproducible on one platform for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng stream(std::uint64_t master_seed, std::uint64_t task_index) {
        return Rng(stream_id(master_seed, task_index));
    }

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace anderson
