#pragma once

#include <cmath>
#include <cstdint>

namespace brillouin {

// splitmix64 step (Steele/Lea/Vigna). Also used as the documented mixer for
// deriving independent per-work-unit seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for work unit (a, b) under a base seed. Each index is folded in
// through a full splitmix64 round, so neighbouring units get decorrelated
// streams: seed -> mix -> xor a -> mix -> xor b -> mix.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = base;
    s = splitmix64_next(s) ^ (a + 0x9e3779b97f4a7c15ULL);
    s = splitmix64_next(s) ^ (b + 0xbf58476d1ce4e5b9ULL);
    return splitmix64_next(s);
}

// xoshiro256++ (Blackman & Vigna, 2019). State seeded by splitmix64 per the
// authors' recommendation.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed = 1) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53 random bits
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

// Standard-normal deviates via the Marsaglia polar method. Avoids trig so a
// fixed seed reproduces bit-identically wherever sqrt/log are correctly
// rounded.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * rng_.uniform01() - 1.0;
            v = 2.0 * rng_.uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        have_spare_ = true;
        return u * factor;
    }

private:
    Xoshiro256pp rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace brillouin
