#pragma once

#include <cstdint>

namespace ranksched {

// Pinned RNG identifier, emitted in CSV provenance headers.
inline constexpr const char* kRngName = "xoshiro256++/splitmix64";

// SplitMix64, used to expand a user seed into generator state and to
// derive independent per-replication streams.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// Xoshiro256++ 1.0 by Blackman and Vigna.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    // Stream `stream_id` of master seed `seed`; streams are independent for
    // distinct ids because seeds pass through SplitMix64.
    Xoshiro256pp(uint64_t seed, uint64_t stream_id)
        : Xoshiro256pp(SplitMix64(seed ^ 0x6a09e667f3bcc909ULL * (stream_id + 1)).next()) {}

    uint64_t next() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit mantissa.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1], safe as a log argument.
    double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
};

}  // namespace ranksched
