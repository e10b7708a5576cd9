#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace mdplab {

// Finalizer of the splitmix64 generator; also the building block for
// deriving per-worker sub-streams.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Sub-stream seed derivation: hash64(seed, index). Adding runs to a sweep or
// reordering workers never perturbs an existing stream.
inline std::uint64_t hash64(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (index + 1) * 0x9e3779b97f4a7c15ULL;
    splitmix64_next(s);
    return splitmix64_next(s);
}

// xoshiro256** 1.0 (Blackman/Vigna, public domain), seeded via splitmix64.
// The algorithm identifier below is emitted in run metadata so streams are
// reproducible across builds.
class Xoshiro256ss {
public:
    static constexpr std::string_view algorithm_id = "xoshiro256**";

    explicit Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64_next(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Draws an index from a probability vector by walking the CDF.
    int categorical(std::span<const double> probs) {
        const double u = uniform();
        double acc = 0.0;
        int last_positive = 0;
        for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
            if (probs[i] <= 0.0) continue;
            last_positive = i;
            acc += probs[i];
            if (u < acc) return i;
        }
        // u landed in the rounding slack past the final CDF step
        return last_positive;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

} // namespace mdplab
