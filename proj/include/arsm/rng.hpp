#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace arsm {

// Counter-style splitmix64 generator. Used everywhere randomness is needed so
// that outputs are identical across platforms and standard-library versions
// (std::uniform_* distributions are not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); returns 0 for n == 0.
    std::size_t below(std::size_t n) {
        if (n == 0) return 0;
        return static_cast<std::size_t>(next_u64() % n);
    }

    bool chance(double p) { return uniform() < p; }

    // Uniform in [-1, 1).
    double symmetric() { return uniform() * 2.0 - 1.0; }

    // Derives an independent stream key, e.g. mix(global_seed, sample_index).
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace arsm
