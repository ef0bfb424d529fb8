#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace bargrain {

// Seeded random source with a portable stream contract.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not, so the transforms below are
// spelled out here:
//   uniform01  = (next() >> 11) * 2^-53                in [0, 1)
//   normal     = Box-Muller on two uniforms, cosine branch only
//   gumbel     = -log(-log(u)), u = uniform01 redrawn while u == 0
//   below(n)   = rejection sampling on next() to avoid modulo bias
//   shuffle    = Fisher-Yates from the back using below(i + 1)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double normal();
    double gumbel();
    std::uint64_t below(std::uint64_t n);

    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Derives an independent stream seed from a base seed and a purpose tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace bargrain
