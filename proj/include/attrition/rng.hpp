#ifndef ATTRITION_RNG_HPP
#define ATTRITION_RNG_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "attrition/rational.hpp"

namespace attrition {

// Counter-based splittable generator (splitmix64 output function). A Stream is
// identified by (seed, substream); distinct substreams of the same seed are
// independent for simulation purposes, so episodes can run in parallel and
// still reproduce bit-for-bit in any execution order.
class Stream {
  public:
    explicit Stream(std::uint64_t seed, std::uint64_t substream = 0)
        : state_(mix(seed + 0x9E3779B97F4A7C15ULL * (substream + 1)) ^ mix(substream)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform draw in [0,1) with 53 random bits; for diagnostics only.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Derives an independent child stream, advancing this one by one draw.
    Stream fork() { return Stream(next_u64(), 0x5EEDF0F0D15EA5E5ULL); }

    /// Bernoulli(p) by exact comparison of a 64-bit uniform against p, so the
    /// realized bias is below 2^-64 and independent of the float rounding of p.
    bool bernoulli(const Rat& p) {
        if (p <= 0) { next_u64(); return false; }
        if (p >= 1) { next_u64(); return true; }
        return below(next_u64(), p);
    }

    /// Draws an index from a rational weight vector (weights must sum to 1).
    std::size_t pick(const std::vector<Rat>& weights) {
        if (weights.empty()) throw std::invalid_argument("pick: empty weight vector");
        const std::uint64_t u = next_u64();
        Rat cum = 0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            cum += weights[i];
            if (below(u, cum)) return i;
        }
        return weights.size() - 1;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // u/2^64 < r, computed in integers.
    static bool below(std::uint64_t u, const Rat& r) {
        static_assert(sizeof(unsigned long) == 8, "64-bit unsigned long expected");
        mpz_class lhs = mpz_class(static_cast<unsigned long>(u)) * r.get_den();
        mpz_class rhs = r.get_num() << 64;
        return lhs < rhs;
    }

    std::uint64_t state_;
};

}  // namespace attrition

#endif
