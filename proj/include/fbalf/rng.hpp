#pragma once

#include <cstdint>
#include <vector>

namespace fbalf {

// splitmix64, used to derive stream seeds and as the core generator.
// std::mt19937 + std::uniform_real_distribution would tie reproducibility
// to the standard library implementation; this keeps draws bit-identical
// across toolchains.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. Streams are identified by (seed, stream, index)
/// so independent components never share draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // warm up so small seeds decorrelate
        splitmix64_next(state_);
    }

    static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64_next(s) ^ (stream * 0xd1342543de82ef95ULL);
        std::uint64_t b = splitmix64_next(a) ^ (index * 0x2545f4914f6cdd1dULL);
        return Rng(splitmix64_next(b));
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Sample k distinct elements from `pool` without replacement
    /// (partial Fisher-Yates; pool is consumed).
    template <typename T>
    std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k) {
        std::vector<T> out;
        out.reserve(k);
        for (std::size_t taken = 0; taken < k && !pool.empty(); ++taken) {
            std::size_t j = static_cast<std::size_t>(below(pool.size()));
            out.push_back(pool[j]);
            pool[j] = pool.back();
            pool.pop_back();
        }
        return out;
    }

private:
    std::uint64_t state_;
};

// Stream tags for Rng::derive.
namespace stream {
inline constexpr std::uint64_t kServerInit = 1;
inline constexpr std::uint64_t kClient = 2;
inline constexpr std::uint64_t kVisitOrder = 3;
inline constexpr std::uint64_t kSplit = 4;
inline constexpr std::uint64_t kSynthData = 5;
}  // namespace stream

}  // namespace fbalf
