#ifndef AMSOD_RNG_HPP
#define AMSOD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace amsod {

/// splitmix64 finaliser; used to derive well-mixed substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of replication `index` under `master`. Depends only on the pair, so
/// replications can run in any order on any worker.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// mt19937_64 with explicit conversions, so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    /// Index drawn with probabilities given by a cumulative weight table
    /// whose last entry is the total.
    std::size_t discrete(std::span<const double> cumulative) {
        const double u = uniform() * cumulative.back();
        std::size_t i = 0;
        while (i + 1 < cumulative.size() && !(u < cumulative[i])) {
            ++i;
        }
        return i;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace amsod

#endif // AMSOD_RNG_HPP
