#ifndef COREL_RNG_HPP
#define COREL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace corel {

/// Seeded random stream. Child streams are derived from the seed alone, so
/// run layouts stay reproducible no matter how many draws a sibling consumed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix(seed)) {}

    // uniform in [0,1), 53-bit resolution
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    std::uint64_t uniform_int(std::uint64_t n) { return gen_() % n; }

    double normal() {
        // Box-Muller on fresh uniforms; u1 in (0,1] so the log stays finite
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Rng child(std::uint64_t stream) const {
        return Rng(splitmix(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace corel

#endif
