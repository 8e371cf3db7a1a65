#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace glkm {

/// Seeded RNG used everywhere reproducibility matters. Gaussian samples come
/// from an explicit Box-Muller transform so the stream depends only on the
/// mt19937_64 sequence, not on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    double uniform() { // [0,1)
        return (eng_() >> 11) * (1.0 / 9007199254740992.0);
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0, u2 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    std::uint64_t next_u64() { return eng_(); }
    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return eng_() % n; }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace glkm
