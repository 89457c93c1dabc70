#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace voroblocks {

/// Deterministic random source. The engine is std::mt19937_64 (a fixed,
/// standardized algorithm) and every derived draw below is an explicit
/// function of the raw 64-bit stream, so sequences reproduce bit for bit
/// across platforms and standard-library versions. std::*_distribution is
/// deliberately not used anywhere: its algorithms are implementation-defined
/// and would break golden fixtures.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t raw() { return rng_(); }

    /// Uniform in [0, 1): the top 53 bits of one raw draw.
    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Poisson draw by sequential inversion (product-of-uniforms form), applied
    /// to chunks of mean <= 30 so the exp(-mean) threshold never underflows.
    /// A Poisson(m1 + m2) variate is the sum of independent Poisson(m1) and
    /// Poisson(m2) variates, so chunking preserves the distribution.
    std::int64_t poisson(double mean) {
        std::int64_t count = 0;
        while (mean > 30.0) {
            count += poisson_small(30.0);
            mean -= 30.0;
        }
        if (mean > 0.0) count += poisson_small(mean);
        return count;
    }

    /// Standard normal via Box-Muller on two uniforms; the second variate of
    /// each pair is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::int64_t poisson_small(double mean) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace voroblocks
