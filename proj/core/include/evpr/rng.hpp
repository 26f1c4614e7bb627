#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace evpr {

// Deterministic RNG wrapper. std::mt19937_64 is fully specified by the
// standard, but the std:: distributions are not, so the distribution
// transforms live here and produce identical streams on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed), seed_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0,1) with 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // good enough for shuffling/sampling; n must be > 0
    uint64_t uniform_index(uint64_t n) { return engine_() % n; }

    // standard normal via Box-Muller (pairs cached)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Knuth below 30, normal approximation above
    uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 30.0) {
            double limit = std::exp(-lambda);
            double p = 1.0;
            uint64_t k = 0;
            do {
                ++k;
                p *= uniform();
            } while (p > limit);
            return k - 1;
        }
        double v = lambda + std::sqrt(lambda) * normal();
        return v < 0.0 ? 0 : static_cast<uint64_t>(std::llround(v));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates; std::shuffle's permutation order is unspecified
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // independent stream derived from the original seed and a tag
    Rng fork(uint64_t tag) const { return Rng(splitmix(seed_ ^ splitmix(tag))); }

    static uint64_t splitmix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 engine_;
    uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace evpr
