#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace cdxou {

// Deterministic random stream with the samplers the engine needs.
// All distribution code is self-contained so that a fixed seed gives
// bit-identical output across standard library implementations.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed = 0x9e3779b97f4a7c15ULL)
        : engine_(seed) {}

    // Independent substream for worker block `i` of a run seeded with `seed`.
    static RandomSource substream(std::uint64_t seed, std::uint64_t i) {
        return RandomSource(splitmix(seed + 0x632be59bd9b4e019ULL * (i + 1)));
    }

    double uniform() {
        // 53-bit mantissa in (0,1), never exactly 0 or 1.
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        // Marsaglia polar method.
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double exponential(double rate) {
        if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be positive");
        return -std::log(uniform()) / rate;
    }

    // Gamma(shape, rate) draw, Marsaglia-Tsang with the u^{1/a} boost for
    // shape < 1. Small shapes (subordinator increments over short steps)
    // routinely underflow to 0; those draws are genuinely negligible mass.
    double gamma(double shape, double rate) {
        if (shape < 0.0 || rate <= 0.0) throw std::invalid_argument("gamma: bad parameters");
        if (shape == 0.0) return 0.0;
        double boost = 1.0;
        double a = shape;
        if (a < 1.0) {
            boost = std::pow(uniform(), 1.0 / a);
            a += 1.0;
        }
        const double d = a - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return boost * d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
        }
    }

    std::uint64_t raw() { return engine_(); }

  private:
    static std::uint64_t splitmix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cdxou
