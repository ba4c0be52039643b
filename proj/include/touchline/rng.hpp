#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace touchline {

// mt19937_64 with hand-rolled distributions so that streams are identical
// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(bits() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive on both ends
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(bits() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one draw per call (the spare is discarded to keep each
    // call's consumption of the engine fixed).
    double normal(double mean = 0.0, double sd = 1.0) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * M_PI * u2);
    }

    // Derive an independent child stream; used for per-scene generation so
    // scene i does not depend on how many draws scene i-1 consumed.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 engine_;
};

} // namespace touchline
