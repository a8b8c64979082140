#pragma once

#include <cmath>
#include <cstdint>

namespace pairwalk {

// Counter-based splittable generator (splitmix64 core). Each trajectory owns
// an independent stream keyed by (seed, stream index), so parallel runs are
// reproducible regardless of scheduling. All variate code is self-contained;
// std:: distributions are avoided because their output is not portable.
class Rng {
  public:
    explicit Rng(std::uint64_t state) : state_(state) {}

    static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
        // mix the pair (seed, stream) into a well-spread initial state
        std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        z = mix(z) + 0x632be59bd9b4e019ULL;
        return Rng(mix(z));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // uniform in (0,1]; never returns 0 so -log is safe
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    bool bernoulli(double p) { return uniform() <= p; }

    double normal() {
        // Box-Muller, cached second variate
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925287 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Gamma(shape n, rate) for integer shape; exact in law.
    // Small shapes sum exponentials, large shapes use Marsaglia-Tsang.
    double gamma_int(int n, double rate) {
        if (n <= 0) return 0.0;
        if (n <= 8) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += std::log(uniform());
            return -acc / rate;
        }
        const double d = n - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
                return d * v / rate;
        }
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace pairwalk
