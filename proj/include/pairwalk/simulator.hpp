#pragma once

#include "pairwalk/model.hpp"
#include "pairwalk/rng.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace pairwalk {

// Event-time record of one seeded run of the (u, w) chain. states[i] is the
// state entered at event_times[i]; the initial state holds on [0, t0).
struct Trajectory {
    std::uint64_t seed = 0;
    PairState initial{};
    std::vector<double> event_times;
    std::vector<PairState> states;
    double t_end = 0.0;

    PairState state_at(double t) const;
};

// Exact event-driven simulation: holding times are exponential with the
// per-state total rate, the distance move is chosen by the up/down rates and
// the sum direction independently with probability p. Deterministic given
// the seed.
Trajectory simulate_pair(const ModelParams& params, PairState initial, double t_end,
                         std::uint64_t seed);

// Occupation field on a periodic ring evolving under the reference dynamics
// of a preset (right rate alpha*p*n_i*(1+theta*n_{i+1}), left mirrored).
struct LatticeField {
    int sites = 0;
    std::vector<int> occupations;
    ProcessPreset preset;
    double time = 0.0;

    long long total_particles() const;
};

struct FieldRunResult {
    LatticeField field;
    std::vector<std::vector<int>> snapshots; // one per requested time
};

FieldRunResult simulate_field(const LatticeField& initial, double t_end, std::uint64_t seed,
                              std::span<const double> snapshot_times = {}, double p = 0.5);

// Lattice embedding of one-sided sticky Brownian motion: the distance chain
// with theta_eps = sqrt(2) gamma / eps and alpha = 1, started from
// w = round(sqrt(2) z / eps), sampled as W_eps(t) = eps w(t/eps^2) / sqrt(2).
std::vector<double> simulate_sticky_bm(double z, double gamma, double eps, double t_end,
                                       std::uint64_t seed, std::span<const double> sample_times);

// Monte Carlo mean of e^{-i(kappa (u(t)-u(0)) + m w(t))} over trajectories,
// with jackknife standard errors per component. Throws InsufficientSamples
// below 100 paths.
struct CharFunctionEstimate {
    std::complex<double> value;
    double se_re = 0.0;
    double se_im = 0.0;
};

CharFunctionEstimate estimate_char_function(std::span<const Trajectory> trajectories,
                                            double kappa, double m, double t);

struct MeanSe {
    double value = 0.0;
    double se = 0.0;
};

// P(w(t) = 0) of the distance chain at each grid time, from `paths`
// independent trajectories (exact event-driven distance-only simulation).
// Deterministic for fixed seed independent of thread count.
std::vector<MeanSe> occupation_probability_mc(const ModelParams& params, long long w0,
                                              std::span<const double> times, int paths,
                                              std::uint64_t seed, int threads = 0);

// int_0^t_end e^{-lambda t} 1{W_eps(t) = 0} dt estimated per path on a
// sqrt(t)-uniform grid of grid_points samples, averaged over paths, one
// result per lambda; an analytic e^{-lambda t_end}/lambda tail term is added
// assuming the occupation freezes at its last grid value. The chain away
// from the origin is advanced by exact embedded-walk blocks with
// gamma-distributed elapsed times, which is the same law as step-by-step
// simulation.
std::vector<MeanSe> sticky_occupation_laplace_mc(double z, double gamma, double eps,
                                                 std::span<const double> lambdas, double t_end,
                                                 int grid_points, int paths, std::uint64_t seed,
                                                 int threads = 0);

} // namespace pairwalk
