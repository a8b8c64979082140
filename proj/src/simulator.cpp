#include "pairwalk/simulator.hpp"
#include "pairwalk/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <string>
#include <thread>

namespace pairwalk {

namespace {
constexpr double kSqrt2 = 1.414213562373095048801688724209698;

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// fixed-size path blocks so results are identical for any thread count
template <typename Fn>
void run_blocks(int paths, int threads, int block, Fn&& per_block) {
    const int n_blocks = (paths + block - 1) / block;
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int b = next.fetch_add(1);
            if (b >= n_blocks) return;
            const int lo = b * block;
            const int hi = std::min(paths, lo + block);
            per_block(b, lo, hi);
        }
    };
    const int n = std::min(resolve_threads(threads), n_blocks);
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace

PairState Trajectory::state_at(double t) const {
    if (event_times.empty() || t < event_times.front()) return initial;
    const auto it = std::upper_bound(event_times.begin(), event_times.end(), t);
    const std::size_t idx = static_cast<std::size_t>(it - event_times.begin());
    return states[idx - 1];
}

Trajectory simulate_pair(const ModelParams& params, PairState initial, double t_end,
                         std::uint64_t seed) {
    if (initial.w < 0) throw DomainError("simulate_pair: initial w must be >= 0");
    if (!(t_end > 0.0)) throw DomainError("simulate_pair: t_end must be > 0");

    Trajectory tr;
    tr.seed = seed;
    tr.initial = initial;
    tr.t_end = t_end;

    Rng rng = Rng::for_stream(seed, 0);
    PairState s = initial;
    double t = 0.0;
    const long long parity = (initial.u + initial.w) & 1LL;
    for (;;) {
        const EffectiveRates er = effective_rates(params, s.w);
        t += rng.exponential(er.sum_total);
        if (t >= t_end) break;
        const bool up = rng.uniform() * er.sum_total <= er.dist_up;
        s.w += up ? 1 : -1;
        s.u += rng.bernoulli(params.p) ? 1 : -1;
        assert(s.w >= 0);
        assert(((s.u + s.w) & 1LL) == parity);
        (void)parity;
        tr.event_times.push_back(t);
        tr.states.push_back(s);
    }
    return tr;
}

long long LatticeField::total_particles() const {
    long long n = 0;
    for (int v : occupations) n += v;
    return n;
}

FieldRunResult simulate_field(const LatticeField& initial, double t_end, std::uint64_t seed,
                              std::span<const double> snapshot_times, double p) {
    const int L = initial.sites;
    if (L < 4) throw DomainError("simulate_field: ring must have at least 4 sites");
    if (static_cast<int>(initial.occupations.size()) != L)
        throw DomainError("simulate_field: occupation vector size mismatch");

    const double alpha = initial.preset.alpha;
    const double theta = initial.preset.theta;
    const bool exclusion = initial.preset.kind == ProcessKind::SEP;
    const int cap = exclusion ? static_cast<int>(initial.preset.parameter) : 0;
    const double q = 1.0 - p;

    FieldRunResult out;
    out.field = initial;
    auto& eta = out.field.occupations;

    // directed bond rates; interaction factors below 1e-12*alpha are clamped
    // to zero so SEP capacity is exact despite 1/j rounding
    auto right_rate = [&](int i) {
        const int j = (i + 1) % L;
        double f = 1.0 + theta * eta[static_cast<std::size_t>(j)];
        if (f < 1e-12) f = 0.0;
        return alpha * p * eta[static_cast<std::size_t>(i)] * f;
    };
    auto left_rate = [&](int i) { // particle hops i+1 -> i
        const int j = (i + 1) % L;
        double f = 1.0 + theta * eta[static_cast<std::size_t>(i)];
        if (f < 1e-12) f = 0.0;
        return alpha * q * eta[static_cast<std::size_t>(j)] * f;
    };

    std::vector<double> rates(static_cast<std::size_t>(2 * L));
    auto refresh_bond = [&](int i) {
        rates[static_cast<std::size_t>(2 * i)] = right_rate(i);
        rates[static_cast<std::size_t>(2 * i + 1)] = left_rate(i);
    };
    for (int i = 0; i < L; ++i) refresh_bond(i);
    double total = 0.0;
    for (double r : rates) total += r;

    Rng rng = Rng::for_stream(seed, 0);
    double t = out.field.time;
    std::size_t snap_idx = 0;
    auto record_until = [&](double now) {
        while (snap_idx < snapshot_times.size() && snapshot_times[snap_idx] <= now) {
            out.snapshots.push_back(eta);
            ++snap_idx;
        }
    };

    while (true) {
        if (total <= 0.0) { // frozen configuration
            record_until(t_end);
            t = t_end;
            break;
        }
        const double dt = rng.exponential(total);
        if (t + dt >= t_end) {
            record_until(t_end);
            t = t_end;
            break;
        }
        t += dt;
        record_until(t);

        double target = rng.uniform() * total;
        int idx = 0;
        for (; idx < 2 * L - 1; ++idx) {
            target -= rates[static_cast<std::size_t>(idx)];
            if (target <= 0.0) break;
        }
        const int bond = idx / 2;
        const bool to_right = (idx % 2) == 0;
        const int from = to_right ? bond : (bond + 1) % L;
        const int to = to_right ? (bond + 1) % L : bond;
        if (eta[static_cast<std::size_t>(from)] <= 0)
            throw CapacityViolation("simulate_field: jump chosen from an empty site");
        if (exclusion && eta[static_cast<std::size_t>(to)] >= cap)
            throw CapacityViolation("simulate_field: exclusion capacity breached");
        --eta[static_cast<std::size_t>(from)];
        ++eta[static_cast<std::size_t>(to)];

        // occupations changed at `from` and `to`; refresh the bonds touching them
        for (int site : {from, to}) {
            const int prev = (site - 1 + L) % L;
            refresh_bond(prev);
            refresh_bond(site);
        }
        total = 0.0;
        for (double r : rates) total += r; // rings are small; rescan each event
    }
    out.field.time = t;
    return out;
}

std::vector<double> simulate_sticky_bm(double z, double gamma, double eps, double t_end,
                                       std::uint64_t seed, std::span<const double> sample_times) {
    if (!(eps > 0.0) || eps > 0.1)
        throw DomainError("simulate_sticky_bm: eps must lie in (0, 0.1]");
    if (z < 0.0 || gamma < 0.0)
        throw DomainError("simulate_sticky_bm: z and gamma must be >= 0");

    const double theta = kSqrt2 * gamma / eps;
    const ModelParams params{1.0, 0.5, theta};
    long long w = std::llround(kSqrt2 * z / eps);

    for (double s : sample_times)
        if (s < 0.0 || s > t_end)
            throw DomainError("simulate_sticky_bm: sample times must lie in [0, t_end]");

    Rng rng = Rng::for_stream(seed, 0);
    std::vector<double> path(sample_times.size(), 0.0);
    std::size_t idx = 0;
    double t = 0.0; // microscopic time; macro t = eps^2 * micro
    while (idx < sample_times.size()) {
        const EffectiveRates er = effective_rates(params, w);
        const double dt = rng.exponential(er.sum_total);
        // the state w holds on [t, t+dt); record every sample time it covers
        while (idx < sample_times.size() && t + dt > sample_times[idx] / (eps * eps)) {
            path[idx] = eps * static_cast<double>(w) / kSqrt2;
            ++idx;
        }
        t += dt;
        const bool up = rng.uniform() * er.sum_total <= er.dist_up;
        w += up ? 1 : -1;
    }
    return path;
}

CharFunctionEstimate estimate_char_function(std::span<const Trajectory> trajectories,
                                            double kappa, double m, double t) {
    const std::size_t n = trajectories.size();
    if (n < 100)
        throw InsufficientSamples("estimate_char_function: need at least 100 paths, got " +
                                  std::to_string(n));
    std::vector<std::complex<double>> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Trajectory& tr = trajectories[i];
        if (t > tr.t_end)
            throw DomainError("estimate_char_function: t beyond simulated horizon");
        const PairState s = tr.state_at(t);
        const double arg = kappa * static_cast<double>(s.u - tr.initial.u) +
                           m * static_cast<double>(s.w);
        vals[i] = std::polar(1.0, -arg);
    }
    std::complex<double> mean = 0.0;
    for (const auto& v : vals) mean += v;
    mean /= static_cast<double>(n);

    // jackknife over paths; for the sample mean this reduces to the classic
    // sqrt(sum (x_i - xbar)^2 / (n (n-1))) in each component
    double sr = 0.0, si = 0.0;
    for (const auto& v : vals) {
        sr += (v.real() - mean.real()) * (v.real() - mean.real());
        si += (v.imag() - mean.imag()) * (v.imag() - mean.imag());
    }
    const double norm = static_cast<double>(n) * static_cast<double>(n - 1);
    return {mean, std::sqrt(sr / norm), std::sqrt(si / norm)};
}

std::vector<MeanSe> occupation_probability_mc(const ModelParams& params, long long w0,
                                              std::span<const double> times, int paths,
                                              std::uint64_t seed, int threads) {
    if (w0 < 0) throw DomainError("occupation_probability_mc: w0 must be >= 0");
    const std::size_t nt = times.size();
    const int block = 4096;
    const int n_blocks = (paths + block - 1) / block;
    std::vector<std::vector<long long>> hits(static_cast<std::size_t>(n_blocks),
                                             std::vector<long long>(nt, 0));

    run_blocks(paths, threads, block, [&](int b, int lo, int hi) {
        auto& h = hits[static_cast<std::size_t>(b)];
        for (int path = lo; path < hi; ++path) {
            Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(path));
            long long w = w0;
            double t = 0.0;
            std::size_t idx = 0;
            while (idx < nt) {
                const EffectiveRates er = effective_rates(params, w);
                const double dt = rng.exponential(er.sum_total);
                while (idx < nt && t + dt >= times[idx]) {
                    if (w == 0) ++h[idx];
                    ++idx;
                }
                t += dt;
                if (idx >= nt) break;
                const bool up = rng.uniform() * er.sum_total <= er.dist_up;
                w += up ? 1 : -1;
            }
        }
    });

    std::vector<MeanSe> out(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        long long total = 0;
        for (const auto& h : hits) total += h[j];
        const double phat = static_cast<double>(total) / paths;
        out[j] = {phat, std::sqrt(std::max(phat * (1.0 - phat), 0.0) / paths)};
    }
    return out;
}

std::vector<MeanSe> sticky_occupation_laplace_mc(double z, double gamma, double eps,
                                                 std::span<const double> lambdas, double t_end,
                                                 int grid_points, int paths, std::uint64_t seed,
                                                 int threads) {
    if (!(eps > 0.0) || eps > 0.1)
        throw DomainError("sticky_occupation_laplace_mc: eps must lie in (0, 0.1]");
    if (grid_points < 8) throw DomainError("sticky_occupation_laplace_mc: grid too small");

    const double theta = kSqrt2 * gamma / eps;
    const long long w_start = std::llround(kSqrt2 * z / eps);
    const double micro_end = t_end / (eps * eps);
    const std::size_t nl = lambdas.size();
    const std::size_t ng = static_cast<std::size_t>(grid_points);

    // sqrt(t)-uniform grid resolves the steep early decay at z = 0; the grid
    // lives in microscopic time, coefficients below are in macroscopic time
    std::vector<double> micro_grid(ng);
    for (std::size_t j = 0; j < ng; ++j) {
        const double s = static_cast<double>(j) / static_cast<double>(ng - 1);
        micro_grid[j] = micro_end * s * s;
    }

    // trapezoid weights for int_0^T e^{-lambda t} P(t) dt on the macro grid,
    // plus a frozen-tail term P(T) e^{-lambda T}/lambda folded into the last
    // coefficient
    std::vector<std::vector<double>> coeff(nl, std::vector<double>(ng, 0.0));
    for (std::size_t l = 0; l < nl; ++l) {
        const double lam = lambdas[l];
        for (std::size_t j = 0; j + 1 < ng; ++j) {
            const double t0 = micro_grid[j] * eps * eps;
            const double t1 = micro_grid[j + 1] * eps * eps;
            const double h = 0.5 * (t1 - t0);
            coeff[l][j] += h * std::exp(-lam * t0);
            coeff[l][j + 1] += h * std::exp(-lam * t1);
        }
        coeff[l][ng - 1] += std::exp(-lam * t_end) / lam;
    }

    const double p_exit_down = (1.0 + theta) / (2.0 + theta);
    const int block = 1024;
    const int n_blocks = (paths + block - 1) / block;
    struct BlockAcc {
        std::vector<double> sum, sum_sq;
    };
    std::vector<BlockAcc> acc(static_cast<std::size_t>(n_blocks));

    run_blocks(paths, threads, block, [&](int b, int lo, int hi) {
        BlockAcc& a = acc[static_cast<std::size_t>(b)];
        a.sum.assign(nl, 0.0);
        a.sum_sq.assign(nl, 0.0);
        std::vector<char> at_zero(ng, 0);
        for (int path = lo; path < hi; ++path) {
            Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(path));
            std::fill(at_zero.begin(), at_zero.end(), 0);
            long long w = w_start;
            double t = 0.0;
            std::size_t gi = 0;
            auto advance = [&](double to, bool zero) {
                while (gi < ng && micro_grid[gi] < to) {
                    at_zero[gi] = zero ? 1 : 0;
                    ++gi;
                }
            };
            while (gi < ng && t <= micro_end) {
                if (w == 0) {
                    const double t1 = t + rng.exponential(2.0);
                    advance(t1, true);
                    t = t1;
                    w = 1;
                } else if (w == 1) {
                    const double t1 = t + rng.exponential(2.0 + theta);
                    advance(t1, false);
                    t = t1;
                    w = rng.bernoulli(p_exit_down) ? 0 : 2;
                } else {
                    // free symmetric excursion above 1: exact embedded walk,
                    // elapsed time drawn as Gamma(steps, 2) per block
                    int steps = 0;
                    std::uint64_t bits = 0;
                    int bits_left = 0;
                    while (w > 1 && t <= micro_end) {
                        if (bits_left == 0) {
                            bits = rng.next_u64();
                            bits_left = 64;
                        }
                        w += (bits & 1) ? 1 : -1;
                        bits >>= 1;
                        --bits_left;
                        if (++steps == 256) {
                            const double t1 = t + rng.gamma_int(steps, 2.0);
                            advance(t1, false);
                            t = t1;
                            steps = 0;
                        }
                    }
                    if (steps > 0) {
                        const double t1 = t + rng.gamma_int(steps, 2.0);
                        advance(t1, false);
                        t = t1;
                    }
                }
            }
            for (std::size_t l = 0; l < nl; ++l) {
                double v = 0.0;
                for (std::size_t j = 0; j < ng; ++j)
                    if (at_zero[j]) v += coeff[l][j];
                a.sum[l] += v;
                a.sum_sq[l] += v * v;
            }
        }
    });

    std::vector<MeanSe> out(nl);
    for (std::size_t l = 0; l < nl; ++l) {
        double s = 0.0, s2 = 0.0;
        for (const auto& a : acc) {
            s += a.sum[l];
            s2 += a.sum_sq[l];
        }
        const double mean = s / paths;
        const double var = std::max(s2 / paths - mean * mean, 0.0);
        out[l] = {mean, std::sqrt(var / paths)};
    }
    return out;
}

} // namespace pairwalk
