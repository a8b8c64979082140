#pragma once

#include "pairwalk/model.hpp"
#include "pairwalk/transforms.hpp"

#include <complex>
#include <span>
#include <vector>

namespace pairwalk {

// Brute-force ground truth for the (u, w) chain: the generator is truncated
// to u in [-u_max, u_max], w in [0, w_max] with an absorbing boundary whose
// leaked mass is tracked explicitly, so every P_t entry carries a rigorous
// one-sided error bound.
struct TruncatedGeneratorSpec {
    ModelParams params{1.0, 0.5, 0.0};
    int w_max = 60;
    int u_max = 240;
};

class TruncatedGenerator {
  public:
    explicit TruncatedGenerator(const TruncatedGeneratorSpec& spec);

    const TruncatedGeneratorSpec& spec() const { return spec_; }
    std::size_t state_count() const { return n_states_; }

    // -1 when the state lies outside the truncation window
    long long index_of(PairState s) const;
    PairState state_of(std::size_t index) const;

    struct Row {
        std::vector<double> prob; // indexed by state
        double leak = 0.0;        // mass absorbed at the truncation edge
    };

    // row of P_t from a point mass, by uniformization (Poisson mixture of
    // powers of the uniformized step); series truncated at Poisson tail 1e-14
    Row transition_row(PairState from, double t) const;

    // P_t applied to an arbitrary start distribution (Chapman-Kolmogorov tests)
    Row evolve(const Row& start, double t) const;

    // full matrix; refuses truncations with more than 20000 states
    std::vector<std::vector<double>> transition_matrix(double t) const;

    // sum_v e^{-i kappa v} int_0^inf e^{-lambda t} P_t((0,w),(v,w')) dt by
    // exponential-weighted Gauss-Legendre quadrature in t over uniformization
    // evaluations; the node count is doubled once as a self-check.
    // Throws TruncationDominates if the tracked leak exceeds 1e-8.
    std::complex<double> numeric_G(long long w, long long wp, double kappa,
                                   double lambda, int time_nodes = 64) const;

    // batch variant sharing one uniformization sweep across all requested
    // (wp, kappa, lambda); result indexed [k][l][j] flattened as
    // ((k * lambdas.size()) + l) * wps.size() + j
    std::vector<std::complex<double>> numeric_G_batch(long long w,
                                                      std::span<const long long> wps,
                                                      std::span<const double> kappas,
                                                      std::span<const double> lambdas,
                                                      int time_nodes = 64) const;

    // P_{x,y}(X_t = Y_t) for two dual particles started at x, y: the
    // distance-chain marginal P_{|x-y|}(w(t) = 0) read off a transition row.
    double dual_pair_meeting_prob(long long x, long long y, double t) const;

  private:
    struct StepResult;
    void apply_step(const std::vector<double>& in, std::vector<double>& out,
                    double& leak) const;

    TruncatedGeneratorSpec spec_;
    std::size_t n_states_;
    int u_span_;
    double uniformization_rate_;
};

// P_t(0, k) of a single walker (jump rate alpha, right probability p) for
// k in [-range, range]; returned vector is indexed by k + range.
std::vector<double> single_walker_row(double t, double alpha, double p, int range);

} // namespace pairwalk
