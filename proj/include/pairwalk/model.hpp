#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace pairwalk {

// The six two-particle jump rates c+(1,0), c-(1,0), c+(2,0), c-(2,0),
// c+(1,1), c-(1,1). Everything about the two-particle dynamics follows
// from these once the compatibility conditions hold.
struct RateTable {
    double cp10 = 0, cm10 = 0;
    double cp20 = 0, cm20 = 0;
    double cp11 = 0, cm11 = 0;
};

// (alpha, p, theta): total single-particle jump rate, right-jump
// probability, and interaction strength. theta > 0 attracts (inclusion),
// theta < 0 excludes (partial exclusion), theta = 0 is independent walkers.
struct ModelParams {
    double alpha;
    double p;
    double theta;

    double q() const { return 1.0 - p; }

    // throws InvalidParameter unless alpha > 0, 0 < p < 1, theta >= -1
    static ModelParams validated(double alpha, double p, double theta);
};

// Per-state distance/sum jump rates of the (u, w) chain:
//   w = 0:  up 2*alpha, down 0
//   w = 1:  up alpha,   down alpha*(theta+1)
//   w >= 2: up alpha,   down alpha
// sum_total is the event rate of the sum coordinate (= up + down; both
// coordinates move at every event, the sum goes right with probability p).
struct EffectiveRates {
    double dist_up;
    double dist_down;
    double sum_total;
};

EffectiveRates effective_rates(const ModelParams& params, long long w);

// Sum/distance coordinates of the two-particle chain: u = x1 + x2,
// w = |x2 - x1|. Every jump changes both by one, so (u + w) mod 2 is
// conserved along trajectories.
struct PairState {
    long long u = 0;
    long long w = 0;

    friend bool operator==(const PairState&, const PairState&) = default;
};

// Result of checking the two compatibility conditions on a rate table.
// cond1: c+(2,0)+c-(2,0) = 2(c+(1,0)+c-(1,0))
// cond2: the three ratios c+/c- coincide (checked as cross products so
//        zero rates are handled without division)
struct ConditionReport {
    double cond1_residual = 0.0;                 // relative
    std::array<double, 2> cond2_residuals{};     // relative
    bool passed = false;
    std::optional<ModelParams> derived_params;   // present iff passed and 0<p<1
};

constexpr double kConditionTolerance = 1e-12;

ConditionReport validate_rates(const RateTable& rates);

// Linear reference rates c+(n,m) = alpha*p*n*(1+theta*m), c- analogously
// with q; round-trips through validate_rates.
RateTable rates_from_params(const ModelParams& params);

enum class ProcessKind { SIP, SEP, IRW };

// Named process preset with its single-site self-duality weights d(m, n)
// for m <= 2 (the library never uses more than two dual particles).
struct ProcessPreset {
    ProcessKind kind;
    double parameter = 0.0;   // k for SIP, j for SEP, unused for IRW
    double alpha;
    double theta;
    double c1;                // d(1,n) = c1 * n
    double c2;                // d(2,n) = c2 * n(n-1)

    double duality_weight(int m, long long n) const;
    ModelParams params(double p = 0.5) const;
    std::string name() const;
};

// SIP(k): theta = 1/k, default alpha = 2k.  SEP(j): theta = -1/j, default
// alpha = 2j (j a positive integer).  IRW: theta = 0, default alpha = 2.
// The alpha override keeps theta and the duality weights unchanged.
ProcessPreset make_preset(ProcessKind kind, double parameter,
                          std::optional<double> alpha = std::nullopt);

// Parses the CLI model grammar: "sip:<k>", "sep:<j>", "irw", or six
// comma-separated rates. Returns the derived ModelParams (p from the rates,
// or 1/2 for presets unless p_override is given).
struct ModelSpec {
    ModelParams params;
    std::optional<ProcessPreset> preset;
};
ModelSpec parse_model_spec(const std::string& text,
                           std::optional<double> p_override = std::nullopt,
                           std::optional<double> alpha_override = std::nullopt);

} // namespace pairwalk
