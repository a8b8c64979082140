#pragma once

#include "pairwalk/model.hpp"
#include "pairwalk/oracle.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pairwalk {

// Moments of the initial product measure: rho = E[eta_x] and
// chi = E[eta_x (eta_x - 1)] per site, optionally site-dependent.
struct MomentProfile {
    double rho = 0.0;
    double chi = 0.0;
    std::function<double(long long)> rho_x; // empty => homogeneous
    std::function<double(long long)> chi_x;

    bool homogeneous() const { return !rho_x && !chi_x; }
    double rho_at(long long x) const { return rho_x ? rho_x(x) : rho; }
    double chi_at(long long x) const { return chi_x ? chi_x(x) : chi; }

    // stationary product measure for interaction theta: chi = (1+theta) rho^2
    static MomentProfile stationary(double rho, double theta) {
        return {rho, (1.0 + theta) * rho * rho, nullptr, nullptr};
    }
};

// Laplace transform (in time) of the occupation-number covariance
// Cov(eta_x(t), eta_y(t)) for a homogeneous product initial measure:
//   (1 + theta d) (chi/(theta+1) - rho^2) (1 + theta zeta^{1{x=y}})
//       zeta^{|x-y|} / (1/zeta + (theta lambda - 1) zeta)
//   + (d/lambda) (theta rho^2 + rho),        d = delta_{x,y}
// alpha = 1 normalization; rescale lambda for other alpha.
double xi_homogeneous_laplace(long long x, long long y, double lambda, double theta,
                              const MomentProfile& profile);

// Time-domain covariance for a general product profile via two dual
// particles: the interacting-vs-independent pair expectation of
// rho(X_t) rho(Y_t), the meeting term weighted by chi/(1+theta) - rho^2,
// and the on-diagonal theta rho_t(x)^2 + rho_t(x). pair_kernel must be a
// truncated generator built with (alpha = 1, p = 1/2, theta).
double xi_general(double t, long long x, long long y, const MomentProfile& profile,
                  double theta, const TruncatedGenerator& pair_kernel);

// Sticky-regime scaling of the covariance (x != y) and variance (x == y)
// Laplace transforms at time scale eps^{-a}, sites floor(x/eps):
// asymptotic value from the matching limit branch, finite-eps value from
// xi_homogeneous_laplace at the rescaled arguments.
struct CovarianceScalingResult {
    double asymptotic = 0.0;
    double finite_eps = 0.0;
    std::string regime_label; // subcritical / critical / supercritical
    // relative shift of finite_eps when chi is replaced by 0: the limit
    // branches carry no chi, so this measures how subleading the
    // chi-dependence actually is at this eps
    double chi_sensitivity = 0.0;
};

CovarianceScalingResult covariance_scaling(double a, double x, double y, double lambda,
                                           double gamma, double rho, double chi, double eps);

// Schwartz-class test function sampled on a uniform grid.
struct TestFunction {
    double x0 = 0.0;   // left edge
    double dx = 0.0;   // spacing
    std::vector<double> values;

    double x_at(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
    double operator()(double x) const; // linear interpolation, 0 outside
    void check_decay(double tol = 1e-12) const;
};

TestFunction gaussian_test_function(double center, double sigma, double half_width,
                                    int points);

// Laplace-transformed variance of the density fluctuation field
// X_eps(Phi) = eps sum_x Phi(eps x)(eta_x(eps^{-2} t) - rho):
// discrete value eps^2 sum_{x,y} Phi(eps x) Phi(eps y) *
// [Laplace-domain covariance at diffusive scaling], and its eps -> 0 limit
//   -gamma rho^2/(sqrt(2 lambda)+gamma lambda) * int int Phi(x)Phi(y)
//        e^{-sqrt(lambda)|x-y|} dx dy
//   + 2 sqrt2 gamma rho^2/(2 lambda + gamma lambda sqrt(2 lambda)) * int Phi^2.
// The two coefficients satisfy B = (2/sqrt(lambda)) A, so the limit is a
// positive-semidefinite form vanishing on constants (particle conservation).
struct FieldVarianceResult {
    double discrete_value = 0.0;
    double limit_value = 0.0;
};

FieldVarianceResult density_field_variance_laplace(const TestFunction& phi, double lambda,
                                                   double gamma, double rho, double eps,
                                                   double chi = 0.0);

// gamma -> 0 comparison mode: the independent-walker variance structure
// obtained by replacing gamma rho^2 -> rho in the numerators and gamma -> 0
// in the denominators. Labeled diagnostic, not a continuity claim.
double field_variance_independent_structure(const TestFunction& phi, double lambda, double rho);

} // namespace pairwalk
