#include "pairwalk/duality.hpp"
#include "pairwalk/errors.hpp"
#include "pairwalk/transforms.hpp"

#include <cmath>
#include <string>

namespace pairwalk {

namespace {
constexpr double kSqrt2 = 1.414213562373095048801688724209698;

double zeta_real(double lambda) {
    return 1.0 + 0.5 * lambda - std::sqrt(lambda + 0.25 * lambda * lambda);
}
} // namespace

double xi_homogeneous_laplace(long long x, long long y, double lambda, double theta,
                              const MomentProfile& profile) {
    if (!(lambda > 0.0)) throw DomainError("xi_homogeneous_laplace: lambda must be > 0");
    if (!(theta >= -1.0)) throw DomainError("xi_homogeneous_laplace: theta must be >= -1");
    if (!profile.homogeneous())
        throw DomainError("xi_homogeneous_laplace: profile must be homogeneous");
    const double rho = profile.rho;
    const double chi = profile.chi;
    if (theta == -1.0 && chi != 0.0)
        throw DomainError("xi_homogeneous_laplace: theta = -1 requires chi = 0 (SEP(1))");

    const long long d = std::llabs(x - y);
    const double zeta = zeta_real(lambda);
    const double chi_term = (chi == 0.0) ? 0.0 : chi / (theta + 1.0);
    const double meeting = (1.0 + (d == 0 ? theta : 0.0)) * (chi_term - rho * rho) *
                           (1.0 + theta * (d == 0 ? zeta : 1.0)) *
                           std::pow(zeta, static_cast<double>(d)) /
                           (1.0 / zeta + (theta * lambda - 1.0) * zeta);
    const double diagonal = (d == 0) ? (theta * rho * rho + rho) / lambda : 0.0;
    return meeting + diagonal;
}

double xi_general(double t, long long x, long long y, const MomentProfile& profile,
                  double theta, const TruncatedGenerator& pair_kernel) {
    const ModelParams& mp = pair_kernel.spec().params;
    if (mp.theta != theta)
        throw DomainError("xi_general: pair_kernel was built with a different theta");
    if (mp.p != 0.5 || mp.alpha != 1.0)
        throw DomainError("xi_general: duality formulas assume alpha = 1, p = 1/2");

    // interacting pair from (x, y)
    const PairState start{x + y, std::llabs(y - x)};
    const auto pair_row = pair_kernel.transition_row(start, t);
    if (pair_row.leak > 1e-8)
        throw TruncationDominates("xi_general: pair kernel leak " + std::to_string(pair_row.leak));

    // independent pair: same chain with theta = 0
    TruncatedGeneratorSpec free_spec = pair_kernel.spec();
    free_spec.params = ModelParams::validated(1.0, 0.5, 0.0);
    const TruncatedGenerator free_gen(free_spec);
    const auto free_row = free_gen.transition_row(start, t);

    double pair_sum = 0.0, free_sum = 0.0, meeting_sum = 0.0;
    const double chi_div = 1.0 + theta;
    for (std::size_t s = 0; s < pair_row.prob.size(); ++s) {
        const double p_int = pair_row.prob[s];
        const double p_free = free_row.prob[s];
        if (p_int == 0.0 && p_free == 0.0) continue;
        const PairState st = pair_kernel.state_of(s);
        // unordered particle positions; u + w is even on the reachable set
        const long long a = (st.u - st.w) / 2;
        const long long b = (st.u + st.w) / 2;
        const double rr = profile.rho_at(a) * profile.rho_at(b);
        pair_sum += p_int * rr;
        free_sum += p_free * rr;
        if (st.w == 0) {
            const double chi_u = profile.chi_at(a);
            if (chi_u != 0.0 && chi_div == 0.0)
                throw DomainError("xi_general: theta = -1 requires chi = 0 everywhere");
            const double chi_term = (chi_u == 0.0) ? 0.0 : chi_u / chi_div;
            meeting_sum += p_int * (chi_term - profile.rho_at(a) * profile.rho_at(a));
        }
    }

    double diagonal = 0.0;
    if (x == y) {
        // rho_t(x) = sum_u p_t(x, u) rho(u) for one dual walker (rate 1)
        const int range = pair_kernel.spec().u_max / 2;
        const auto row = single_walker_row(t, 1.0, 0.5, range);
        double rho_t = 0.0;
        for (int k = -range; k <= range; ++k)
            rho_t += row[static_cast<std::size_t>(k + range)] * profile.rho_at(x + k);
        diagonal = theta * rho_t * rho_t + rho_t;
    }

    const double prefactor = (x == y) ? (1.0 + theta) : 1.0;
    return prefactor * ((pair_sum - free_sum) + meeting_sum) + diagonal;
}

CovarianceScalingResult covariance_scaling(double a, double x, double y, double lambda,
                                           double gamma, double rho, double chi, double eps) {
    if (!(a > 1.0)) throw DomainError("covariance_scaling: requires a > 1");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("covariance_scaling: eps in (0,1)");
    if (!(lambda > 0.0) || !(gamma > 0.0))
        throw DomainError("covariance_scaling: lambda, gamma must be > 0");

    CovarianceScalingResult out;
    out.regime_label = (a < 2.0) ? "subcritical" : (a == 2.0 ? "critical" : "supercritical");

    const double dist = std::abs(x - y);
    const double sq2lam = std::sqrt(2.0 * lambda);
    if (dist > 0.0) {
        if (a < 2.0) {
            const double arg = std::sqrt(lambda) * dist * std::pow(eps, 0.5 * a - 1.0);
            out.asymptotic = -(rho * rho / lambda) * std::exp(-arg);
        } else if (a == 2.0) {
            out.asymptotic = -gamma * rho * rho * std::exp(-std::sqrt(lambda) * dist) /
                             (sq2lam + gamma * lambda);
        } else {
            out.asymptotic = -gamma * rho * rho * std::pow(eps, 0.5 * a - 1.0) / sq2lam;
        }
    } else {
        if (a < 2.0) {
            out.asymptotic = 2.0 * rho * rho * std::pow(eps, -0.5 * a) /
                             (lambda * std::sqrt(lambda));
        } else if (a == 2.0) {
            out.asymptotic = 2.0 * kSqrt2 * gamma * rho * rho /
                             ((2.0 * lambda + gamma * lambda * sq2lam) * eps);
        } else {
            out.asymptotic = kSqrt2 * gamma * rho * rho / (lambda * eps);
        }
    }

    // finite-eps value: Laplace transform at time scale eps^{-a}, lattice
    // sites floor(x/eps), theta_eps = sqrt(2) gamma / eps
    const double theta_eps = kSqrt2 * gamma / eps;
    const long long site_x = static_cast<long long>(std::floor(x / eps));
    const long long site_y = static_cast<long long>(std::floor(y / eps));
    const double lam_scaled = std::pow(eps, a) * lambda;
    const MomentProfile profile{rho, chi, nullptr, nullptr};
    out.finite_eps = std::pow(eps, a) *
                     xi_homogeneous_laplace(site_x, site_y, lam_scaled, theta_eps, profile);
    if (chi != 0.0) {
        const MomentProfile no_chi{rho, 0.0, nullptr, nullptr};
        const double alt = std::pow(eps, a) *
                           xi_homogeneous_laplace(site_x, site_y, lam_scaled, theta_eps, no_chi);
        out.chi_sensitivity = std::abs(out.finite_eps - alt) /
                              std::max(std::abs(out.finite_eps), 1e-300);
    }
    return out;
}

double TestFunction::operator()(double x) const {
    if (values.size() < 2) return 0.0;
    const double pos = (x - x0) / dx;
    if (pos < 0.0 || pos > static_cast<double>(values.size() - 1)) return 0.0;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), values.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

void TestFunction::check_decay(double tol) const {
    if (values.size() < 9) throw DomainError("TestFunction: needs at least 9 samples");
    if (!(dx > 0.0)) throw DomainError("TestFunction: spacing must be positive");
    if (std::abs(values.front()) > tol || std::abs(values.back()) > tol)
        throw DomainError("TestFunction: tails exceed the decay tolerance at the grid edges");
}

TestFunction gaussian_test_function(double center, double sigma, double half_width, int points) {
    if (points < 9 || points % 2 == 0)
        throw InvalidParameter("gaussian_test_function: points must be odd and >= 9");
    TestFunction f;
    f.x0 = center - half_width;
    f.dx = 2.0 * half_width / (points - 1);
    f.values.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double x = f.x0 + f.dx * i;
        const double z = (x - center) / sigma;
        f.values[static_cast<std::size_t>(i)] = std::exp(-0.5 * z * z);
    }
    return f;
}

namespace {

// Simpson weights on the sampled grid (odd number of points)
std::vector<double> simpson_weights(std::size_t n, double dx) {
    std::vector<double> w(n, 0.0);
    if (n < 3 || n % 2 == 0) throw DomainError("simpson weights need an odd point count");
    for (std::size_t i = 0; i < n; ++i) {
        double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[i] = c * dx / 3.0;
    }
    return w;
}

} // namespace

FieldVarianceResult density_field_variance_laplace(const TestFunction& phi, double lambda,
                                                   double gamma, double rho, double eps,
                                                   double chi) {
    if (!(lambda > 0.0) || !(gamma > 0.0) || !(eps > 0.0))
        throw DomainError("density_field_variance_laplace: lambda, gamma, eps must be > 0");
    phi.check_decay();

    FieldVarianceResult out;
    const double sq2lam = std::sqrt(2.0 * lambda);
    const double coeff_pair = gamma * rho * rho / (sq2lam + gamma * lambda);
    const double coeff_diag = 2.0 * kSqrt2 * gamma * rho * rho /
                              (2.0 * lambda + gamma * lambda * sq2lam);

    // limit: -A * int int Phi Phi e^{-sqrt(lambda)|x-y|} + B * int Phi^2
    const std::size_t n = phi.values.size();
    const std::vector<double> w = simpson_weights(n, phi.dx);
    double int_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) int_sq += w[i] * phi.values[i] * phi.values[i];

    const double r = std::exp(-std::sqrt(lambda) * phi.dx);
    std::vector<double> rpow(n);
    rpow[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) rpow[k] = rpow[k - 1] * r;
    double int_pair = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t d = i > j ? i - j : j - i;
            row += w[j] * phi.values[j] * rpow[d];
        }
        int_pair += w[i] * phi.values[i] * row;
    }
    out.limit_value = -coeff_pair * int_pair + coeff_diag * int_sq;

    // discrete: eps^2 sum_{x,y} Phi(eps x) Phi(eps y) * eps^2 *
    // XiLaplace(|x-y|; eps^2 lambda, theta_eps)
    const double theta_eps = kSqrt2 * gamma / eps;
    const double lam_scaled = eps * eps * lambda;
    const MomentProfile profile{rho, chi, nullptr, nullptr};

    const long long site_lo = static_cast<long long>(std::ceil(phi.x0 / eps));
    const long long site_hi =
        static_cast<long long>(std::floor(phi.x_at(n - 1) / eps));
    const std::size_t n_sites = static_cast<std::size_t>(site_hi - site_lo + 1);
    std::vector<double> sampled(n_sites);
    for (std::size_t i = 0; i < n_sites; ++i)
        sampled[i] = phi(eps * static_cast<double>(site_lo + static_cast<long long>(i)));

    // lag sums S(d) = sum_x Phi(eps x) Phi(eps (x+d))
    std::vector<double> lag(n_sites, 0.0);
    for (std::size_t d = 0; d < n_sites; ++d) {
        double s = 0.0;
        for (std::size_t i = 0; i + d < n_sites; ++i) s += sampled[i] * sampled[i + d];
        lag[d] = s;
    }
    double acc = 0.0;
    for (std::size_t d = 0; d < n_sites; ++d) {
        const double xi = xi_homogeneous_laplace(0, static_cast<long long>(d), lam_scaled,
                                                 theta_eps, profile);
        acc += (d == 0 ? 1.0 : 2.0) * lag[d] * xi;
    }
    out.discrete_value = eps * eps * eps * eps * acc;
    return out;
}

double field_variance_independent_structure(const TestFunction& phi, double lambda, double rho) {
    phi.check_decay();
    const double sq2lam = std::sqrt(2.0 * lambda);
    const std::size_t n = phi.values.size();
    const std::vector<double> w = simpson_weights(n, phi.dx);
    double int_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) int_sq += w[i] * phi.values[i] * phi.values[i];
    const double r = std::exp(-std::sqrt(lambda) * phi.dx);
    std::vector<double> rpow(n);
    rpow[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) rpow[k] = rpow[k - 1] * r;
    double int_pair = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t d = i > j ? i - j : j - i;
            row += w[j] * phi.values[j] * rpow[d];
        }
        int_pair += w[i] * phi.values[i] * row;
    }
    // gamma rho^2 -> rho in numerators, gamma -> 0 in denominators
    return -rho / sq2lam * int_pair + 2.0 * kSqrt2 * rho / (2.0 * lambda) * int_sq;
}

} // namespace pairwalk
