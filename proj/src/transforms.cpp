#include "pairwalk/transforms.hpp"
#include "pairwalk/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pairwalk {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSqrt2 = 1.414213562373095048801688724209698;

Complex cpow_int(Complex base, long long n) {
    if (n < 0) return 1.0 / cpow_int(base, -n);
    Complex acc = 1.0;
    Complex b = base;
    while (n > 0) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

void require_lambda(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
}

} // namespace

KernelIngredients ingredients(double kappa, double lambda, double theta, double p) {
    require_lambda(lambda);
    const double q = 1.0 - p;
    KernelIngredients ing;
    ing.nu = Complex(std::cos(kappa), -(p - q) * std::sin(kappa));
    ing.x = (1.0 + 0.5 * lambda) / ing.nu;

    const Complex disc = ing.x * ing.x - 1.0;
    const Complex s = std::sqrt(disc);
    const Complex r_plus = ing.x + s;
    const Complex r_minus = ing.x - s;
    if (std::abs(disc) < 1e-14 &&
        std::abs(std::abs(r_plus) - 1.0) < 1e-10 &&
        std::abs(std::abs(r_minus) - 1.0) < 1e-10) {
        throw BranchAmbiguity("zeta branch undecidable: both roots of r^2-2xr+1 sit on the unit circle");
    }
    // roots multiply to 1; take the reciprocal of the larger one so that
    // |zeta| <= 1 without catastrophic cancellation for large |x|
    const Complex r_big = (std::abs(r_plus) >= std::abs(r_minus)) ? r_plus : r_minus;
    ing.zeta = 1.0 / r_big;

    ing.z_zero = ing.nu * (1.0 / (ing.zeta * ing.zeta) - 1.0);
    ing.z_theta = ing.z_zero + 2.0 * theta * (ing.x - ing.nu);
    return ing;
}

KernelIngredients ingredients(const TransformQuery& q) {
    return ingredients(q.kappa, q.lambda, q.theta, q.p);
}

namespace {

// table entry at alpha = 1; exponents are all >= 0 except the (0,0) case
Complex g_table(const KernelIngredients& ing, double theta, long long w, long long wp) {
    const Complex& z = ing.z_theta;
    if (std::abs(z) < 1e-14) throw PoleHit("Z^theta vanishes at this (kappa, lambda)");
    const Complex& zeta = ing.zeta;
    if (w == 0 && wp == 0) return (theta / ing.nu + 1.0 / zeta) / z;
    if (wp == 0) return (theta + 1.0) * cpow_int(zeta, w - 1) / z;
    if (w == 0) return 2.0 * cpow_int(zeta, wp - 1) / z;
    const Complex killed = (cpow_int(zeta, std::llabs(wp - w)) - cpow_int(zeta, w + wp - 2)) /
                           (ing.nu * (1.0 / zeta - zeta));
    return killed + 2.0 * ing.x * cpow_int(zeta, w + wp - 2) / z;
}

} // namespace

Complex g_kernel(const TransformQuery& q) {
    if (q.w < 0 || q.wp < 0) throw DomainError("g_kernel: w, w' must be >= 0");
    require_lambda(q.lambda);
    if (!(q.alpha > 0.0)) throw DomainError("g_kernel: alpha must be > 0");
    const KernelIngredients ing = ingredients(q.kappa, q.lambda / q.alpha, q.theta, q.p);
    return g_table(ing, q.theta, q.w, q.wp) / q.alpha;
}

Complex psi_w(const TransformQuery& q) {
    if (q.w < 2) throw DomainError("psi_w: requires w >= 2");
    if (!(q.alpha > 0.0)) throw DomainError("psi_w: alpha must be > 0");
    const KernelIngredients ing = ingredients(q.kappa, q.lambda / q.alpha, q.theta, q.p);
    return cpow_int(ing.zeta, q.w - 1);
}

Complex phi_ww(const TransformQuery& q) {
    if (q.w < 2 || q.wp < 2) throw DomainError("phi_ww: requires w, w' >= 2");
    if (!(q.alpha > 0.0)) throw DomainError("phi_ww: alpha must be > 0");
    const KernelIngredients ing = ingredients(q.kappa, q.lambda / q.alpha, q.theta, q.p);
    return (cpow_int(ing.zeta, std::llabs(q.wp - q.w)) - cpow_int(ing.zeta, q.w + q.wp - 2)) /
           (ing.nu * (1.0 / ing.zeta - ing.zeta));
}

double local_time_laplace(long long w, double theta, double lambda, double alpha) {
    if (w < 0) throw DomainError("local_time_laplace: w must be >= 0");
    if (!(theta >= -1.0)) throw DomainError("local_time_laplace: theta must be >= -1");
    require_lambda(lambda);
    const double lam = lambda / alpha;
    const double zeta = 1.0 + 0.5 * lam - std::sqrt(lam + 0.25 * lam * lam);
    const double num = std::pow(zeta, static_cast<double>(w)) *
                       (1.0 + theta * (w == 0 ? zeta : 1.0));
    const double den = 1.0 / zeta + (theta * lam - 1.0) * zeta;
    return num / den / alpha;
}

namespace {

// one term of the left/right double integral on the uniform N x N grid;
// gamma_kind: 0 -> plus (1), 1 -> minus, 2 -> diagonal.
// With the standard argument order the m-coefficient of the phase comes out
// as -(w+w') resp. -w, so the exponent corrections (the -2 in zeta^{w+w'-2},
// the -1 in zeta^{w-1}) enter as e^{+2im} and e^{+im} factors.
Complex leftright_grid_sum(long long a, long long b, int gamma_kind, double lambda,
                           double theta, double p, int n) {
    // biperiodic integrand: trapezoid == plain average over the grid, and the
    // [-pi,pi]^2 integral with 1/(8 pi^2) prefactor becomes average / 2
    Complex acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k1 = -kPi + 2.0 * kPi * i / n;
        for (int j = 0; j < n; ++j) {
            const double k2 = -kPi + 2.0 * kPi * j / n;
            const double kap = 0.5 * (k1 + k2);
            const double m = 0.5 * (k2 - k1);
            const KernelIngredients ing = ingredients(kap, lambda, theta, p);
            const Complex denom = (1.0 + 0.5 * lambda) - ing.nu * std::cos(m);
            Complex gam;
            if (gamma_kind == 0) {
                gam = 1.0;
            } else if (gamma_kind == 1) {
                const Complex zz = ing.zeta * ing.zeta;
                gam = std::polar(1.0, 2.0 * m) *
                      ((1.0 + zz) * ing.z_zero / ing.z_theta - 1.0);
            } else {
                gam = std::polar(1.0, m) *
                      (theta + 1.0) * ing.zeta * ing.z_zero / ing.z_theta;
            }
            acc += gam * std::polar(1.0, k1 * a + k2 * b) / denom;
        }
    }
    return acc / (2.0 * static_cast<double>(n) * static_cast<double>(n));
}

} // namespace

double pi_leftright(long long x, long long y, long long xp, long long yp,
                    double lambda, const ModelParams& params, const QuadratureSpec& spec) {
    spec.check();
    if (!(x < y)) throw DomainError("pi_leftright: requires x < y strictly");
    if (xp > yp) throw DomainError("pi_leftright: requires x' <= y'");
    require_lambda(lambda);

    const double lam = lambda / params.alpha;
    const double theta = params.theta;
    const double p = params.p;

    auto evaluate = [&](int n) -> Complex {
        if (yp > xp) {
            return leftright_grid_sum(xp - x, yp - y, 0, lam, theta, p, n) +
                   leftright_grid_sum(yp - x, xp - y, 1, lam, theta, p, n);
        }
        return leftright_grid_sum(xp - x, xp - y, 2, lam, theta, p, n);
    };

    int n = 32;
    Complex prev = evaluate(n);
    for (int r = 0; r < spec.max_refinements; ++r) {
        n *= 2;
        const Complex cur = evaluate(n);
        if (std::abs(cur - prev) <= spec.abs_tol + spec.rel_tol * std::abs(cur)) {
            const Complex value = cur / params.alpha;
            if (std::abs(value.imag()) >= 1e-8)
                throw Error("pi_leftright: imaginary residual " +
                            std::to_string(value.imag()) + " exceeds 1e-8");
            return value.real();
        }
        prev = cur;
    }
    throw QuadratureNonConvergence("pi_leftright: grid refinement did not converge");
}

namespace {

// closed forms of the half-line integrals, a = sqrt(kappa^2 + 2 lambda):
//   I_plus  = int_0^inf e^{-imx} e^{-a(x+z)} dx = e^{-az} / (a + im)
//   I_kink  = int_0^inf e^{-imx} e^{-a|x-z|} dx
//           = (e^{-imz} - e^{-az}) / (a - im) + e^{-imz} / (a + im)
struct HalfLineIntegrals {
    Complex plus;
    Complex kink;
};

HalfLineIntegrals half_line(double z, double kappa, double m, double lambda) {
    const double a = std::sqrt(kappa * kappa + 2.0 * lambda);
    const Complex aim(a, m);
    const Complex amim(a, -m);
    const double eaz = std::exp(-a * z);
    const Complex eimz = std::polar(1.0, -m * z);
    HalfLineIntegrals h;
    h.plus = eaz / aim;
    h.kink = (eimz - eaz) / amim + eimz / aim;
    return h;
}

void require_continuum(const ContinuumQuery& q) {
    require_lambda(q.lambda);
    if (q.z < 0.0) throw DomainError("continuum transforms: z must be >= 0");
    if (q.gamma < 0.0) throw DomainError("continuum transforms: gamma must be >= 0");
}

} // namespace

Complex psi_reflected(const ContinuumQuery& q) {
    require_continuum(q);
    const double a = std::sqrt(q.kappa * q.kappa + 2.0 * q.lambda);
    const HalfLineIntegrals h = half_line(q.z, q.kappa, q.m, q.lambda);
    return (h.plus + h.kink) / a;
}

Complex psi_absorbed(const ContinuumQuery& q) {
    require_continuum(q);
    const double a = std::sqrt(q.kappa * q.kappa + 2.0 * q.lambda);
    const HalfLineIntegrals h = half_line(q.z, q.kappa, q.m, q.lambda);
    return (h.kink - h.plus) / a +
           std::exp(-q.z * a) / (q.lambda + q.kappa * q.kappa);
}

double interpolation_weight(double kappa, double lambda, double gamma) {
    require_lambda(lambda);
    if (std::isinf(gamma)) return 0.0;
    const double a = std::sqrt(kappa * kappa + 2.0 * lambda);
    return a / (a + gamma * (kappa * kappa + lambda));
}

Complex psi_sticky(const ContinuumQuery& q) {
    require_continuum(q);
    if (std::isinf(q.gamma)) return psi_absorbed(q);
    const double c = interpolation_weight(q.kappa, q.lambda, q.gamma);
    return c * psi_reflected(q) + (1.0 - c) * psi_absorbed(q);
}

double sticky_p0(double z, double lambda, double gamma) {
    require_lambda(lambda);
    if (z < 0.0 || gamma < 0.0) throw DomainError("sticky_p0: z, gamma must be >= 0");
    if (std::isinf(gamma)) return std::exp(-std::sqrt(2.0 * lambda) * z) / lambda;
    return gamma * std::exp(-std::sqrt(2.0 * lambda) * z) /
           (std::sqrt(2.0 * lambda) + gamma * lambda);
}

long long geometric_tail_terms(double zeta_abs, double tol) {
    if (!(zeta_abs < 1.0 - 1e-12))
        throw TailTruncationError("geometric tail bound unusable: |zeta| too close to 1");
    if (zeta_abs <= 0.0) return 1;
    const double n = std::log(tol * (1.0 - zeta_abs)) / std::log(zeta_abs);
    return static_cast<long long>(std::ceil(std::max(1.0, n)));
}

Complex scaled_discrete_transform(double eps, double kappa, double m, double lambda,
                                  double W, double gamma_target, ScalingRegime regime) {
    if (!(eps > 0.0)) throw DomainError("scaled_discrete_transform: eps must be > 0");
    if (W < 0.0) throw DomainError("scaled_discrete_transform: W must be >= 0");
    require_lambda(lambda);

    double theta_eps = 0.0;
    switch (regime) {
        case ScalingRegime::Reflected: theta_eps = gamma_target; break;
        case ScalingRegime::Sticky: theta_eps = kSqrt2 * gamma_target / eps; break;
        case ScalingRegime::Absorbed: theta_eps = 1.0 / (eps * eps); break;
    }

    const long long w_eps = std::llround(kSqrt2 * W / eps);
    const double lam = lambda * eps * eps;
    const double kap = kappa * eps / kSqrt2;
    const double mp = m * eps / kSqrt2;

    const KernelIngredients ing = ingredients(kap, lam, theta_eps, 0.5);
    const long long tail = geometric_tail_terms(std::abs(ing.zeta), 1e-10);
    const long long wp_max = w_eps + tail;

    const Complex phase_step = std::polar(1.0, -mp);
    Complex phase = 1.0;
    Complex acc = 0.0;
    for (long long wp = 0; wp <= wp_max; ++wp) {
        acc += phase * g_table(ing, theta_eps, w_eps, wp);
        phase *= phase_step;
    }
    return acc * (eps * eps);
}

} // namespace pairwalk
