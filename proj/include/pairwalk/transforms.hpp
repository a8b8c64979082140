#pragma once

#include "pairwalk/model.hpp"
#include "pairwalk/numerics.hpp"

#include <complex>

namespace pairwalk {

using Complex = std::complex<double>;

// Evaluation point of the discrete Fourier-Laplace kernel G(w, w', kappa,
// lambda): w, wp are the initial/final distance coordinates, kappa the
// Fourier dual of the sum coordinate, lambda > 0 the Laplace dual of time.
// alpha != 1 is handled by the exact rescaling G_{alpha}(lambda) =
// (1/alpha) G(lambda/alpha).
struct TransformQuery {
    long long w = 0;
    long long wp = 0;
    double kappa = 0.0;
    double lambda = 1.0;
    double theta = 0.0;
    double p = 0.5;
    double alpha = 1.0;
};

// Building blocks of the closed form at a given (kappa, lambda, theta, p),
// alpha = 1 normalization:
//   nu     = cos(kappa) - i (p-q) sin(kappa)   (one-step Fourier factor)
//   x      = (1 + lambda/2) / nu
//   zeta   = smaller-modulus root of r^2 - 2 x r + 1 = 0   (|zeta| <= 1)
//   z_zero = nu (zeta^{-2} - 1)
//   z_theta = z_zero + 2 theta (x - nu)
struct KernelIngredients {
    Complex nu;
    Complex x;
    Complex zeta;
    Complex z_theta;
    Complex z_zero;
};

KernelIngredients ingredients(double kappa, double lambda, double theta, double p);
KernelIngredients ingredients(const TransformQuery& q);

// Fourier-Laplace transform of the (u, w)-chain transition probability,
// G(w, w', kappa, lambda) = sum_v e^{-i kappa v} int e^{-lambda t}
// P_t((0,w),(v,w')) dt. Closed form assembled from the hitting-time
// solution:
//   G(0,0)   = (theta/nu + 1/zeta) / Z
//   G(w,0)   = (theta+1) zeta^{w-1} / Z                        (w >= 1)
//   G(0,w')  = 2 zeta^{w'-1} / Z                               (w' >= 1)
//   G(w,w')  = (zeta^{|w'-w|} - zeta^{w+w'-2}) / (nu (1/zeta - zeta))
//              + 2 x zeta^{w+w'-2} / Z                         (w, w' >= 1)
// with Z = z_theta.
Complex g_kernel(const TransformQuery& q);

// First-passage transform of the free distance walk from w down to 1,
// psi_w = zeta^{w-1} (w >= 2), and the killed-walk kernel
// phi_ww = (zeta^{|w'-w|} - zeta^{w+w'-2}) / (nu (1/zeta - zeta)) (w, w' >= 2).
// These are the raw ingredients of the hitting-time solution, exposed as
// cross-check operations.
Complex psi_w(const TransformQuery& q);
Complex phi_ww(const TransformQuery& q);

// int_0^infty e^{-lambda t} P_w(w(t) = 0) dt for the alpha-rescaled chain:
//   zeta^w (1 + theta zeta^{1{w=0}}) / (1/zeta + (theta lambda - 1) zeta)
// evaluated at lambda/alpha and divided by alpha.
double local_time_laplace(long long w, double theta, double lambda, double alpha = 1.0);

// Laplace transform of the transition probability of the ordered pair
// (leftmost, rightmost), computed as a double Fourier integral over
// [-pi,pi]^2. Requires x < y; y' = x' is the meeting diagonal.
double pi_leftright(long long x, long long y, long long xp, long long yp,
                    double lambda, const ModelParams& params,
                    const QuadratureSpec& spec = {});

// Evaluation point for the continuum (Brownian) transforms: z >= 0 is the
// initial distance, kappa/m are Fourier duals of sum and distance, gamma is
// the stickiness (gamma = 0 reflected, +infinity accepted as the absorbed
// sentinel).
struct ContinuumQuery {
    double z = 0.0;
    double kappa = 0.0;
    double m = 0.0;
    double lambda = 1.0;
    double gamma = 0.0;
};

Complex psi_reflected(const ContinuumQuery& q);
Complex psi_absorbed(const ContinuumQuery& q);
Complex psi_sticky(const ContinuumQuery& q);

// interpolation weight c^gamma(kappa, lambda) with psi_sticky =
// c * psi_reflected + (1-c) * psi_absorbed
double interpolation_weight(double kappa, double lambda, double gamma);

// Laplace transform of P_z(sticky BM at 0 at time t):
// gamma e^{-sqrt(2 lambda) z} / (sqrt(2 lambda) + gamma lambda)
double sticky_p0(double z, double lambda, double gamma);

enum class ScalingRegime { Reflected, Sticky, Absorbed };

// Finite-eps Fourier-Laplace transform of the diffusively rescaled pair
// process, E[e^{-i(kappa (U_eps(t) - U) + m W_eps(t))}] Laplace-transformed:
// evaluated exactly as eps^2 * sum_{w'} e^{-i m eps w'/sqrt2}
// G^{theta_eps}(w_eps, w', kappa eps/sqrt2, lambda eps^2) with
// w_eps = round(sqrt2 W / eps). theta_eps is gamma_target for the reflected
// regime (held constant), sqrt2 gamma/eps in the sticky regime, eps^{-2} in
// the absorbed regime.
Complex scaled_discrete_transform(double eps, double kappa, double m, double lambda,
                                  double W, double gamma_target, ScalingRegime regime);

// Truncation horizon used for the geometric w'-tail, exposed for tests:
// ceil(log(tol * (1 - |zeta|)) / log |zeta|).
long long geometric_tail_terms(double zeta_abs, double tol);

} // namespace pairwalk
