#pragma once

#include <complex>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

namespace pairwalk {

struct QuadratureSpec {
    int grid_points = 1025;      // power of two + 1 so refinements nest
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_refinements = 14;

    void check() const; // throws InvalidParameter on bad values
};

enum class InversionMethod { GaverStehfest, FourierSeries };

struct LaplaceInversionSpec {
    InversionMethod method = InversionMethod::GaverStehfest;
    int terms = 12;     // even, <= 18 in double precision
    // the (terms, terms-2) diagnostic approximates the true error; these
    // bounds flag genuinely unstable inversions, not routine convergence
    double abs_tol = 1e-4;
    double rel_tol = 1e-2;
    // Gaver-Stehfest loses digits fast beyond ~18 terms in doubles; the
    // diagnostic pair (terms, terms-2) guards that cliff.
    static constexpr const char* working_precision_note =
        "double precision; terms must stay <= 18";

    void check() const;
};

// (1/2pi) * integral of G(kappa) e^{i kappa v} over [-pi, pi] by the
// trapezoid/DFT rule on a uniform grid with identified endpoints. Exact for
// band-limited slices. alias_warning flags |v| beyond the grid Nyquist bound
// (the value is still returned).
struct FourierInvertResult {
    double value;
    double imag_residual;
    bool alias_warning;
};

FourierInvertResult fourier_ring_invert(std::span<const std::complex<double>> grid_slice,
                                        long long v);

// Time-domain value of a Laplace transform at t > 0.
struct InversionResult {
    double value;
    double diagnostic; // |estimate(terms) - estimate(terms-2)|
};

InversionResult laplace_invert(const std::function<double(double)>& transform,
                               double t, const LaplaceInversionSpec& spec = {});

// Fourier-series (Abate-Whitt Euler summation) variant; needs the transform
// on complex arguments.
InversionResult laplace_invert(const std::function<std::complex<double>(std::complex<double>)>& transform,
                               double t, const LaplaceInversionSpec& spec);

// Nested-refinement composite Simpson on [a, b]; doubles the panel count
// until two successive estimates agree within tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSpec& spec = {});

std::complex<double> integrate_adaptive(const std::function<std::complex<double>(double)>& f,
                                        double a, double b, const QuadratureSpec& spec = {});

namespace detail {
template <typename T>
struct is_std_function : std::false_type {};
template <typename S>
struct is_std_function<std::function<S>> : std::true_type {};
} // namespace detail

// lambda-friendly dispatcher; picks the real or complex implementation from
// the callable's return type
template <typename F,
          std::enable_if_t<!detail::is_std_function<std::decay_t<F>>::value, int> = 0>
auto integrate_adaptive(F&& f, double a, double b, const QuadratureSpec& spec = {})
    -> std::invoke_result_t<F&, double>
{
    using R = std::invoke_result_t<F&, double>;
    if constexpr (std::is_same_v<R, std::complex<double>>) {
        const std::function<std::complex<double>(double)> wrapped(std::forward<F>(f));
        return integrate_adaptive(wrapped, a, b, spec);
    } else {
        const std::function<double(double)> wrapped(std::forward<F>(f));
        return integrate_adaptive(wrapped, a, b, spec);
    }
}

// Gaver-Stehfest weights for n terms (n even); exposed for tests.
std::vector<double> gaver_stehfest_weights(int terms);

} // namespace pairwalk
