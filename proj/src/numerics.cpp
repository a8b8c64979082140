#include "pairwalk/numerics.hpp"
#include "pairwalk/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace pairwalk {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kLn2 = 0.693147180559945309417232121458176568;
} // namespace

void QuadratureSpec::check() const {
    if (grid_points < 9) throw InvalidParameter("grid_points must be >= 9");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw InvalidParameter("quadrature tolerances must be positive");
    if (max_refinements < 1) throw InvalidParameter("max_refinements must be >= 1");
}

void LaplaceInversionSpec::check() const {
    if (terms % 2 != 0 || terms < 2 || terms > 18)
        throw InvalidParameter("Gaver-Stehfest terms must be even and in [2, 18]");
}

FourierInvertResult fourier_ring_invert(std::span<const std::complex<double>> slice,
                                        long long v) {
    const std::size_t m = slice.size();
    if (m < 2) throw InvalidParameter("fourier_ring_invert: need at least 2 grid points");
    // grid over [-pi, pi] with identified endpoints: if both ends are present
    // (odd count, f(-pi) == f(pi)) drop the duplicate; the rule is then the
    // plain DFT average over n = m-1 distinct nodes.
    const std::size_t n = (m % 2 == 1) ? m - 1 : m;

    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double kappa = -kPi + 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
        acc += slice[j] * std::complex<double>(std::cos(kappa * v), std::sin(kappa * v));
    }
    acc /= static_cast<double>(n);

    FourierInvertResult out;
    out.value = acc.real();
    out.imag_residual = std::abs(acc.imag());
    out.alias_warning = std::llabs(v) > static_cast<long long>(n / 2);
    return out;
}

std::vector<double> gaver_stehfest_weights(int terms) {
    if (terms % 2 != 0 || terms < 2 || terms > 18)
        throw InvalidParameter("gaver_stehfest_weights: terms must be even and in [2, 18]");
    const int half = terms / 2;
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    std::vector<double> a(static_cast<std::size_t>(terms) + 1, 0.0);
    for (int k = 1; k <= terms; ++k) {
        double sum = 0.0;
        const int j0 = (k + 1) / 2;
        const int j1 = std::min(k, half);
        for (int j = j0; j <= j1; ++j) {
            sum += std::pow(static_cast<double>(j), half) * fact(2 * j) /
                   (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        }
        a[static_cast<std::size_t>(k)] = ((half + k) % 2 == 0 ? 1.0 : -1.0) * sum;
    }
    return a;
}

namespace {

double gaver_stehfest_estimate(const std::function<double(double)>& transform,
                               double t, int terms) {
    const auto a = gaver_stehfest_weights(terms);
    const double w = kLn2 / t;
    double acc = 0.0;
    for (int k = 1; k <= terms; ++k)
        acc += a[static_cast<std::size_t>(k)] * transform(w * k);
    return w * acc;
}

// Abate-Whitt Fourier series with Euler summation.
double fourier_series_estimate(const std::function<std::complex<double>(std::complex<double>)>& transform,
                               double t, int terms) {
    const double A = 18.4;               // ~8 digits of discretisation error
    const int m = terms;                 // Euler average width
    const int n_base = 15 + terms;
    const double h = kPi / t;
    const double x = A / (2.0 * t);

    auto partial = [&](int n) {
        double s = 0.5 * transform(std::complex<double>(x, 0.0)).real();
        for (int k = 1; k <= n; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            s += sign * transform(std::complex<double>(x, k * h)).real();
        }
        return s;
    };

    // Euler-weighted average of consecutive partial sums
    double binom = 1.0;
    double acc = 0.0;
    double norm = std::pow(2.0, -m);
    for (int j = 0; j <= m; ++j) {
        acc += binom * norm * partial(n_base + j);
        binom = binom * (m - j) / (j + 1.0);
    }
    return acc * std::exp(A / 2.0) / t;
}

} // namespace

InversionResult laplace_invert(const std::function<double(double)>& transform,
                               double t, const LaplaceInversionSpec& spec) {
    spec.check();
    if (!(t > 0.0)) throw DomainError("laplace_invert: t must be > 0");
    if (spec.method != InversionMethod::GaverStehfest)
        throw InvalidParameter("real-valued transform callable supports Gaver-Stehfest only");

    const double full = gaver_stehfest_estimate(transform, t, spec.terms);
    const double check = gaver_stehfest_estimate(transform, t, spec.terms - 2);
    InversionResult r{full, std::abs(full - check)};
    if (r.diagnostic > spec.rel_tol * std::abs(full) + spec.abs_tol)
        throw UnstableInversion("Gaver-Stehfest estimates at " + std::to_string(spec.terms) +
                                " and " + std::to_string(spec.terms - 2) +
                                " terms differ by " + std::to_string(r.diagnostic));
    return r;
}

InversionResult laplace_invert(const std::function<std::complex<double>(std::complex<double>)>& transform,
                               double t, const LaplaceInversionSpec& spec) {
    spec.check();
    if (!(t > 0.0)) throw DomainError("laplace_invert: t must be > 0");
    if (spec.method == InversionMethod::GaverStehfest) {
        auto real_transform = [&](double lam) {
            return transform(std::complex<double>(lam, 0.0)).real();
        };
        return laplace_invert(std::function<double(double)>(real_transform), t, spec);
    }
    const double full = fourier_series_estimate(transform, t, spec.terms);
    const double check = fourier_series_estimate(transform, t, spec.terms - 2);
    InversionResult r{full, std::abs(full - check)};
    if (r.diagnostic > spec.rel_tol * std::abs(full) + spec.abs_tol)
        throw UnstableInversion("Fourier-series inversion failed its stability check");
    return r;
}

namespace {

template <typename T>
T simpson_on_grid(const std::function<T(double)>& f, double a, double b, int panels) {
    // panels even; composite Simpson
    const double h = (b - a) / panels;
    T acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        const double x = a + h * i;
        acc += f(x) * ((i % 2 == 1) ? 4.0 : 2.0);
    }
    return acc * (h / 3.0);
}

template <typename T>
T integrate_adaptive_impl(const std::function<T(double)>& f, double a, double b,
                          const QuadratureSpec& spec) {
    spec.check();
    if (a == b) return T{};
    int panels = spec.grid_points - 1; // power of two by construction
    T prev = simpson_on_grid(f, a, b, panels);
    for (int r = 0; r < spec.max_refinements; ++r) {
        panels *= 2;
        T cur = simpson_on_grid(f, a, b, panels);
        const double diff = std::abs(cur - prev);
        if (diff <= spec.abs_tol + spec.rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    throw QuadratureNonConvergence("integrate_adaptive: no convergence after " +
                                   std::to_string(spec.max_refinements) + " refinements");
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSpec& spec) {
    return integrate_adaptive_impl<double>(f, a, b, spec);
}

std::complex<double> integrate_adaptive(const std::function<std::complex<double>(double)>& f,
                                        double a, double b, const QuadratureSpec& spec) {
    return integrate_adaptive_impl<std::complex<double>>(f, a, b, spec);
}

} // namespace pairwalk
