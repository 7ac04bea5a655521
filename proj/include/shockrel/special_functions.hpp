#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "shockrel/errors.hpp"

// Integer-argument special functions used by the Erlang and Poisson kernels.
// std::lgamma writes the global signgam on glibc, so the log-factorials here are
// computed without it to keep every evaluator reentrant.

namespace shockrel::special {

namespace detail {

inline const std::array<double, 21>& small_log_factorials() {
    static const std::array<double, 21> table = [] {
        std::array<double, 21> t{};
        double f = 1.0;  // exact in binary64 through 20!
        for (std::size_t n = 0; n < t.size(); ++n) {
            if (n > 0) f *= static_cast<double>(n);
            t[n] = std::log(f);
        }
        return t;
    }();
    return table;
}

}  // namespace detail

/// log(n!) to ~1 ulp. Exact factorials below 21, Stirling series with terms through z^-11 above.
inline double log_factorial(std::uint64_t n) {
    if (n < 21) return detail::small_log_factorials()[n];
    const double z = static_cast<double>(n) + 1.0;
    const double iz = 1.0 / z;
    const double iz2 = iz * iz;
    const double series =
        iz * (1.0 / 12.0 -
              iz2 * (1.0 / 360.0 -
                     iz2 * (1.0 / 1260.0 -
                            iz2 * (1.0 / 1680.0 - iz2 * (1.0 / 1188.0 - iz2 * (691.0 / 360360.0))))));
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

/// log C(n, k) for 0 <= k <= n.
inline double log_binomial(std::uint64_t n, std::uint64_t k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

namespace detail {

/// log(n!) - log(sqrt(2 pi n) (n/e)^n), n >= 1.
inline double stirling_error(std::uint64_t n) {
    const double x = static_cast<double>(n);
    if (n <= 15) return log_factorial(n) - (x + 0.5) * std::log(x) + x - 0.5 * std::log(2.0 * std::numbers::pi);
    const double x2 = x * x;
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * x2)) / x2) / x2) / x2) / x;
}

/// x log(x / m) + m - x without cancellation when x is close to m.
inline double deviance_term(double x, double m) {
    if (std::abs(x - m) < 0.1 * (x + m)) {
        const double v = (x - m) / (x + m);
        double s = (x - m) * v;
        double ej = 2.0 * x * v;
        const double v2 = v * v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v2;
            const double next = s + ej / (2 * j + 1);
            if (next == s) return next;
            s = next;
        }
        return s;
    }
    return x * std::log(x / m) + m - x;
}

}  // namespace detail

/**
 * log of the Poisson(mean) probability mass at k; mean > 0. Saddle-point form
 * -log(2 pi k)/2 - stirling_error(k) - deviance(k, mean), accurate to a few ulps even
 * when k log(mean) and log(k!) are both large.
 */
inline double log_poisson_pmf(std::uint64_t k, double mean) {
    if (k == 0) return -mean;
    const double x = static_cast<double>(k);
    return -0.5 * std::log(2.0 * std::numbers::pi * x) - detail::stirling_error(k) - detail::deviance_term(x, mean);
}

inline double poisson_pmf(std::uint64_t k, double mean) {
    if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(log_poisson_pmf(k, mean));
}

/// Regularized lower incomplete gamma P(a, y) for integer a >= 1 and y < a + 1 (power series).
inline double lower_gamma_series(std::uint64_t a, double y) {
    const double ad = static_cast<double>(a);
    double term = 1.0;
    double sum = 1.0;
    for (std::uint64_t n = 1; n < 100000; ++n) {
        term *= y / (ad + static_cast<double>(n));
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return std::exp(log_poisson_pmf(a, y)) * sum;
}

/// Regularized upper incomplete gamma Q(a, y) for y > a by modified Lentz continued fraction.
inline double upper_gamma_continued_fraction(std::uint64_t a, double y) {
    constexpr double tiny = 1e-300;
    const double ad = static_cast<double>(a);
    double b = y + 1.0 - ad;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - ad);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) {
            return y * std::exp(log_poisson_pmf(a - 1, y)) * h;
        }
    }
    throw NonConverged("upper incomplete gamma continued fraction did not converge");
}

/**
 * Survival of the Erlang(shape, 1) law at y, i.e. exp(-y) * sum_{l<shape} y^l / l!.
 *
 * Below the mode the complement of the lower series keeps the small tail accurate.
 * Otherwise the finite sum is accumulated with a multiplicative term recurrence; past
 * y = 700 the leading exp(-y) is too close to underflow and the continued fraction
 * takes over.
 */
inline double erlang_unit_survival(std::uint64_t shape, double y) {
    if (y <= 0.0) return 1.0;
    if (shape == 1) return std::exp(-y);
    if (y < static_cast<double>(shape)) return 1.0 - lower_gamma_series(shape, y);
    if (y <= 700.0) {
        double term = std::exp(-y);
        double sum = term;
        for (std::uint64_t l = 1; l < shape; ++l) {
            term *= y / static_cast<double>(l);
            sum += term;
        }
        return sum;
    }
    return upper_gamma_continued_fraction(shape, y);
}

/// CDF of Erlang(shape, 1) at y; shape 0 is the unit step at the origin.
inline double erlang_unit_cdf(std::uint64_t shape, double y) {
    if (shape == 0) return 1.0;
    if (y <= 0.0) return 0.0;
    if (shape == 1) return -std::expm1(-y);
    if (y < static_cast<double>(shape)) return lower_gamma_series(shape, y);
    return 1.0 - erlang_unit_survival(shape, y);
}

}  // namespace shockrel::special
