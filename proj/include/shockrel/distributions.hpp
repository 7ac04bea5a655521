#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>

#include "shockrel/errors.hpp"
#include "shockrel/rng.hpp"
#include "shockrel/special_functions.hpp"

namespace shockrel {

struct Exponential {
    double rate;  // 1/time or 1/damage

    bool operator==(const Exponential&) const = default;
};

struct Erlang {
    std::uint64_t shape;  // number of exponential phases, >= 1
    double rate;

    bool operator==(const Erlang&) const = default;
};

struct Weibull {
    double shape;  // alpha
    double scale;  // beta; survival exp(-(t/scale)^shape)

    bool operator==(const Weibull&) const = default;
};

using DistributionSpec = std::variant<Exponential, Erlang, Weibull>;

namespace detail {

inline bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

inline void require_nonnegative(double t, const char* what) {
    if (!(t >= 0.0)) throw DomainError(std::string(what) + " must be nonnegative");
}

// Exponential is evaluated as Erlang with one phase so that the two agree bit for bit.
struct ErlangView {
    std::uint64_t shape;
    double rate;
};

inline ErlangView as_erlang(const Exponential& e) { return {1, e.rate}; }
inline ErlangView as_erlang(const Erlang& e) { return {e.shape, e.rate}; }

inline double erlang_cdf(ErlangView e, double t) { return special::erlang_unit_cdf(e.shape, e.rate * t); }
inline double erlang_survival(ErlangView e, double t) {
    return special::erlang_unit_survival(e.shape, e.rate * t);
}

inline double erlang_pdf(ErlangView e, double t) {
    const double y = e.rate * t;
    if (e.shape == 1) return e.rate * std::exp(-y);
    if (t == 0.0) return 0.0;
    return std::exp(std::log(e.rate) + static_cast<double>(e.shape - 1) * std::log(y) - y -
                    special::log_factorial(e.shape - 1));
}

inline double weibull_hazard_integral(const Weibull& w, double t) { return std::pow(t / w.scale, w.shape); }

}  // namespace detail

inline std::string family_name(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> std::string {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Exponential>) return "exponential";
            else if constexpr (std::is_same_v<D, Erlang>) return "erlang";
            else return "weibull";
        },
        spec);
}

/// Throws InvalidParameter unless every parameter is strictly positive and finite.
inline void validate(const DistributionSpec& spec) {
    std::visit(
        [](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Exponential>) {
                if (!detail::positive_finite(d.rate)) throw InvalidParameter("exponential rate must be positive");
            } else if constexpr (std::is_same_v<D, Erlang>) {
                if (d.shape < 1) throw InvalidParameter("erlang shape must be an integer >= 1");
                if (!detail::positive_finite(d.rate)) throw InvalidParameter("erlang rate must be positive");
            } else {
                if (!detail::positive_finite(d.shape)) throw InvalidParameter("weibull shape must be positive");
                if (!detail::positive_finite(d.scale)) throw InvalidParameter("weibull scale must be positive");
            }
        },
        spec);
}

inline double cdf(const DistributionSpec& spec, double t) {
    detail::require_nonnegative(t, "time");
    return std::visit(
        [t](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Weibull>) return -std::expm1(-detail::weibull_hazard_integral(d, t));
            else return detail::erlang_cdf(detail::as_erlang(d), t);
        },
        spec);
}

inline double survival(const DistributionSpec& spec, double t) {
    detail::require_nonnegative(t, "time");
    return std::visit(
        [t](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Weibull>) return std::exp(-detail::weibull_hazard_integral(d, t));
            else return detail::erlang_survival(detail::as_erlang(d), t);
        },
        spec);
}

/// Density at t. Weibull with shape < 1 is unbounded at the origin and returns +inf there.
inline double pdf(const DistributionSpec& spec, double t) {
    detail::require_nonnegative(t, "time");
    return std::visit(
        [t](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Weibull>) {
                if (t == 0.0) {
                    if (d.shape < 1.0) return std::numeric_limits<double>::infinity();
                    return d.shape == 1.0 ? 1.0 / d.scale : 0.0;
                }
                const double z = t / d.scale;
                return (d.shape / d.scale) * std::pow(z, d.shape - 1.0) * std::exp(-std::pow(z, d.shape));
            } else {
                return detail::erlang_pdf(detail::as_erlang(d), t);
            }
        },
        spec);
}

inline double mean(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Weibull>) return d.scale * std::tgamma(1.0 + 1.0 / d.shape);
            else {
                const auto e = detail::as_erlang(d);
                return static_cast<double>(e.shape) / e.rate;
            }
        },
        spec);
}

/// True for the families whose k-fold convolutions stay in closed form.
inline bool has_closed_form_convolution(const DistributionSpec& spec) {
    return !std::holds_alternative<Weibull>(spec);
}

/// Erlang view of an exponential or Erlang spec; Unsupported for Weibull.
inline detail::ErlangView erlang_parameters(const DistributionSpec& spec) {
    if (const auto* e = std::get_if<Exponential>(&spec)) return detail::as_erlang(*e);
    if (const auto* e = std::get_if<Erlang>(&spec)) return detail::as_erlang(*e);
    throw Unsupported("weibull distribution has no closed-form convolution");
}

/**
 * CDF of the sum of k i.i.d. copies at t.
 *
 * k = 0 is the point mass at the origin (1 for every t >= 0). Exponential(rate) gives
 * Erlang(k, rate); Erlang(m, rate) gives Erlang(k*m, rate). Weibull is only accepted
 * for k <= 1.
 */
inline double k_fold_convolution_cdf(const DistributionSpec& spec, std::uint64_t k, double t) {
    detail::require_nonnegative(t, "time");
    if (k == 0) return 1.0;
    if (std::holds_alternative<Weibull>(spec)) {
        if (k == 1) return cdf(spec, t);
        throw Unsupported("k-fold convolution of a weibull distribution for k >= 2");
    }
    const auto e = erlang_parameters(spec);
    return detail::erlang_cdf({e.shape * k, e.rate}, t);
}

/**
 * One draw from spec. Exponential and Weibull use inversion of the survival function
 * on a single uniform; Erlang sums `shape` exponential draws. Weibull(1, 1/rate) and
 * Exponential(rate) consume the same uniform and return the same value.
 */
template <UniformSource Rng>
double sample(const DistributionSpec& spec, Rng& rng) {
    return std::visit(
        [&rng](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Weibull>) {
                return d.scale * std::pow(-std::log(rng.uniform()), 1.0 / d.shape);
            } else {
                const auto e = detail::as_erlang(d);
                const double inv_rate = 1.0 / e.rate;
                double total = -std::log(rng.uniform()) * inv_rate;
                for (std::uint64_t i = 1; i < e.shape; ++i) total += -std::log(rng.uniform()) * inv_rate;
                return total;
            }
        },
        spec);
}

}  // namespace shockrel
