#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>

#include "shockrel/distributions.hpp"
#include "shockrel/quadrature.hpp"
#include "shockrel/special_functions.hpp"

// Model 1: the first shock from either of two independent renewal processes fails the
// unit, so the failure time is min(X1, Y1).

namespace shockrel {

struct CatastrophicModel {
    DistributionSpec proc1;  // interarrival law of process 1
    DistributionSpec proc2;  // interarrival law of process 2
};

inline void validate(const CatastrophicModel& m) {
    validate(m.proc1);
    validate(m.proc2);
}

/// P(unit has not failed by t) = S_X(t) S_Y(t).
inline double survival_probability(const CatastrophicModel& m, double t) {
    return survival(m.proc1, t) * survival(m.proc2, t);
}

/// CDF of the first passage time to failure.
inline double fptf_cdf(const CatastrophicModel& m, double t) { return 1.0 - survival_probability(m, t); }

/// Mean failure time by adaptive quadrature of the survival product over [0, inf).
inline double mean_fptf_quadrature(const CatastrophicModel& m, const QuadraturePolicy& q = {}) {
    validate(m);
    const double scale = std::min(mean(m.proc1), mean(m.proc2));
    return integrate_survival([&m](double t) { return survival_probability(m, t); }, scale, q).value;
}

enum class MeanFptfRoute {
    ErlangWithExponential,  // one side has a single phase
    ErlangEqualShape,       // both sides Erlang(m, .) with m >= 2
    WeibullEqualShape,
    Quadrature,
};

namespace detail {

inline std::optional<ErlangView> try_erlang(const DistributionSpec& s) {
    if (!has_closed_form_convolution(s)) return std::nullopt;
    return erlang_parameters(s);
}

}  // namespace detail

inline MeanFptfRoute mean_fptf_route(const CatastrophicModel& m) {
    const auto e1 = detail::try_erlang(m.proc1);
    const auto e2 = detail::try_erlang(m.proc2);
    if (e1 && e2) {
        if (e1->shape == 1 || e2->shape == 1) return MeanFptfRoute::ErlangWithExponential;
        if (e1->shape == e2->shape) return MeanFptfRoute::ErlangEqualShape;
        return MeanFptfRoute::Quadrature;
    }
    const auto* w1 = std::get_if<Weibull>(&m.proc1);
    const auto* w2 = std::get_if<Weibull>(&m.proc2);
    if (w1 && w2 && w1->shape == w2->shape) return MeanFptfRoute::WeibullEqualShape;
    return MeanFptfRoute::Quadrature;
}

/**
 * E[min(X, Y)] for X ~ Erlang(shape, rate_x), Y ~ Exponential(rate_y):
 * sum_{l < shape} rate_x^l / lambda^(l+1) with lambda = rate_x + rate_y.
 */
inline double mean_fptf_erlang_exponential(std::uint64_t shape, double rate_x, double rate_y) {
    const double lambda = rate_x + rate_y;
    const double p = rate_x / lambda;
    double term = 1.0, total = 0.0;
    for (std::uint64_t l = 0; l < shape; ++l) {
        total += term;
        term *= p;
    }
    return total / lambda;
}

/**
 * E[min(X, Y)] for X ~ Erlang(m, rate1), Y ~ Erlang(m, rate2).
 *
 * The survival product e^{-lambda t} (sum_{i<m} (rate1 t)^i/i!)(sum_{j<m} (rate2 t)^j/j!)
 * collects into sum_n t^n e^{-lambda t} sum_l rate1^{n-l} rate2^l / ((n-l)! l!) with both
 * n - l and l below m. Integrating t^n e^{-lambda t} gives n!/lambda^{n+1}, so
 *
 *   mean = (1/lambda) sum_{n=0}^{2m-2} sum_{l=max(0,n-m+1)}^{min(n,m-1)} C(n,l) p1^{n-l} p2^l
 *
 * with p_i = rate_i / lambda: a single binomial weight over a constrained inner range.
 */
inline double mean_fptf_erlang_equal_shape(std::uint64_t m, double rate1, double rate2) {
    const double lambda = rate1 + rate2;
    const double log_p1 = std::log(rate1 / lambda);
    const double log_p2 = std::log(rate2 / lambda);
    double total = 0.0;
    for (std::uint64_t n = 0; n + 1 < 2 * m; ++n) {
        const std::uint64_t lo = n + 1 > m ? n + 1 - m : 0;
        const std::uint64_t hi = std::min(n, m - 1);
        for (std::uint64_t l = lo; l <= hi; ++l) {
            total += std::exp(special::log_binomial(n, l) + static_cast<double>(n - l) * log_p1 +
                              static_cast<double>(l) * log_p2);
        }
    }
    return total / lambda;
}

namespace detail {

/**
 * One-time check of the equal-shape closed form against quadrature on a small grid of
 * shapes and rates. The closed-form branch is used only if every point agrees to 1e-8.
 */
inline bool equal_shape_form_verified() {
    static const bool verified = [] {
        for (std::uint64_t m = 1; m <= 4; ++m) {
            for (double r1 : {0.5, 1.0, 2.0}) {
                for (double r2 : {0.5, 1.0, 3.0}) {
                    const double closed = mean_fptf_erlang_equal_shape(m, r1, r2);
                    const double reference = mean_fptf_quadrature({Erlang{m, r1}, Erlang{m, r2}});
                    if (!(std::abs(closed - reference) <= 1e-8 * reference)) return false;
                }
            }
        }
        return true;
    }();
    return verified;
}

}  // namespace detail

/// (scale1^-a + scale2^-a)^(-1/a) Gamma(1 + 1/a) for two Weibull laws sharing shape a.
inline double mean_fptf_weibull_equal_shape(double shape, double scale1, double scale2) {
    const double rate_sum = std::pow(scale1, -shape) + std::pow(scale2, -shape);
    return std::pow(rate_sum, -1.0 / shape) * std::tgamma(1.0 + 1.0 / shape);
}

/// Mean first passage time to failure, closed form where one exists, quadrature otherwise.
inline double mean_fptf(const CatastrophicModel& m, const QuadraturePolicy& q = {}) {
    validate(m);
    switch (mean_fptf_route(m)) {
        case MeanFptfRoute::ErlangWithExponential: {
            const auto e1 = erlang_parameters(m.proc1);
            const auto e2 = erlang_parameters(m.proc2);
            if (e2.shape == 1) return mean_fptf_erlang_exponential(e1.shape, e1.rate, e2.rate);
            return mean_fptf_erlang_exponential(e2.shape, e2.rate, e1.rate);
        }
        case MeanFptfRoute::ErlangEqualShape: {
            const auto e1 = erlang_parameters(m.proc1);
            const auto e2 = erlang_parameters(m.proc2);
            if (!detail::equal_shape_form_verified()) return mean_fptf_quadrature(m, q);
            return mean_fptf_erlang_equal_shape(e1.shape, e1.rate, e2.rate);
        }
        case MeanFptfRoute::WeibullEqualShape: {
            const auto& w1 = std::get<Weibull>(m.proc1);
            const auto& w2 = std::get<Weibull>(m.proc2);
            return mean_fptf_weibull_equal_shape(w1.shape, w1.scale, w2.scale);
        }
        case MeanFptfRoute::Quadrature:
            break;
    }
    return mean_fptf_quadrature(m, q);
}

}  // namespace shockrel
