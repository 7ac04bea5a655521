#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "shockrel/distributions.hpp"
#include "shockrel/errors.hpp"
#include "shockrel/gamma_convolution.hpp"
#include "shockrel/quadrature.hpp"
#include "shockrel/special_functions.hpp"

// Model 2: shock magnitudes from two processes accumulate into U(t); the unit fails
// once U(t) exceeds the threshold K.

namespace shockrel {

/// Poisson arrivals with Erlang (or exponential) magnitudes on both processes.
struct CumulativeModel {
    double rate1 = 1.0;
    double rate2 = 1.0;
    DistributionSpec mag1 = Exponential{1.0};
    DistributionSpec mag2 = Exponential{1.0};
    double threshold = 1.0;  // K, in damage units
};

/// Renewal arrivals with arbitrary interarrival laws.
struct GeneralCumulativeModel {
    DistributionSpec inter1 = Exponential{1.0};
    DistributionSpec inter2 = Exponential{1.0};
    DistributionSpec mag1 = Exponential{1.0};
    DistributionSpec mag2 = Exponential{1.0};
    double threshold = 1.0;
};

/**
 * Controls truncation of the infinite double series. Each axis keeps terms until the
 * discarded probability mass is below tail_epsilon / 2; since every convolution CDF
 * factor lies in [0, 1], the total truncation error is then at most tail_epsilon.
 */
struct TruncationPolicy {
    double tail_epsilon = 1e-10;
    std::size_t max_terms_per_axis = 100'000;
};

inline void validate(const TruncationPolicy& tr) {
    if (!(tr.tail_epsilon > 0.0 && tr.tail_epsilon <= 1e-3)) {
        throw InvalidParameter("tail_epsilon must lie in (0, 1e-3]");
    }
    if (tr.max_terms_per_axis < 1) throw InvalidParameter("max_terms_per_axis must be positive");
}

inline void validate(const CumulativeModel& m) {
    if (!(m.rate1 > 0.0 && std::isfinite(m.rate1) && m.rate2 > 0.0 && std::isfinite(m.rate2))) {
        throw InvalidParameter("arrival rates must be positive");
    }
    if (!(m.threshold > 0.0 && std::isfinite(m.threshold))) throw InvalidParameter("threshold must be positive");
    validate(m.mag1);
    validate(m.mag2);
    if (!has_closed_form_convolution(m.mag1) || !has_closed_form_convolution(m.mag2)) {
        throw Unsupported("cumulative model magnitudes must be exponential or erlang");
    }
}

/// Checks parameters only; whether the families admit analytic evaluation is checked per operation.
inline void validate(const GeneralCumulativeModel& g) {
    if (!(g.threshold > 0.0 && std::isfinite(g.threshold))) throw InvalidParameter("threshold must be positive");
    validate(g.inter1);
    validate(g.inter2);
    validate(g.mag1);
    validate(g.mag2);
}

namespace detail {

// Poisson(mean) pmf from 0 up to the first index whose cumulative mass reaches 1 - half_eps.
inline std::vector<double> poisson_axis(double mean, double half_eps, std::size_t max_terms, const char* axis) {
    if (mean == 0.0) return {1.0};
    std::vector<double> w;
    double cum = 0.0;
    for (std::uint64_t k = 0; cum < 1.0 - half_eps; ++k) {
        if (w.size() >= max_terms) {
            throw NonConverged(std::string("poisson truncation on ") + axis + " needs more than " +
                               std::to_string(max_terms) + " terms");
        }
        w.push_back(special::poisson_pmf(k, mean));
        cum += w.back();
    }
    return w;
}

// P(N(t) = k) = F^(k)(t) - F^(k+1)(t) for a renewal process, until F^(K+1)(t) <= half_eps.
inline std::vector<double> renewal_axis(const DistributionSpec& inter, double t, double half_eps,
                                        std::size_t max_terms, const char* axis) {
    std::vector<double> w;
    double current = 1.0;  // F^(0)(t)
    for (std::uint64_t k = 0;; ++k) {
        if (w.size() >= max_terms) {
            throw NonConverged(std::string("renewal truncation on ") + axis + " needs more than " +
                               std::to_string(max_terms) + " terms");
        }
        const double next = k_fold_convolution_cdf(inter, k + 1, t);
        w.push_back(current - next);
        if (next <= half_eps) break;
        current = next;
    }
    return w;
}

inline double lattice_sum(const std::vector<double>& w1, const std::vector<double>& w2, std::uint64_t shape1,
                          std::uint64_t shape2, ConvolutionEvaluator& ev) {
    double total = 0.0;
    for (std::size_t k1 = 0; k1 < w1.size(); ++k1) {
        double row = 0.0;
        for (std::size_t k2 = 0; k2 < w2.size(); ++k2) {
            row += w2[k2] * ev.cdf(shape1 * k1, shape2 * k2);
        }
        total += w1[k1] * row;
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace detail

/**
 * P(U(t) <= x): the double series over shock counts (k1, k2) of the convolution CDF
 * of Erlang(m1 k1, mu1) + Erlang(m2 k2, mu2) at x, weighted by the two Poisson pmfs.
 * Truncated per `tr`, so the result undershoots the true value by at most tail_epsilon.
 */
inline double damage_cdf(const CumulativeModel& m, double t, double x, const TruncationPolicy& tr = {}) {
    validate(m);
    validate(tr);
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
    if (!(x >= 0.0)) throw DomainError("damage level must be nonnegative");
    const double half = 0.5 * tr.tail_epsilon;
    const auto w1 = detail::poisson_axis(m.rate1 * t, half, tr.max_terms_per_axis, "process 1");
    const auto w2 = detail::poisson_axis(m.rate2 * t, half, tr.max_terms_per_axis, "process 2");
    const auto e1 = erlang_parameters(m.mag1);
    const auto e2 = erlang_parameters(m.mag2);
    ConvolutionEvaluator ev(e1.rate, e2.rate, x);
    return detail::lattice_sum(w1, w2, e1.shape, e2.shape, ev);
}

/// E[U(t)] = m1 lambda1 t / mu1 + m2 lambda2 t / mu2.
inline double damage_mean(const CumulativeModel& m, double t) {
    validate(m);
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
    const auto e1 = erlang_parameters(m.mag1);
    const auto e2 = erlang_parameters(m.mag2);
    return static_cast<double>(e1.shape) * m.rate1 * t / e1.rate +
           static_cast<double>(e2.shape) * m.rate2 * t / e2.rate;
}

/// P(failure by t) = P(U(t) > K).
inline double model2_fptf_cdf(const CumulativeModel& m, double t, const TruncationPolicy& tr = {}) {
    return 1.0 - damage_cdf(m, t, m.threshold, tr);
}

/// Mean time to failure: integral over t of P(U(t) <= K).
inline double model2_fptf_mean(const CumulativeModel& m, const TruncationPolicy& tr = {},
                               const QuadraturePolicy& q = {}) {
    validate(m);
    validate(tr);
    const double arrivals = m.rate1 + m.rate2;
    const double damage_rate = damage_mean(m, 1.0);
    const double scale = 1.0 / arrivals + m.threshold / damage_rate;
    const auto e1 = erlang_parameters(m.mag1);
    const auto e2 = erlang_parameters(m.mag2);
    const double half = 0.5 * tr.tail_epsilon;
    // One evaluator serves every t: x = K throughout.
    ConvolutionEvaluator ev(e1.rate, e2.rate, m.threshold);
    auto survival = [&](double t) {
        const auto w1 = detail::poisson_axis(m.rate1 * t, half, tr.max_terms_per_axis, "process 1");
        const auto w2 = detail::poisson_axis(m.rate2 * t, half, tr.max_terms_per_axis, "process 2");
        return detail::lattice_sum(w1, w2, e1.shape, e2.shape, ev);
    };
    return integrate_survival(survival, scale, q).value;
}

namespace detail {

inline void require_renewal_closed_form(const GeneralCumulativeModel& g) {
    if (!has_closed_form_convolution(g.inter1) || !has_closed_form_convolution(g.inter2)) {
        throw Unsupported("analytic renewal evaluation needs exponential or erlang interarrivals");
    }
}

}  // namespace detail

/**
 * P(U(t) <= x) for renewal arrivals: the same lattice as damage_cdf with the Poisson
 * weights replaced by renewal increments F^(k)(t) - F^(k+1)(t).
 */
inline double general_damage_cdf(const GeneralCumulativeModel& g, double t, double x,
                                 const TruncationPolicy& tr = {}) {
    validate(g);
    validate(tr);
    detail::require_renewal_closed_form(g);
    if (!has_closed_form_convolution(g.mag1) || !has_closed_form_convolution(g.mag2)) {
        throw Unsupported("analytic damage evaluation needs exponential or erlang magnitudes");
    }
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
    if (!(x >= 0.0)) throw DomainError("damage level must be nonnegative");
    const double half = 0.5 * tr.tail_epsilon;
    const auto w1 = detail::renewal_axis(g.inter1, t, half, tr.max_terms_per_axis, "process 1");
    const auto w2 = detail::renewal_axis(g.inter2, t, half, tr.max_terms_per_axis, "process 2");
    const auto e1 = erlang_parameters(g.mag1);
    const auto e2 = erlang_parameters(g.mag2);
    ConvolutionEvaluator ev(e1.rate, e2.rate, x);
    return detail::lattice_sum(w1, w2, e1.shape, e2.shape, ev);
}

/**
 * Renewal function M(t) = sum_{k>=1} F^(k)(t). Since F^(k+j)(t) <= F^(k)(t) F(t)^j, the
 * terms from k on add at most F^(k)(t) / (1 - F(t)); summation stops once that bound is
 * below tail_epsilon / 2.
 */
inline double renewal_function(const DistributionSpec& inter, double t, const TruncationPolicy& tr = {}) {
    validate(tr);
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
    const double stop = 0.5 * tr.tail_epsilon * survival(inter, t);
    double total = 0.0;
    for (std::uint64_t k = 1;; ++k) {
        if (k > tr.max_terms_per_axis) throw NonConverged("renewal function series did not reach tail_epsilon");
        const double f = k_fold_convolution_cdf(inter, k, t);
        if (f <= stop) break;
        total += f;
    }
    return total;
}

/// E[U(t)] = E[W] M1(t) + E[V] M2(t). Magnitudes may be any family.
inline double general_damage_mean(const GeneralCumulativeModel& g, double t, const TruncationPolicy& tr = {}) {
    validate(g);
    detail::require_renewal_closed_form(g);
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
    return mean(g.mag1) * renewal_function(g.inter1, t, tr) + mean(g.mag2) * renewal_function(g.inter2, t, tr);
}

/// P(failure by t) under renewal arrivals.
inline double general_fptf_cdf(const GeneralCumulativeModel& g, double t, const TruncationPolicy& tr = {}) {
    return 1.0 - general_damage_cdf(g, t, g.threshold, tr);
}

}  // namespace shockrel
