#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "shockrel/errors.hpp"
#include "shockrel/special_functions.hpp"

// Inversion of the Laplace-Stieltjes transform
//
//     (rate_a / (s + rate_a))^shape_a * (rate_b / (s + rate_b))^shape_b,
//
// i.e. the CDF of Gamma(shape_a, rate_a) + Gamma(shape_b, rate_b) with integer shapes.

namespace shockrel {

struct ErlangProduct {
    std::uint64_t shape_a = 0;
    double rate_a = 1.0;
    std::uint64_t shape_b = 0;
    double rate_b = 1.0;

    bool operator==(const ErlangProduct&) const = default;
};

/**
 * Transform written as sum_j coeffs_a[j-1] (rate_a/(s+rate_a))^j
 *                    + sum_j coeffs_b[j-1] (rate_b/(s+rate_b))^j.
 * coeffs_a[j-1] multiplies the j-th power; same for coeffs_b.
 */
struct PartialFractionExpansion {
    std::vector<double> coeffs_a;
    std::vector<double> coeffs_b;
    double rate_a = 1.0;
    double rate_b = 1.0;

    /// Sum of absolute coefficients: bounds how much rounding in the Erlang CDFs is amplified.
    double amplification() const {
        double s = 0.0;
        for (double c : coeffs_a) s += std::abs(c);
        for (double d : coeffs_b) s += std::abs(d);
        return s;
    }
};

/// Relative pole separation below which partial fractions are refused.
inline constexpr double kIllConditionedSeparation = 1e-6;

/// Expansions with larger amplification are not used for CDF evaluation.
inline constexpr double kMaxAmplification = 1e4;

namespace detail {

inline void validate_rates(const ErlangProduct& p) {
    if (!(p.rate_a > 0.0 && std::isfinite(p.rate_a) && p.rate_b > 0.0 && std::isfinite(p.rate_b))) {
        throw InvalidParameter("erlang product rates must be positive");
    }
}

inline double relative_separation(double r1, double r2) { return std::abs(r1 - r2) / std::max(r1, r2); }

// Coefficients of the `own` pole for
//   (own/(s+own))^own_shape (other/(s+other))^other_shape.
// With delta = other - own and k = own_shape - j the j-th coefficient is
//   (-1)^k C(other_shape - 1 + k, k) (other/delta)^other_shape (own/delta)^k.
// The magnitudes are carried in logs through the binomial recurrence
//   C(n+1-1+k, k) = C(n-1+k-1, k-1) * (n-1+k)/k and only exponentiated at the end.
inline std::vector<double> pole_coefficients(std::uint64_t own_shape, double own, std::uint64_t other_shape,
                                             double other) {
    const double delta = other - own;
    const double log_other_ratio = std::log(other) - std::log(std::abs(delta));
    const double log_own_ratio = std::log(own) - std::log(std::abs(delta));
    const bool delta_negative = delta < 0.0;
    const double nb = static_cast<double>(other_shape);

    std::vector<double> coeffs(own_shape);
    double log_binom = 0.0;
    for (std::uint64_t k = 0; k < own_shape; ++k) {
        if (k > 0) log_binom += std::log((nb - 1.0 + static_cast<double>(k)) / static_cast<double>(k));
        const double log_mag = log_binom + nb * log_other_ratio + static_cast<double>(k) * log_own_ratio;
        // (-1)^k from the expansion, sign(delta)^(other_shape + k) from the powers of delta.
        bool negative = (k % 2) == 1;
        if (delta_negative && ((other_shape + k) % 2) == 1) negative = !negative;
        const double mag = std::exp(log_mag);
        coeffs[own_shape - 1 - k] = negative ? -mag : mag;
    }
    return coeffs;
}

}  // namespace detail

/**
 * Partial-fraction expansion of the product transform.
 *
 * Throws EqualRates when the two rates coincide (the product is a single Erlang
 * transform) and IllConditioned when their relative separation is below
 * kIllConditionedSeparation. Both shapes must be at least 1.
 */
inline PartialFractionExpansion expand(const ErlangProduct& p) {
    detail::validate_rates(p);
    if (p.shape_a < 1 || p.shape_b < 1) throw InvalidParameter("partial fractions need both shapes >= 1");
    if (p.rate_a == p.rate_b) throw EqualRates("equal rates: merge into Erlang(shape_a + shape_b)");
    if (detail::relative_separation(p.rate_a, p.rate_b) < kIllConditionedSeparation) {
        throw IllConditioned("rates " + std::to_string(p.rate_a) + " and " + std::to_string(p.rate_b) +
                             " are too close for a partial-fraction expansion");
    }
    PartialFractionExpansion out;
    out.rate_a = p.rate_a;
    out.rate_b = p.rate_b;
    out.coeffs_a = detail::pole_coefficients(p.shape_a, p.rate_a, p.shape_b, p.rate_b);
    out.coeffs_b = detail::pole_coefficients(p.shape_b, p.rate_b, p.shape_a, p.rate_a);
    return out;
}

/// The product transform evaluated directly at s > -min(rate).
inline double product_transform(const ErlangProduct& p, double s) {
    return std::pow(p.rate_a / (s + p.rate_a), static_cast<double>(p.shape_a)) *
           std::pow(p.rate_b / (s + p.rate_b), static_cast<double>(p.shape_b));
}

/// The transform reassembled from its partial fractions.
inline double expansion_transform(const PartialFractionExpansion& e, double s) {
    double total = 0.0;
    const double za = e.rate_a / (s + e.rate_a);
    const double zb = e.rate_b / (s + e.rate_b);
    double pa = 1.0, pb = 1.0;
    for (double c : e.coeffs_a) total += c * (pa *= za);
    for (double d : e.coeffs_b) total += d * (pb *= zb);
    return total;
}

/// Thread-safe memo of expansions keyed by (shape_a, rate_a, shape_b, rate_b).
class ExpansionCache {
  public:
    explicit ExpansionCache(std::size_t capacity = 1u << 16) : capacity_(capacity) {}

    std::shared_ptr<const PartialFractionExpansion> get(const ErlangProduct& p) {
        const Key key{p.shape_a, std::bit_cast<std::uint64_t>(p.rate_a), p.shape_b,
                      std::bit_cast<std::uint64_t>(p.rate_b)};
        {
            std::shared_lock lock(mutex_);
            if (auto it = map_.find(key); it != map_.end()) return it->second;
        }
        auto value = std::make_shared<const PartialFractionExpansion>(expand(p));
        std::unique_lock lock(mutex_);
        if (map_.size() >= capacity_) map_.clear();
        return map_.try_emplace(key, std::move(value)).first->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return map_.size();
    }

  private:
    struct Key {
        std::uint64_t shape_a, rate_a, shape_b, rate_b;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            std::uint64_t h = 0x9e3779b97f4a7c15ULL;
            for (std::uint64_t v : {k.shape_a, k.rate_a, k.shape_b, k.rate_b}) {
                h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            }
            return static_cast<std::size_t>(h);
        }
    };

    std::size_t capacity_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<Key, std::shared_ptr<const PartialFractionExpansion>, KeyHash> map_;
};

inline ExpansionCache& default_expansion_cache() {
    static ExpansionCache cache;
    return cache;
}

/**
 * Erlang(j, rate) CDFs at a fixed x for every j, via P(Erlang(j) <= x) = P(Poisson(rate*x) >= j).
 * The pmf is anchored at its mode and extended by ratio recurrences, so rounding enters as a
 * common factor. Entries with j <= rate*x are complements of the (small) lower sum, the rest
 * are upper sums. Indices past rate*x + 40 sd + 60 carry mass far below double resolution
 * and read as 0.
 */
class ErlangCdfTable {
  public:
    ErlangCdfTable(double rate, double x) {
        const double y = rate * x;
        if (y == 0.0) {
            cdf_ = {1.0};
            return;
        }
        const double top = std::ceil(y + 40.0 * std::sqrt(y) + 60.0);
        if (top > 5e7) throw NonConverged("erlang cdf table would exceed 5e7 entries");
        const auto last = static_cast<std::size_t>(top);
        const auto mode = std::min(last, static_cast<std::size_t>(y));
        std::vector<double> pmf(last + 1, 0.0);
        pmf[mode] = std::exp(special::log_poisson_pmf(mode, y));
        for (std::size_t l = mode; l > 0 && pmf[l] > 0.0; --l) pmf[l - 1] = pmf[l] * (static_cast<double>(l) / y);
        for (std::size_t l = mode; l < last && pmf[l] > 0.0; ++l) pmf[l + 1] = pmf[l] * (y / static_cast<double>(l + 1));

        cdf_.assign(last + 2, 0.0);
        const std::size_t split = mode + 1;  // entries below use the lower sum
        double lower = 0.0;
        for (std::size_t j = 0; j < split; ++j) {
            cdf_[j] = 1.0 - lower;
            lower += pmf[j];
        }
        for (std::size_t l = last + 1; l-- > split;) cdf_[l] = cdf_[l + 1] + pmf[l];
        cdf_[0] = 1.0;
    }

    double operator()(std::uint64_t shape) const { return shape < cdf_.size() ? cdf_[shape] : 0.0; }

  private:
    std::vector<double> cdf_;
};

/**
 * Evaluates many convolution CDFs at one damage level x for a fixed pair of rates.
 *
 * Routing for shapes a, b >= 1:
 *   - equal rates: Erlang(a + b) CDF;
 *   - well-separated rates with amplification <= kMaxAmplification: partial fractions;
 *   - otherwise the negative-binomial mixture. Writing r = lo/hi for the two rates,
 *     (lo/(s+lo))^b = sum_n NB(n; b, r) (hi/(s+hi))^(b+n), so the sum is a mixture of
 *     Erlang(a + b + n, hi) laws with nonnegative weights and no cancellation.
 *
 * Not thread-safe; build one per evaluation. The expansion cache it reads is shared.
 */
class ConvolutionEvaluator {
  public:
    ConvolutionEvaluator(double rate_a, double rate_b, double x,
                         ExpansionCache& cache = default_expansion_cache())
        : rate_a_(rate_a), rate_b_(rate_b), table_a_(rate_a, x), table_b_(rate_b, x), cache_(&cache) {
        if (rate_a != rate_b) {
            b_is_low_ = rate_b < rate_a;
            const double hi = std::max(rate_a, rate_b);
            const double lo = std::min(rate_a, rate_b);
            log_r_ = std::log(lo) - std::log(hi);
            log_q_ = std::log((hi - lo) / hi);
            near_equal_ = detail::relative_separation(rate_a, rate_b) < kIllConditionedSeparation;
        }
    }

    double cdf(std::uint64_t shape_a, std::uint64_t shape_b) {
        if (shape_a == 0) return table_b_(shape_b);
        if (shape_b == 0) return table_a_(shape_a);
        if (rate_a_ == rate_b_) return table_a_(shape_a + shape_b);
        // Gamma(a, hi) + Gamma(b, lo) dominates Erlang(a + b, hi), so its CDF is no larger.
        if ((b_is_low_ ? table_a_ : table_b_)(shape_a + shape_b) < 1e-17) return 0.0;
        if (!near_equal_) {
            auto e = cache_->get({shape_a, rate_a_, shape_b, rate_b_});
            if (e->amplification() <= kMaxAmplification) return partial_fraction_cdf(*e);
        }
        return mixture_cdf(shape_a, shape_b);
    }

    double partial_fraction_cdf(const PartialFractionExpansion& e) const {
        double total = 0.0;
        for (std::size_t j = 0; j < e.coeffs_a.size(); ++j) total += e.coeffs_a[j] * table_a_(j + 1);
        for (std::size_t j = 0; j < e.coeffs_b.size(); ++j) total += e.coeffs_b[j] * table_b_(j + 1);
        return std::clamp(total, 0.0, 1.0);
    }

    double mixture_cdf(std::uint64_t shape_a, std::uint64_t shape_b) {
        const std::uint64_t low_shape = b_is_low_ ? shape_b : shape_a;
        const ErlangCdfTable& high = b_is_low_ ? table_a_ : table_b_;
        const std::uint64_t base = shape_a + shape_b;
        auto& weights = weights_[low_shape];
        double total = 0.0;
        double mass = 0.0;
        for (std::size_t n = 0;; ++n) {
            const double e = high(base + n);
            if (e < 1e-17 || 1.0 - mass < 1e-15) break;
            if (n == weights.size()) extend_weights(weights, low_shape);
            total += weights[n] * e;
            mass += weights[n];
        }
        return std::clamp(total, 0.0, 1.0);
    }

  private:
    void extend_weights(std::vector<double>& w, std::uint64_t low_shape) {
        constexpr std::size_t kMaxTerms = 10'000'000;
        if (w.size() >= kMaxTerms) throw NonConverged("negative-binomial mixture needs more than 1e7 terms");
        const std::size_t n = w.size();
        // log NB(n; b, r) = log C(b - 1 + n, n) + b log r + n log q
        const double lw = special::log_binomial(low_shape - 1 + n, n) + static_cast<double>(low_shape) * log_r_ +
                          static_cast<double>(n) * log_q_;
        w.push_back(std::exp(lw));
    }

    double rate_a_, rate_b_;
    ErlangCdfTable table_a_, table_b_;
    ExpansionCache* cache_;
    bool b_is_low_ = false;
    bool near_equal_ = false;
    double log_r_ = 0.0, log_q_ = 0.0;
    std::unordered_map<std::uint64_t, std::vector<double>> weights_;
};

/**
 * CDF of Gamma(shape_a, rate_a) + Gamma(shape_b, rate_b) at x.
 *
 * Zero shapes drop their factor (both zero is the unit step). Equal rates give the
 * Erlang(shape_a + shape_b) CDF exactly as the distributions kernel computes it.
 */
inline double convolution_cdf(const ErlangProduct& p, double x) {
    detail::validate_rates(p);
    if (!(x >= 0.0)) throw DomainError("damage level must be nonnegative");
    if (p.shape_a == 0 && p.shape_b == 0) return 1.0;
    if (p.shape_a == 0) return special::erlang_unit_cdf(p.shape_b, p.rate_b * x);
    if (p.shape_b == 0) return special::erlang_unit_cdf(p.shape_a, p.rate_a * x);
    if (p.rate_a == p.rate_b) return special::erlang_unit_cdf(p.shape_a + p.shape_b, p.rate_a * x);
    ConvolutionEvaluator ev(p.rate_a, p.rate_b, x);
    return ev.cdf(p.shape_a, p.shape_b);
}

/// Same quantity through the negative-binomial mixture only; rates must differ.
inline double mixture_convolution_cdf(const ErlangProduct& p, double x) {
    detail::validate_rates(p);
    if (!(x >= 0.0)) throw DomainError("damage level must be nonnegative");
    if (p.rate_a == p.rate_b) throw EqualRates("mixture route needs distinct rates");
    if (p.shape_a == 0 || p.shape_b == 0) return convolution_cdf(p, x);
    ConvolutionEvaluator ev(p.rate_a, p.rate_b, x);
    return ev.mixture_cdf(p.shape_a, p.shape_b);
}

}  // namespace shockrel
