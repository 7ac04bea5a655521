#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "shockrel/catastrophic.hpp"
#include "shockrel/cumulative.hpp"
#include "shockrel/distributions.hpp"
#include "shockrel/errors.hpp"
#include "shockrel/rng.hpp"

// Independent simulation oracle for the analytic evaluators.

namespace shockrel {

struct SimulationEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(n)
    std::uint64_t n = 0;
    std::string quantity_tag;
};

/**
 * Replication i always draws from UniformStream(master_seed, i), and every per-replication
 * result lands in a slot indexed by i before any reduction, so summaries are
 * bit-identical for any worker count.
 */
struct SimulationConfig {
    std::uint64_t replications = 100'000;
    std::uint64_t master_seed = 0;
    unsigned workers = 1;
};

inline void validate(const SimulationConfig& cfg) {
    if (cfg.replications < 2) throw InvalidParameter("at least two replications are required");
    if (cfg.workers < 1) throw InvalidParameter("worker count must be positive");
}

/// Events one replication may generate before the simulator gives up.
inline constexpr std::uint64_t kMaxEventsPerReplication = 100'000'000;

namespace detail {

inline constexpr std::uint64_t kBlockSize = 4096;

// Runs body(i) for i in [0, n) on `workers` threads, handing out fixed blocks of indices.
template <class Body>
void for_each_replication(std::uint64_t n, unsigned workers, Body&& body) {
    const std::uint64_t blocks = (n + kBlockSize - 1) / kBlockSize;
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (std::uint64_t b = next++; b < blocks; b = next++) {
                const std::uint64_t end = std::min(n, (b + 1) * kBlockSize);
                for (std::uint64_t i = b * kBlockSize; i < end; ++i) body(i);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = blocks;
        }
    };
    const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

// Two-pass mean and standard error, summed in index order.
inline SimulationEstimate summarize(const std::vector<double>& v, std::string tag) {
    const auto n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double m = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (n - 1.0) / n), v.size(), std::move(tag)};
}

inline SimulationEstimate proportion(std::uint64_t hits, std::uint64_t n, std::string tag) {
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    // Sample variance of a 0/1 indicator is n p (1 - p) / (n - 1).
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n - 1));
    return {p, se, n, std::move(tag)};
}

inline void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidParameter("time grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && std::isfinite(grid[i]))) throw InvalidParameter("grid points must be nonnegative");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidParameter("grid points must be strictly increasing");
    }
}

}  // namespace detail

/// Sorted failure-time draws with the replication-order mean estimate.
class FptfSample {
  public:
    FptfSample(std::vector<double> draws, std::string tag)
        : mean_(detail::summarize(draws, tag)), sorted_(std::move(draws)), tag_(std::move(tag)) {
        std::sort(sorted_.begin(), sorted_.end());
    }

    const SimulationEstimate& mean() const { return mean_; }
    std::uint64_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted() const { return sorted_; }

    /// Exact empirical P(T <= t) = count / n.
    SimulationEstimate ecdf(double t) const {
        const auto hits = static_cast<std::uint64_t>(std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin());
        return detail::proportion(hits, size(), tag_ + ".ecdf");
    }

    /// Exact empirical P(T > t).
    SimulationEstimate survival(double t) const {
        const auto below = static_cast<std::uint64_t>(std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin());
        return detail::proportion(size() - below, size(), tag_ + ".survival");
    }

    std::vector<SimulationEstimate> survival_curve(const std::vector<double>& grid) const {
        std::vector<SimulationEstimate> out;
        out.reserve(grid.size());
        for (double t : grid) out.push_back(survival(t));
        return out;
    }

  private:
    SimulationEstimate mean_;
    std::vector<double> sorted_;
    std::string tag_;
};

/// Per grid time, the sorted U(t) draws and their mean estimate.
class DamageSample {
  public:
    DamageSample(std::vector<double> times, std::vector<std::vector<double>> draws, std::string tag)
        : times_(std::move(times)), tag_(std::move(tag)) {
        for (auto& d : draws) {
            means_.push_back(detail::summarize(d, tag_ + ".mean"));
            std::sort(d.begin(), d.end());
        }
        sorted_ = std::move(draws);
    }

    const std::vector<double>& times() const { return times_; }
    std::uint64_t size() const { return sorted_.empty() ? 0 : sorted_.front().size(); }
    const SimulationEstimate& mean(std::size_t grid_index) const { return means_.at(grid_index); }

    /// Exact empirical P(U(t_j) <= x).
    SimulationEstimate ecdf(std::size_t grid_index, double x) const {
        const auto& v = sorted_.at(grid_index);
        const auto hits = static_cast<std::uint64_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
        return detail::proportion(hits, v.size(), tag_ + ".ecdf");
    }

  private:
    std::vector<double> times_;
    std::vector<std::vector<double>> sorted_;
    std::vector<SimulationEstimate> means_;
    std::string tag_;
};

/// Each replication draws X1 and Y1 and records min(X1, Y1).
inline FptfSample simulate_catastrophic(const CatastrophicModel& m, const SimulationConfig& cfg) {
    validate(m);
    validate(cfg);
    std::vector<double> draws(cfg.replications);
    detail::for_each_replication(cfg.replications, cfg.workers, [&](std::uint64_t i) {
        UniformStream rng(cfg.master_seed, i);
        const double x = sample(m.proc1, rng);
        const double y = sample(m.proc2, rng);
        draws[i] = std::min(x, y);
    });
    return FptfSample(std::move(draws), "catastrophic.fptf");
}

namespace detail {

// Adds the marks of one renewal stream arriving in [0, t_j] to damage[j] for every grid time.
template <class Rng>
void accumulate_stream(const DistributionSpec& inter, const DistributionSpec& mag, const std::vector<double>& grid,
                       Rng& rng, std::vector<double>& damage) {
    const double horizon = grid.back();
    double clock = 0.0;
    double running = 0.0;
    std::size_t j = 0;
    for (std::uint64_t events = 0;; ++events) {
        if (events > kMaxEventsPerReplication) {
            throw SimulationDiagnostic("replication exceeded " + std::to_string(kMaxEventsPerReplication) + " events");
        }
        clock += sample(inter, rng);
        for (; j < grid.size() && grid[j] < clock; ++j) damage[j] += running;
        if (clock > horizon) return;
        running += sample(mag, rng);
    }
}

}  // namespace detail

/// U(t) on a grid under renewal arrivals; any sampleable laws, Weibull included.
inline DamageSample simulate_general_cumulative(const GeneralCumulativeModel& g, const std::vector<double>& t_grid,
                                                const SimulationConfig& cfg) {
    validate(g);
    validate(cfg);
    detail::validate_grid(t_grid);
    std::vector<std::vector<double>> draws(t_grid.size(), std::vector<double>(cfg.replications));
    detail::for_each_replication(cfg.replications, cfg.workers, [&](std::uint64_t i) {
        UniformStream rng(cfg.master_seed, i);
        std::vector<double> damage(t_grid.size(), 0.0);
        detail::accumulate_stream(g.inter1, g.mag1, t_grid, rng, damage);
        detail::accumulate_stream(g.inter2, g.mag2, t_grid, rng, damage);
        for (std::size_t j = 0; j < t_grid.size(); ++j) draws[j][i] = damage[j];
    });
    return DamageSample(t_grid, std::move(draws), "cumulative.damage");
}

inline GeneralCumulativeModel as_renewal_model(const CumulativeModel& m) {
    return {Exponential{m.rate1}, Exponential{m.rate2}, m.mag1, m.mag2, m.threshold};
}

/// U(t) on a grid for two marked Poisson streams.
inline DamageSample simulate_cumulative(const CumulativeModel& m, const std::vector<double>& t_grid,
                                        const SimulationConfig& cfg) {
    validate(m);
    return simulate_general_cumulative(as_renewal_model(m), t_grid, cfg);
}

/**
 * First time U crosses the threshold. Each replication merges both event streams in
 * time order, accumulates marks and stops at the first total above K. Merged event
 * times must be strictly increasing; a tie raises SimulationDiagnostic.
 */
inline FptfSample simulate_fptf_general(const GeneralCumulativeModel& g, const SimulationConfig& cfg) {
    validate(g);
    validate(cfg);
    std::vector<double> draws(cfg.replications);
    detail::for_each_replication(cfg.replications, cfg.workers, [&](std::uint64_t i) {
        UniformStream rng(cfg.master_seed, i);
        double next1 = sample(g.inter1, rng);
        double next2 = sample(g.inter2, rng);
        double last = 0.0;
        double total = 0.0;
        for (std::uint64_t events = 0;; ++events) {
            if (events > kMaxEventsPerReplication) {
                throw SimulationDiagnostic("replication exceeded " + std::to_string(kMaxEventsPerReplication) +
                                           " events before crossing the threshold");
            }
            if (next1 == next2) throw SimulationDiagnostic("simultaneous events in merged shock streams");
            double now;
            if (next1 < next2) {
                now = next1;
                total += sample(g.mag1, rng);
                next1 += sample(g.inter1, rng);
            } else {
                now = next2;
                total += sample(g.mag2, rng);
                next2 += sample(g.inter2, rng);
            }
            if (!(now > last) && events > 0) throw SimulationDiagnostic("merged event times are not increasing");
            last = now;
            if (total > g.threshold) {
                draws[i] = now;
                return;
            }
        }
    });
    return FptfSample(std::move(draws), "cumulative.fptf");
}

inline FptfSample simulate_fptf_cumulative(const CumulativeModel& m, const SimulationConfig& cfg) {
    validate(m);
    return simulate_fptf_general(as_renewal_model(m), cfg);
}

}  // namespace shockrel
