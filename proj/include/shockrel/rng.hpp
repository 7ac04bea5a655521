#pragma once

#include <concepts>
#include <cstdint>
#include <limits>

namespace shockrel {

/// Anything that yields doubles uniformly distributed on the open interval (0, 1).
template <class R>
concept UniformSource = requires(R& r) {
    { r.uniform() } -> std::convertible_to<double>;
};

namespace detail {

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/**
 * Deterministic splittable uniform stream.
 *
 * Splitting rule: stream `index` under `master_seed` starts from the state
 * mix64(mix64(master_seed) + index) and then advances as a SplitMix64 sequence
 * (state += golden gamma, output = mix64(state)). For a fixed master seed distinct
 * indices give distinct starting states, and no stream depends on how many values
 * any other stream consumed, so replication i always sees the same draws no matter
 * which worker runs it.
 *
 * A stream owns its state; share one across threads only with external locking.
 */
class UniformStream {
  public:
    using result_type = std::uint64_t;

    UniformStream(std::uint64_t master_seed, std::uint64_t index) noexcept
        : state_(detail::mix64(detail::mix64(master_seed) + index)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(state_);
    }

    /// 53-bit uniform on (0, 1); never returns 0 or 1.
    double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

}  // namespace shockrel
