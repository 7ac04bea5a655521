#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "shockrel/errors.hpp"

namespace shockrel {

namespace detail {

inline double parse_real(std::string_view s, const char* what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw InvalidParameter(std::string("cannot parse ") + what + " \"" + std::string(s) + "\"");
    }
    return v;
}

}  // namespace detail

/// Grid points must be finite, nonnegative and strictly increasing.
inline void validate_grid_points(const std::vector<double>& pts) {
    if (pts.empty()) throw InvalidParameter("grid has no points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i] >= 0.0 && std::isfinite(pts[i]))) throw InvalidParameter("grid points must be nonnegative");
        if (i > 0 && !(pts[i] > pts[i - 1])) throw InvalidParameter("grid points must be strictly increasing");
    }
}

/**
 * "MIN:MAX:STEPS": STEPS uniformly spaced points with both endpoints included.
 * STEPS = 1 is allowed only when MIN == MAX.
 */
inline std::vector<double> parse_grid(std::string_view spec) {
    const auto c1 = spec.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : spec.find(':', c1 + 1);
    if (c2 == std::string_view::npos || spec.find(':', c2 + 1) != std::string_view::npos) {
        throw InvalidParameter("grid must look like MIN:MAX:STEPS");
    }
    const double lo = detail::parse_real(spec.substr(0, c1), "grid minimum");
    const double hi = detail::parse_real(spec.substr(c1 + 1, c2 - c1 - 1), "grid maximum");
    const auto steps_text = spec.substr(c2 + 1);
    std::size_t steps = 0;
    const auto [ptr, ec] = std::from_chars(steps_text.data(), steps_text.data() + steps_text.size(), steps);
    if (ec != std::errc{} || ptr != steps_text.data() + steps_text.size() || steps < 1) {
        throw InvalidParameter("grid STEPS must be a positive integer");
    }
    if (!(lo <= hi)) throw InvalidParameter("grid minimum exceeds maximum");
    if (steps == 1 && lo != hi) throw InvalidParameter("a one-point grid needs MIN == MAX");
    std::vector<double> pts(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        pts[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - (steps > 1 ? 1 : 0));
    }
    pts.back() = hi;
    validate_grid_points(pts);
    return pts;
}

/// Comma-separated explicit points, e.g. "0.1,0.5,2".
inline std::vector<double> parse_points(std::string_view list) {
    std::vector<double> pts;
    std::size_t start = 0;
    while (true) {
        const auto comma = list.find(',', start);
        pts.push_back(detail::parse_real(list.substr(start, comma - start), "grid point"));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    validate_grid_points(pts);
    return pts;
}

}  // namespace shockrel
