#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "shockrel/errors.hpp"

namespace shockrel {

struct QuadraturePolicy {
    double rel_tol = 1e-10;
    double tail_cut = 1e-16;  // survival level below which the integrand is cut off
    std::size_t max_evaluations = 1'000'000;
};

inline void validate(const QuadraturePolicy& q) {
    if (!(q.rel_tol > 0.0 && q.rel_tol < 1.0)) throw InvalidParameter("rel_tol must lie in (0, 1)");
    if (!(q.tail_cut > 0.0 && q.tail_cut < 1.0)) throw InvalidParameter("tail_cut must lie in (0, 1)");
    if (q.max_evaluations < 15) throw InvalidParameter("quadrature budget must allow one panel");
}

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

struct Panel {
    double a, b, value, error, resabs;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// 15-point Kronrod rule with embedded 7-point Gauss rule; error estimate as in QUADPACK qk15.
template <class F>
Panel kronrod15(F& f, double a, double b) {
    static constexpr std::array<double, 8> xgk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wgk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resg = fc * wg[3];
    double resk = fc * wgk[7];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{}, f2{};
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        resk += wgk[j] * (f1[j] + f2[j]);
        resabs += wgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += wg[j / 2] * (f1[j] + f2[j]);
    }
    const double reskh = 0.5 * resk;
    double resasc = wgk[7] * std::abs(fc - reskh);
    for (std::size_t j = 0; j < 7; ++j) resasc += wgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));

    const double value = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {a, b, value, err, resabs};
}

}  // namespace detail

/**
 * Globally adaptive integration of f over the panels delimited by `breakpoints`
 * (sorted, at least two entries). The panel with the largest error estimate is bisected
 * until the summed estimate drops below rel_tol * |integral| (or an absolute floor of
 * 1e-300). Throws NonConverged when the evaluation budget runs out first.
 */
template <class F>
QuadratureResult integrate_adaptive(F&& f, const std::vector<double>& breakpoints, double rel_tol,
                                    std::size_t max_evaluations) {
    if (breakpoints.size() < 2) throw InvalidParameter("integration needs at least one panel");
    std::priority_queue<detail::Panel> panels;
    QuadratureResult out;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        auto p = detail::kronrod15(f, breakpoints[i], breakpoints[i + 1]);
        out.evaluations += 15;
        total += p.value;
        total_err += p.error;
        panels.push(p);
    }
    while (total_err > std::max(rel_tol * std::abs(total), 1e-300)) {
        if (out.evaluations + 30 > max_evaluations) {
            char msg[160];
            std::snprintf(msg, sizeof msg,
                          "adaptive quadrature exhausted its budget of %zu evaluations (estimated error %.3g, target %.3g)",
                          max_evaluations, total_err, rel_tol * std::abs(total));
            throw NonConverged(msg);
        }
        const auto worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw NonConverged("adaptive quadrature cannot bisect below floating-point resolution");
        }
        auto left = detail::kronrod15(f, worst.a, mid);
        auto right = detail::kronrod15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }
    // Re-sum to shed drift from the incremental updates.
    total = 0.0;
    total_err = 0.0;
    while (!panels.empty()) {
        total += panels.top().value;
        total_err += panels.top().error;
        panels.pop();
    }
    out.value = total;
    out.error = total_err;
    return out;
}

/**
 * Integral over [0, inf) of a nonincreasing survival-type function.
 *
 * The upper limit is the first point of the grid scale * 2^k (k = 0, 1, ...) where
 * survival drops below q.tail_cut; the dyadic grid points double as initial panel
 * breakpoints.
 */
template <class F>
QuadratureResult integrate_survival(F&& survival, double scale, const QuadraturePolicy& q) {
    validate(q);
    if (!(scale > 0.0 && std::isfinite(scale))) throw InvalidParameter("integration scale must be positive");
    std::vector<double> breakpoints{0.0, scale};
    std::size_t probes = 0;
    for (double t = scale; survival(t) >= q.tail_cut; t *= 2.0) {
        if (++probes > 1100) throw NonConverged("survival does not fall below tail_cut on a finite horizon");
        breakpoints.push_back(2.0 * t);
    }
    auto r = integrate_adaptive(survival, breakpoints, q.rel_tol, q.max_evaluations);
    r.evaluations += probes + 1;
    return r;
}

}  // namespace shockrel
