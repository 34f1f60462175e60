// optim.hpp
// Bracketed golden-section search on a closed interval.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "usdqkd/common.hpp"

namespace usdqkd {

struct ScalarOptimum {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section maximisation of a unimodal f on [a, b] down to width tol.
template <class F>
ScalarOptimum golden_section_maximize(F&& f, double a, double b, double tol = 1e-10, int max_iter = 500) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

// Samples f at `samples` uniform points on [lo, hi], then refines the best
// sample by golden section inside its neighbouring cell. Ties go to larger x.
template <class F>
ScalarOptimum bracket_and_maximize(F&& f, double lo, double hi, std::size_t samples = 1024,
                                   double tol = 1e-10) {
    detail::require(hi >= lo, "bracket_and_maximize: empty interval");
    if (hi == lo) return {lo, f(lo)};
    if (samples < 2) samples = 2;
    const double step = (hi - lo) / static_cast<double>(samples - 1);
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = (i + 1 == samples) ? hi : lo + step * static_cast<double>(i);
        const double v = f(x);
        if (v >= best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = best == 0 ? lo : lo + step * static_cast<double>(best - 1);
    const double b = best + 1 >= samples ? hi : lo + step * static_cast<double>(best + 1);
    ScalarOptimum refined = golden_section_maximize(f, a, b, tol);
    const double x_best = (best + 1 == samples) ? hi : lo + step * static_cast<double>(best);
    if (refined.value < best_val) return {x_best, best_val};
    return refined;
}

template <class F>
ScalarOptimum bracket_and_minimize(F&& f, double lo, double hi, std::size_t samples = 1024,
                                   double tol = 1e-10) {
    auto neg = [&](double x) { return -f(x); };
    ScalarOptimum m = bracket_and_maximize(neg, lo, hi, samples, tol);
    return {m.x, -m.value};
}

}  // namespace usdqkd
