#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "ammopt/errors.hpp"

namespace ammopt {

struct RootResult {
    double root = 0.0;
    double f_at_root = 0.0;
    int iterations = 0;
};

/// Bracketed root refinement: each iteration takes one guaranteed bisection
/// step and then a secant step on the updated bracket when it lands strictly
/// inside. Converges once the bracket width drops below x_tol. Derivative-free,
/// so kinks in f (e.g. at density knots) are harmless.
template <class F>
RootResult find_root_bracketed(F&& f, double lo, double hi, double f_lo, double f_hi,
                               double x_tol, int max_iter = 200) {
    if (f_lo == 0.0) return {lo, 0.0, 0};
    if (f_hi == 0.0) return {hi, 0.0, 0};
    if (!(lo < hi) || (f_lo > 0.0) == (f_hi > 0.0)) {
        throw NumericalError("find_root_bracketed: invalid bracket");
    }

    auto place = [&](double x, double fx) {
        if (fx == 0.0) {
            lo = hi = x;
            f_lo = f_hi = 0.0;
            return true;
        }
        if ((fx > 0.0) == (f_lo > 0.0)) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        return false;
    };

    int iter = 0;
    while (hi - lo > x_tol && iter < max_iter) {
        ++iter;
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (place(mid, f(mid))) break;

        const double denom = f_hi - f_lo;
        if (denom != 0.0) {
            const double s = lo - f_lo * (hi - lo) / denom;
            if (s > lo && s < hi) {
                if (place(s, f(s))) break;
            }
        }
    }
    if (hi - lo > x_tol) {
        throw NumericalError("find_root_bracketed: no convergence within iteration limit");
    }
    const double root = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
    return {root, std::abs(f_lo) <= std::abs(f_hi) ? f_lo : f_hi, iter};
}

/// Scans f on an n-cell uniform grid over [a, b] and returns the cells where
/// the sign changes, as (left, right, f_left, f_right) brackets. A zero hit
/// exactly on a grid point yields one bracket, attached to the cell on its
/// left (degenerate [a, a] when the zero sits at the start).
template <class F>
std::vector<std::array<double, 4>> scan_sign_changes(F&& f, double a, double b, int n) {
    std::vector<std::array<double, 4>> brackets;
    double prev_x = a;
    double prev_f = f(a);
    if (prev_f == 0.0) brackets.push_back({a, a, 0.0, 0.0});
    for (int i = 1; i <= n; ++i) {
        const double x = a + (b - a) * static_cast<double>(i) / n;
        const double fx = f(x);
        if (prev_f != 0.0 && (fx == 0.0 || (prev_f > 0.0) != (fx > 0.0))) {
            brackets.push_back({prev_x, x, prev_f, fx});
        }
        prev_x = x;
        prev_f = fx;
    }
    return brackets;
}

} // namespace ammopt
