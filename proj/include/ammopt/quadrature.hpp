#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ammopt/errors.hpp"

namespace ammopt {

/// Fixed-order Gauss-Legendre panel on [-1, 1]. Nodes and weights are found by
/// Newton iteration on the Legendre polynomial, accurate to machine precision.
class GaussLegendreRule {
public:
    explicit GaussLegendreRule(int n) : nodes_(n), weights_(n) {
        constexpr double kPi = 3.14159265358979323846;
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double dz = p1 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            nodes_[i] = -z;
            nodes_[n - 1 - i] = z;
            weights_[i] = weights_[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
    }

    template <class F>
    double apply(F&& f, double a, double b) const {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            sum += weights_[i] * f(mid + half * nodes_[i]);
        }
        return half * sum;
    }

    static const GaussLegendreRule& panel15() {
        static const GaussLegendreRule rule(15);
        return rule;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

/// i-th of n+1 equally spaced points on [a, b] with exact endpoints (the
/// naive a + (b-a)*i/n can overshoot b by an ulp and fall outside a support).
inline double grid_point(double a, double b, int i, int n) {
    if (i <= 0) return a;
    if (i >= n) return b;
    return a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
}

/// Adaptive integration of f over [a, b]: recursive interval bisection on
/// 15-point Gauss-Legendre panels. A subinterval is accepted when the
/// whole-vs-two-halves difference is below its share of abs_tol.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol, int max_depth = 52) {
    QuadResult out;
    if (!(b > a)) return out;
    const auto& gl = GaussLegendreRule::panel15();

    struct Item {
        double a, b, whole, tol;
        int depth;
    };
    std::vector<Item> stack;
    stack.push_back({a, b, gl.apply(f, a, b), abs_tol, 0});
    out.evaluations += 15;

    while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (it.a + it.b);
        const double left = gl.apply(f, it.a, mid);
        const double right = gl.apply(f, mid, it.b);
        out.evaluations += 30;
        const double err = std::abs(left + right - it.whole);
        if (err <= it.tol || it.depth >= max_depth || !(mid > it.a && mid < it.b)) {
            out.value += left + right;
            out.error_estimate += err;
        } else {
            stack.push_back({it.a, mid, left, 0.5 * it.tol, it.depth + 1});
            stack.push_back({mid, it.b, right, 0.5 * it.tol, it.depth + 1});
        }
    }
    return out;
}

/// Integrates f over [splits.front(), splits.back()], splitting a priori at every
/// interior point (breakpoints, kinks). Splits are sorted and deduplicated here.
template <class F>
QuadResult integrate_with_splits(F&& f, std::vector<double> splits, double abs_tol) {
    QuadResult out;
    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
    if (splits.size() < 2) return out;
    const double tol_per_panel = abs_tol / static_cast<double>(splits.size() - 1);
    for (std::size_t i = 0; i + 1 < splits.size(); ++i) {
        const QuadResult part = integrate_adaptive(f, splits[i], splits[i + 1], tol_per_panel);
        out.value += part.value;
        out.error_estimate += part.error_estimate;
        out.evaluations += part.evaluations;
    }
    return out;
}

} // namespace ammopt
