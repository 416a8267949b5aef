#include "ammopt/profit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "ammopt/quadrature.hpp"

namespace ammopt {

namespace {

constexpr double kProfitTol = 1e-8;

std::vector<double> profit_splits(const AllocationRule& a, const PriceDistribution& d) {
    const Support& sup = d.support();
    if (a.domain_lo() > sup.lo || a.domain_hi() < sup.hi) {
        throw std::invalid_argument(
            "expected profit: the rule's domain must cover the distribution support");
    }
    std::vector<double> splits{sup.lo, a.p0(), sup.hi};
    for (double t : a.breakpoints()) {
        if (t > sup.lo && t < sup.hi) splits.push_back(t);
    }
    return splits;
}

} // namespace

namespace {

QuadResult direct_profit_quad(const AllocationRule& a, const PriceDistribution& d,
                              const UpdateRule& u) {
    const double p0 = a.p0();
    const auto integrand = [&](double s) {
        return (a.payment(s) - u.apply(p0, s) * a.x(s)) * d.pdf(s);
    };
    return integrate_with_splits(integrand, profit_splits(a, d), kProfitTol);
}

QuadResult virtual_welfare_quad(const AllocationRule& a, const PriceDistribution& d,
                                const UpdateRule& u) {
    const double p0 = a.p0();
    const Support& sup = d.support();

    // |x| * phi_u * f = x*((s - pi) f - (1-F)) above p0; |x| * phi_l * f =
    // x*((s - pi) f + F) below. Both follow from one integration by parts.
    const auto upper = [&](double s) {
        return a.x(s) * ((s - u.apply(p0, s)) * d.pdf(s) - (1.0 - d.cdf(s)));
    };
    const auto lower = [&](double s) {
        return a.x(s) * ((s - u.apply(p0, s)) * d.pdf(s) + d.cdf(s));
    };

    std::vector<double> upper_splits{p0, sup.hi};
    std::vector<double> lower_splits{sup.lo, p0};
    for (double t : profit_splits(a, d)) {
        if (t > p0 && t < sup.hi) upper_splits.push_back(t);
        if (t > sup.lo && t < p0) lower_splits.push_back(t);
    }
    const QuadResult hi_part = integrate_with_splits(upper, upper_splits, 0.5 * kProfitTol);
    const QuadResult lo_part = integrate_with_splits(lower, lower_splits, 0.5 * kProfitTol);
    return {hi_part.value + lo_part.value, hi_part.error_estimate + lo_part.error_estimate,
            hi_part.evaluations + lo_part.evaluations};
}

} // namespace

double expected_profit_direct(const AllocationRule& a, const PriceDistribution& d,
                              const UpdateRule& u) {
    return direct_profit_quad(a, d, u).value;
}

double expected_profit_virtual(const AllocationRule& a, const PriceDistribution& d,
                               const UpdateRule& u) {
    return virtual_welfare_quad(a, d, u).value;
}

ProfitBreakdown profit_breakdown(const AllocationRule& a, const PriceDistribution& d,
                                 const UpdateRule& u) {
    ProfitBreakdown out;
    const QuadResult direct = direct_profit_quad(a, d, u);
    const QuadResult virt = virtual_welfare_quad(a, d, u);
    out.direct = direct.value;
    out.virtual_welfare = virt.value;
    out.abs_gap = std::abs(out.direct - out.virtual_welfare);
    out.quadrature_error_estimate = direct.error_estimate + virt.error_estimate;
    return out;
}

bool OracleResult::uses_only_extreme_levels(double tol) const {
    for (double v : levels) {
        const double av = std::abs(v);
        if (av > tol && std::abs(av - 1.0) > tol) return false;
    }
    return true;
}

OracleResult oracle_threshold_search(const PriceDistribution& d, const UpdateRule& u, double p0,
                                     int grid_n, bool with_surface) {
    if (grid_n < 64) throw std::invalid_argument("oracle_threshold_search: grid_n must be >= 64");
    const Support& sup = d.support();
    if (!sup.interior(p0)) {
        throw std::invalid_argument("oracle_threshold_search: p0 must be interior to the support");
    }

    std::vector<double> lows(grid_n), highs(grid_n);
    std::vector<double> buy(grid_n), sell(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        lows[i] = grid_point(sup.lo, p0, i, grid_n - 1);
        highs[i] = grid_point(p0, sup.hi, i, grid_n - 1);
    }
    for (int i = 0; i < grid_n; ++i) {
        buy[i] = expected_profit_direct(
            AllocationRule::bang_bang(lows[i], std::nullopt, sup.lo, sup.hi, p0), d, u);
        sell[i] = expected_profit_direct(
            AllocationRule::bang_bang(std::nullopt, highs[i], sup.lo, sup.hi, p0), d, u);
    }

    OracleResult res;
    res.grid_spacing = std::max((p0 - sup.lo) / (grid_n - 1), (sup.hi - p0) / (grid_n - 1));

    // Each side independently: the sentinel (profit 0) stands unless strictly
    // beaten; among equal-profit candidates the smaller gap wins (larger p_l,
    // smaller p_h).
    double best_buy = 0.0;
    int best_i = -1;
    for (int i = 0; i < grid_n; ++i) {
        if (buy[i] > best_buy || (best_i >= 0 && buy[i] == best_buy && lows[i] > lows[best_i])) {
            best_buy = buy[i];
            best_i = i;
        }
    }
    double best_sell = 0.0;
    int best_j = -1;
    for (int j = 0; j < grid_n; ++j) {
        if (sell[j] > best_sell || (best_j >= 0 && sell[j] == best_sell && highs[j] < highs[best_j])) {
            best_sell = sell[j];
            best_j = j;
        }
    }

    res.best_pl = best_i >= 0 ? std::optional<double>(lows[best_i]) : std::nullopt;
    res.best_ph = best_j >= 0 ? std::optional<double>(highs[best_j]) : std::nullopt;
    res.best_profit = best_buy + best_sell;

    if (with_surface) {
        res.surface.reserve(static_cast<std::size_t>(grid_n) * grid_n);
        for (int i = 0; i < grid_n; ++i) {
            for (int j = 0; j < grid_n; ++j) {
                res.surface.push_back({lows[i], highs[j], buy[i] + sell[j]});
            }
        }
    }
    return res;
}

namespace {

// Maximize sum v_i * w_i over non-decreasing v_i drawn from `values`
// (ascending). Returns the chosen value indices. Ties prefer the extreme
// level reachable first when scanning candidates from the outside in.
std::vector<int> monotone_dp(const std::vector<double>& w, const std::vector<double>& values,
                             double& best_value) {
    const int m = static_cast<int>(w.size());
    const int L = static_cast<int>(values.size());
    if (m == 0) {
        best_value = 0.0;
        return {};
    }
    // dp[j][k]: best sum over cells j..m-1 given v_j's index is exactly k.
    std::vector<std::vector<double>> dp(m, std::vector<double>(L, 0.0));
    std::vector<std::vector<int>> next(m, std::vector<int>(L, -1));
    for (int k = 0; k < L; ++k) dp[m - 1][k] = values[k] * w[m - 1];
    for (int j = m - 2; j >= 0; --j) {
        // suffix max over k' >= k of dp[j+1][k']
        double suffix = dp[j + 1][L - 1];
        int arg = L - 1;
        for (int k = L - 1; k >= 0; --k) {
            if (dp[j + 1][k] > suffix) {
                suffix = dp[j + 1][k];
                arg = k;
            }
            dp[j][k] = values[k] * w[j] + suffix;
            next[j][k] = arg;
        }
    }
    double best = dp[0][0];
    int arg = 0;
    for (int k = 1; k < L; ++k) {
        if (dp[0][k] > best) {
            best = dp[0][k];
            arg = k;
        }
    }
    best_value = best;
    std::vector<int> picks(m);
    picks[0] = arg;
    for (int j = 1; j < m; ++j) {
        picks[j] = next[j - 1][picks[j - 1]];
    }
    return picks;
}

} // namespace

OracleResult oracle_monotone_rule_search(const PriceDistribution& d, const UpdateRule& u, double p0,
                                         int grid_n, int level_steps) {
    if (grid_n < 2 || grid_n > 64) {
        throw std::invalid_argument("oracle_monotone_rule_search: grid_n must be in [2, 64]");
    }
    if (level_steps < 2 || level_steps > 8 || level_steps % 2 != 0) {
        throw std::invalid_argument(
            "oracle_monotone_rule_search: level_steps must be an even count in [2, 8]");
    }
    const Support& sup = d.support();
    if (!sup.interior(p0)) {
        throw std::invalid_argument("oracle_monotone_rule_search: p0 must be interior");
    }

    // Virtual-welfare weight of a cell under |x| = 1, in integration-by-parts form.
    const auto upper_w = [&](double a, double b) {
        const auto f = [&](double s) {
            return (s - u.apply(p0, s)) * d.pdf(s) - (1.0 - d.cdf(s));
        };
        return integrate_adaptive(f, a, b, 1e-10).value;
    };
    const auto lower_w = [&](double a, double b) {
        const auto f = [&](double s) {
            return (u.apply(p0, s) - s) * d.pdf(s) - d.cdf(s);
        };
        return integrate_adaptive(f, a, b, 1e-10).value;
    };

    std::vector<double> lo_edges(grid_n + 1), hi_edges(grid_n + 1);
    for (int i = 0; i <= grid_n; ++i) {
        lo_edges[i] = grid_point(sup.lo, p0, i, grid_n);
        hi_edges[i] = grid_point(p0, sup.hi, i, grid_n);
    }
    std::vector<double> w_lo(grid_n), w_hi(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        w_lo[i] = lower_w(lo_edges[i], lo_edges[i + 1]);
        w_hi[i] = upper_w(hi_edges[i], hi_edges[i + 1]);
    }

    // Magnitudes |x| from the level set intersected with each side's sign range.
    std::vector<double> mags;
    for (int k = 0; k <= level_steps / 2; ++k) {
        mags.push_back(2.0 * k / level_steps);
    }

    // Upper side: |x| non-decreasing left to right.
    double best_hi = 0.0;
    std::vector<int> picks_hi = monotone_dp(w_hi, mags, best_hi);

    // Lower side: |x| non-increasing left to right == non-decreasing on the
    // reversed cell order.
    std::vector<double> w_lo_rev(w_lo.rbegin(), w_lo.rend());
    double best_lo = 0.0;
    std::vector<int> picks_lo_rev = monotone_dp(w_lo_rev, mags, best_lo);

    OracleResult res;
    res.best_profit = best_hi + best_lo;
    res.grid_spacing = std::max((p0 - sup.lo) / grid_n, (sup.hi - p0) / grid_n);

    res.cell_edges = lo_edges;
    res.cell_edges.insert(res.cell_edges.end(), hi_edges.begin() + 1, hi_edges.end());
    res.levels.resize(2 * static_cast<std::size_t>(grid_n));
    for (int i = 0; i < grid_n; ++i) {
        res.levels[i] = -mags[picks_lo_rev[grid_n - 1 - i]];
        res.levels[grid_n + i] = mags[picks_hi[i]];
    }

    // Thresholds implied by the winning rule (right edge of the last buying
    // cell; left edge of the first selling cell).
    for (int i = grid_n - 1; i >= 0; --i) {
        if (res.levels[i] < -1e-12) {
            res.best_pl = lo_edges[i + 1];
            break;
        }
    }
    for (int i = 0; i < grid_n; ++i) {
        if (res.levels[grid_n + i] > 1e-12) {
            res.best_ph = hi_edges[i];
            break;
        }
    }
    return res;
}

} // namespace ammopt
