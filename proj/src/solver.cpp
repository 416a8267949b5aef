#include "ammopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ammopt/profit.hpp"
#include "ammopt/quadrature.hpp"
#include "ammopt/root_finding.hpp"

namespace ammopt {

namespace {

constexpr double kRootXTol = 1e-10;
constexpr double kMonotoneTol = 1e-10;
constexpr int kScanGridStart = 4096;
constexpr int kScanGridMax = 1 << 20;
constexpr double kWelfareTol = 1e-8;

} // namespace

VirtualValues::VirtualValues(const PriceDistribution& d, const UpdateRule& u, double p0)
    : d_(&d), u_(u), p0_(p0) {
    if (!d.support().interior(p0)) {
        throw std::invalid_argument("VirtualValues: p0 must be interior to the support");
    }
}

double VirtualValues::upper(double s) const {
    return s - d_->survival_ratio(s) - u_.apply(p0_, s);
}

double VirtualValues::lower(double s) const {
    return u_.apply(p0_, s) - s - d_->cdf_ratio(s);
}

RegularityReport check_regularity(const VirtualValues& v, int grid_n) {
    if (grid_n < 16) throw std::invalid_argument("check_regularity: grid_n must be >= 16");
    const Support& sup = v.dist().support();
    const double p0 = v.p0();

    RegularityReport rep;
    auto scan = [&](double a, double b, bool upper_side) {
        double prev = upper_side ? v.upper(a) : v.lower(a);
        double prev_s = a;
        for (int i = 1; i < grid_n; ++i) {
            const double s = grid_point(a, b, i, grid_n - 1);
            const double val = upper_side ? v.upper(s) : v.lower(s);
            // upper must not decrease, lower must not increase
            const double breach = upper_side ? (prev - val) : (val - prev);
            if (breach > kMonotoneTol) {
                if (upper_side) {
                    rep.upper_monotone = false;
                } else {
                    rep.lower_monotone = false;
                }
                if (breach > rep.worst_violation) {
                    rep.worst_violation = breach;
                    rep.violating_lo = prev_s;
                    rep.violating_hi = s;
                }
            }
            prev = val;
            prev_s = s;
        }
    };
    scan(p0, sup.hi, true);
    scan(sup.lo, p0, false);
    return rep;
}

namespace {

struct SideResult {
    std::optional<double> threshold;
    std::vector<double> roots;
    bool flat_segment = false;
    int scan_grid = 0;
};

// Regular side: the virtual value crosses zero at most once going away from
// p0. `inner` is the endpoint at p0, `outer` the support endpoint.
template <class F>
SideResult solve_regular_side(F&& f, double inner, double outer) {
    SideResult res;
    const double f_inner = f(inner);
    const double f_outer = f(outer);
    if (f_inner >= 0.0) {
        // Virtual value already non-negative at p0 (boundary case): trade
        // starts immediately next to p0.
        res.threshold = inner;
        res.roots.push_back(inner);
        return res;
    }
    if (f_outer <= 0.0) {
        return res; // never positive: no-trade sentinel on this side
    }
    const double lo = std::min(inner, outer);
    const double hi = std::max(inner, outer);
    const double f_lo = lo == inner ? f_inner : f_outer;
    const double f_hi = lo == inner ? f_outer : f_inner;
    const RootResult root = find_root_bracketed(f, lo, hi, f_lo, f_hi, kRootXTol);
    res.threshold = root.root;
    res.roots.push_back(root.root);
    return res;
}

// Irregular side: enumerate every sign-change root on a doubling grid and
// keep the one whose candidate rule earns the most virtual welfare.
template <class F, class WelfareF>
SideResult solve_irregular_side(F&& f, double a, double b, double p0, WelfareF&& welfare) {
    SideResult res;
    double prev_best = std::numeric_limits<double>::quiet_NaN();
    int n = kScanGridStart;
    while (true) {
        std::vector<double> roots;
        bool flat = false;
        double scale = 0.0;
        std::vector<double> fs(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            fs[i] = f(grid_point(a, b, i, n));
            scale = std::max(scale, std::abs(fs[i]));
        }
        const double flat_tol = 1e-12 * std::max(scale, 1e-30);
        int flat_run_start = -1;
        for (int i = 0; i <= n; ++i) {
            const bool near_zero = std::abs(fs[i]) <= flat_tol;
            if (near_zero && flat_run_start < 0) flat_run_start = i;
            if (!near_zero && flat_run_start >= 0) {
                if (i - flat_run_start > 1) {
                    // Whole flat-zero stretch: both endpoints are candidates.
                    flat = true;
                    roots.push_back(grid_point(a, b, flat_run_start, n));
                    roots.push_back(grid_point(a, b, i - 1, n));
                } else {
                    roots.push_back(grid_point(a, b, flat_run_start, n));
                }
                flat_run_start = -1;
            }
            if (i > 0 && fs[i - 1] != 0.0 && fs[i] != 0.0 && (fs[i - 1] > 0.0) != (fs[i] > 0.0)) {
                const double s_prev = grid_point(a, b, i - 1, n);
                const double s_cur = grid_point(a, b, i, n);
                const RootResult root =
                    find_root_bracketed(f, s_prev, s_cur, fs[i - 1], fs[i], kRootXTol);
                roots.push_back(root.root);
            }
        }
        if (flat_run_start >= 0) {
            roots.push_back(grid_point(a, b, flat_run_start, n));
            if (flat_run_start < n) {
                flat = true;
                roots.push_back(b);
            }
        }
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());

        // The no-trade sentinel (welfare 0) stands unless a root strictly
        // beats it; among equal-welfare roots the one nearest p0 wins.
        double best_w = 0.0;
        std::optional<double> best_r;
        double best_dist = std::numeric_limits<double>::infinity();
        for (double r : roots) {
            const double w = welfare(r);
            const double dist = std::abs(r - p0);
            const bool improves = w > best_w + 1e-12;
            const bool ties_previous_root =
                best_r.has_value() && std::abs(w - best_w) <= 1e-12 && dist < best_dist;
            if (improves || ties_previous_root) {
                best_w = w;
                best_r = r;
                best_dist = dist;
            }
        }

        res.roots = roots;
        res.flat_segment = flat;
        res.scan_grid = n;
        res.threshold = best_r;

        const bool converged = !std::isnan(prev_best) && std::abs(best_w - prev_best) <= kWelfareTol;
        if (converged || n >= kScanGridMax) break;
        prev_best = best_w;
        n *= 2;
    }
    return res;
}

} // namespace

Thresholds find_thresholds(const VirtualValues& v) {
    const Support& sup = v.dist().support();
    const double p0 = v.p0();

    Thresholds th;
    th.diagnostics.regularity = check_regularity(v);

    const auto upper_f = [&](double s) { return v.upper(s); };
    const auto lower_f = [&](double s) { return v.lower(s); };

    const PriceDistribution& d = v.dist();
    const UpdateRule& u = v.update();

    if (th.diagnostics.regularity.upper_monotone) {
        SideResult r = solve_regular_side(upper_f, p0, sup.hi);
        th.p_h = r.threshold;
        th.diagnostics.roots_upper = std::move(r.roots);
    } else {
        const auto welfare = [&](double root) {
            return expected_profit_virtual(
                AllocationRule::bang_bang(std::nullopt, root, sup.lo, sup.hi, p0), d, u);
        };
        SideResult r = solve_irregular_side(upper_f, p0, sup.hi, p0, welfare);
        th.p_h = r.threshold;
        th.diagnostics.roots_upper = std::move(r.roots);
        th.diagnostics.flat_segment_upper = r.flat_segment;
        th.diagnostics.scan_grid_upper = r.scan_grid;
    }

    if (th.diagnostics.regularity.lower_monotone) {
        // lower(s) is non-increasing: positive near the lower endpoint (if
        // anywhere), non-positive at p0.
        SideResult r = solve_regular_side(lower_f, p0, sup.lo);
        th.p_l = r.threshold;
        th.diagnostics.roots_lower = std::move(r.roots);
    } else {
        const auto welfare = [&](double root) {
            return expected_profit_virtual(
                AllocationRule::bang_bang(root, std::nullopt, sup.lo, sup.hi, p0), d, u);
        };
        SideResult r = solve_irregular_side(lower_f, sup.lo, p0, p0, welfare);
        th.p_l = r.threshold;
        th.diagnostics.roots_lower = std::move(r.roots);
        th.diagnostics.flat_segment_lower = r.flat_segment;
        th.diagnostics.scan_grid_lower = r.scan_grid;
    }

    return th;
}

OptimalMechanism solve(const PriceDistribution& d, const UpdateRule& u, double p0) {
    VirtualValues v(d, u, p0);
    Thresholds th = find_thresholds(v);
    const Support& sup = d.support();

    OptimalMechanism mech{
        p0,
        th.p_l,
        th.p_h,
        th.p_l.value_or(sup.lo),
        th.p_h.value_or(sup.hi),
        0.0,
        AllocationRule::bang_bang(th.p_l, th.p_h, sup.lo, sup.hi, p0),
        0.0,
        std::move(th.diagnostics),
    };
    mech.gap_length = mech.effective_p_h - mech.effective_p_l;
    mech.expected_profit = expected_profit_direct(mech.allocation, d, u);
    return mech;
}

std::vector<SweepRow> sweep_lambda(const PriceDistribution& d, double p0,
                                   std::vector<double> lambdas) {
    std::sort(lambdas.begin(), lambdas.end());
    const Support& sup = d.support();
    std::vector<SweepRow> rows;
    rows.reserve(lambdas.size());
    for (double lambda : lambdas) {
        const UpdateRule u = UpdateRule::linear(lambda);
        VirtualValues v(d, u, p0);
        Thresholds th = find_thresholds(v);
        SweepRow row;
        row.lambda = lambda;
        row.p_l = th.p_l;
        row.p_h = th.p_h;
        row.effective_p_l = th.p_l.value_or(sup.lo);
        row.effective_p_h = th.p_h.value_or(sup.hi);
        row.gap_length = row.effective_p_h - row.effective_p_l;
        row.regular = th.diagnostics.regularity.regular();
        rows.push_back(row);
    }
    return rows;
}

} // namespace ammopt
