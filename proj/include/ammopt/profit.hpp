#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ammopt/distribution.hpp"
#include "ammopt/mechanism.hpp"
#include "ammopt/update_rule.hpp"

namespace ammopt {

/// Expected profit evaluated two independent ways. For any IC mechanism the
/// two values agree up to quadrature error.
struct ProfitBreakdown {
    double direct = 0.0;          // E[y(p) - pi(p0,p) x(p)]
    double virtual_welfare = 0.0; // E[|x(p)| * virtual value]
    double abs_gap = 0.0;
    double quadrature_error_estimate = 0.0;
};

/// Quadrature of (y(s) - pi(p0,s) x(s)) f(s) over the support, split at p0 and
/// every breakpoint of the rule. Absolute tolerance 1e-8.
double expected_profit_direct(const AllocationRule& a, const PriceDistribution& d,
                              const UpdateRule& u);

/// Virtual-welfare route. The integrand is evaluated in the integration-by-
/// parts form x(s)*((s - pi) f(s) -/+ tail CDF), which never divides by the
/// density and so stays finite through truncated tails.
double expected_profit_virtual(const AllocationRule& a, const PriceDistribution& d,
                               const UpdateRule& u);

ProfitBreakdown profit_breakdown(const AllocationRule& a, const PriceDistribution& d,
                                 const UpdateRule& u);

/// Outcome of a brute-force search over candidate mechanisms. For the
/// threshold search, best_pl/best_ph are grid prices (nullopt = the no-trade
/// sentinel won that side). For the monotone-rule search, cell_edges/levels
/// describe the winning step rule.
struct OracleResult {
    std::optional<double> best_pl;
    std::optional<double> best_ph;
    double best_profit = 0.0;
    double grid_spacing = 0.0;
    std::vector<std::array<double, 3>> surface; // (p_l, p_h, profit) rows when requested

    std::vector<double> cell_edges; // monotone-rule search only
    std::vector<double> levels;     // per-cell allocation levels

    bool uses_only_extreme_levels(double tol = 1e-12) const;
};

/// Evaluates every bang-bang candidate with p_l on a grid over [lo, p0] and
/// p_h on a grid over [p0, hi] (no-trade sentinel included on each side),
/// scoring through the direct payments route only. Ties break toward the
/// smaller gap, then the lower p_l.
OracleResult oracle_threshold_search(const PriceDistribution& d, const UpdateRule& u, double p0,
                                     int grid_n, bool with_surface = false);

/// Dynamic-programming maximization of the discretized virtual-welfare sum
/// over all monotone step rules with levels {-1, -1+2/level_steps, ..., 1},
/// zero at p0 and sign-constrained per side. Desk-scale search certifying the
/// bang-bang shape of the optimum, not just its thresholds.
OracleResult oracle_monotone_rule_search(const PriceDistribution& d, const UpdateRule& u, double p0,
                                         int grid_n, int level_steps);

} // namespace ammopt
