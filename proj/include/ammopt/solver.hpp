#pragma once

#include <optional>
#include <vector>

#include "ammopt/distribution.hpp"
#include "ammopt/mechanism.hpp"
#include "ammopt/update_rule.hpp"

namespace ammopt {

/// The pair of Myerson-style virtual value functions bound to a distribution,
/// an update rule and the current price p0:
///   upper(s) = s - (1-F(s))/f(s) - pi(p0, s)
///   lower(s) = pi(p0, s) - s - F(s)/f(s)
/// The sell threshold is a root of upper on [p0, hi]; the buy threshold a root
/// of lower on [lo, p0]. Holds a reference to the distribution; keep it alive.
class VirtualValues {
public:
    VirtualValues(const PriceDistribution& d, const UpdateRule& u, double p0);

    double upper(double s) const;
    double lower(double s) const;

    const PriceDistribution& dist() const { return *d_; }
    const UpdateRule& update() const { return u_; }
    double p0() const { return p0_; }

private:
    const PriceDistribution* d_;
    UpdateRule u_;
    double p0_;
};

/// Monotonicity audit of the virtual value pair: upper must be non-decreasing
/// above p0 and lower non-increasing below, up to 1e-10 on consecutive grid
/// differences.
struct RegularityReport {
    bool upper_monotone = true;
    bool lower_monotone = true;
    double worst_violation = 0.0;
    double violating_lo = 0.0;
    double violating_hi = 0.0;

    bool regular() const { return upper_monotone && lower_monotone; }
};

RegularityReport check_regularity(const VirtualValues& v, int grid_n = 512);

struct SolveDiagnostics {
    std::vector<double> roots_upper;
    std::vector<double> roots_lower;
    RegularityReport regularity;
    bool flat_segment_upper = false;
    bool flat_segment_lower = false;
    int scan_grid_upper = 0; // 0 when the single-root path was taken
    int scan_grid_lower = 0;
};

struct Thresholds {
    std::optional<double> p_l;
    std::optional<double> p_h;
    SolveDiagnostics diagnostics;
};

/// Threshold computation. Regular side: bracketed bisection+secant root to
/// 1e-10, or the no-trade sentinel when the virtual value never turns
/// positive. Irregular side: all sign-change roots on a doubling grid
/// (4096 up to 2^20), each scored by its virtual-welfare integral; the
/// profit-maximizing root wins, ties toward the root nearest p0.
Thresholds find_thresholds(const VirtualValues& v);

/// Solved profit-maximizing mechanism: thresholds, the bang-bang allocation
/// with its payments, the resulting expected profit, and diagnostics.
/// Degenerate sides keep nullopt thresholds; effective_* carry the support
/// endpoints so gap_length is always defined.
struct OptimalMechanism {
    double p0 = 0.0;
    std::optional<double> p_l;
    std::optional<double> p_h;
    double effective_p_l = 0.0;
    double effective_p_h = 0.0;
    double gap_length = 0.0;
    AllocationRule allocation;
    double expected_profit = 0.0;
    SolveDiagnostics diagnostics;
};

OptimalMechanism solve(const PriceDistribution& d, const UpdateRule& u, double p0);

struct SweepRow {
    double lambda = 0.0;
    std::optional<double> p_l;
    std::optional<double> p_h;
    double effective_p_l = 0.0;
    double effective_p_h = 0.0;
    double gap_length = 0.0;
    bool regular = true;
};

/// Thresholds for each linear-rule weight, ordered by ascending lambda. The
/// gap must come out non-increasing in lambda for regular distributions;
/// irregular entries are solved through the multi-root fallback and flagged.
std::vector<SweepRow> sweep_lambda(const PriceDistribution& d, double p0,
                                   std::vector<double> lambdas);

} // namespace ammopt
