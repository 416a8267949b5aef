#pragma once

#include <optional>
#include <vector>

#include "ammopt/errors.hpp"

namespace ammopt {

/// Piecewise demand curve g(p): the quantity of risky asset the market maker
/// wants to hold at each price. Segments are either constant levels or the
/// constant-product form c/sqrt(p). Jumps at segment boundaries express limit
/// orders. Construction validates structure only; monotonicity is checked
/// where an incentive-compatible pairing is actually required.
class DemandCurve {
public:
    enum class SegmentKind { kConstant, kCpmm };

    struct Segment {
        double lo = 0.0;
        double hi = 0.0;
        SegmentKind kind = SegmentKind::kConstant;
        double param = 0.0; // level for kConstant, liquidity constant c for kCpmm

        double eval(double p) const;
        double neg_slope(double p) const; // -g'(p) inside the segment
    };

    /// Step curve: levels[i] on [breakpoints[i], breakpoints[i+1]).
    static DemandCurve steps(std::vector<double> breakpoints, std::vector<double> levels);
    static DemandCurve cpmm(double c, double lo, double hi);

    double lo() const { return segments_.front().lo; }
    double hi() const { return segments_.back().hi; }

    /// g(p), right-continuous at the interior breakpoints.
    double value(double p) const;
    /// Left limit g(p-); p must be strictly above lo().
    double value_left(double p) const;

    bool is_non_increasing(double tol = 1e-12) const;

    std::vector<double> interior_breakpoints() const;
    const std::vector<Segment>& segments() const { return segments_; }

private:
    explicit DemandCurve(std::vector<Segment> segments) : segments_(std::move(segments)) {}

    std::vector<Segment> segments_;
};

/// Monotone allocation rule x(p_hat) = g(p0) - g(p_hat) together with the
/// unique payment rule y(p_hat) = int_{p0}^{p_hat} s dx(s) that makes truthful
/// reporting optimal. Atoms (jumps of x) pay their location price exactly;
/// smooth constant-product spans are integrated by adaptive quadrature.
///
/// Evaluation at a jump point includes the jump on the trade side: x(p_h) = +1
/// and x(p_l) = -1 for a bang-bang rule. A jump exactly at p0 belongs to the
/// sell side unless tagged otherwise at construction; x(p0) = 0 always.
class AllocationRule {
public:
    struct Atom {
        double t = 0.0;  // price where x jumps
        double dx = 0.0; // jump size, > 0
    };
    struct CpmmSpan {
        double lo = 0.0;
        double hi = 0.0;
        double c = 0.0;
    };

    static AllocationRule from_demand(const DemandCurve& g, double p0);

    /// Threshold rule: x = -1 on [lo, p_l], 0 in the gap, +1 on [p_h, hi].
    /// A disengaged side (never trade) is expressed by passing nullopt.
    static AllocationRule bang_bang(std::optional<double> p_l, std::optional<double> p_h,
                                    double domain_lo, double domain_hi, double p0);

    double p0() const { return p0_; }
    double domain_lo() const { return lo_; }
    double domain_hi() const { return hi_; }

    double x(double p_hat) const;
    double payment(double p_hat) const;
    double trader_utility(double true_p, double reported_p) const {
        return true_p * x(reported_p) - payment(reported_p);
    }

    /// Points where x or y is non-smooth: atom locations and span endpoints.
    /// Quadrature over the rule must split here.
    std::vector<double> breakpoints() const;

    const std::vector<Atom>& sell_atoms() const { return sell_atoms_; }
    const std::vector<Atom>& buy_atoms() const { return buy_atoms_; }

private:
    AllocationRule(double p0, double lo, double hi) : p0_(p0), lo_(lo), hi_(hi) {}

    // x and y contributions of the smooth spans over (a, b), 0 <= a <= b sides handled by caller
    double span_quantity(double a, double b) const;
    double span_payment(double a, double b) const;

    double p0_ = 0.0;
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::vector<Atom> sell_atoms_; // t >= p0, ascending
    std::vector<Atom> buy_atoms_;  // t <= p0, ascending
    std::vector<CpmmSpan> spans_;  // disjoint, ascending
};

/// Exhaustive truthfulness check on a price grid.
struct ICReport {
    double worst_violation = 0.0; // max over (p, p_hat) of u(p, p_hat) - u(p, p)
    double at_true_p = 0.0;
    double at_reported_p = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Checks u(p,p) >= u(p,p_hat) - tol over a grid_n-point grid augmented with
/// every breakpoint and p0.
ICReport verify_ic(const AllocationRule& a, int grid_n, double tol = 1e-9);

/// Same check against externally supplied allocation/payment samples; used to
/// demonstrate that mispriced rules are caught. grid, xs and ys are parallel.
ICReport verify_ic_samples(const std::vector<double>& grid, const std::vector<double>& xs,
                           const std::vector<double>& ys, double tol = 1e-9);

} // namespace ammopt
