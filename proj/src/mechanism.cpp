#include "ammopt/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ammopt/quadrature.hpp"

namespace ammopt {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

constexpr double kJumpTol = 1e-12;

} // namespace

double DemandCurve::Segment::eval(double p) const {
    return kind == SegmentKind::kConstant ? param : param / std::sqrt(p);
}

double DemandCurve::Segment::neg_slope(double p) const {
    return kind == SegmentKind::kConstant ? 0.0 : 0.5 * param / (p * std::sqrt(p));
}

DemandCurve DemandCurve::steps(std::vector<double> breakpoints, std::vector<double> levels) {
    check(breakpoints.size() >= 2, "DemandCurve::steps: need at least 2 breakpoints");
    check(levels.size() + 1 == breakpoints.size(),
          "DemandCurve::steps: levels must have one entry per interval");
    check(breakpoints.front() >= 0.0, "DemandCurve::steps: prices must be non-negative");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        check(breakpoints[i] < breakpoints[i + 1],
              "DemandCurve::steps: breakpoints must be strictly increasing");
    }
    std::vector<Segment> segs;
    segs.reserve(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        check(levels[i] >= 0.0, "DemandCurve::steps: demand levels must be non-negative");
        segs.push_back({breakpoints[i], breakpoints[i + 1], SegmentKind::kConstant, levels[i]});
    }
    return DemandCurve(std::move(segs));
}

DemandCurve DemandCurve::cpmm(double c, double lo, double hi) {
    check(c > 0.0, "DemandCurve::cpmm: c must be > 0");
    check(lo > 0.0 && lo < hi, "DemandCurve::cpmm: need 0 < lo < hi");
    return DemandCurve({Segment{lo, hi, SegmentKind::kCpmm, c}});
}

double DemandCurve::value(double p) const {
    check(p >= lo() && p <= hi(), "DemandCurve::value: price outside the represented interval");
    // Last segment whose lo <= p (right-continuity); p == hi() falls in the last one.
    std::size_t i = segments_.size() - 1;
    for (; i > 0; --i) {
        if (segments_[i].lo <= p) break;
    }
    return segments_[i].eval(p);
}

double DemandCurve::value_left(double p) const {
    check(p > lo() && p <= hi(), "DemandCurve::value_left: need lo < p <= hi");
    std::size_t i = segments_.size() - 1;
    for (; i > 0; --i) {
        if (segments_[i].lo < p) break;
    }
    return segments_[i].eval(p);
}

bool DemandCurve::is_non_increasing(double tol) const {
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
        const double left = segments_[i].eval(segments_[i].hi);
        const double right = segments_[i + 1].eval(segments_[i + 1].lo);
        if (right > left + tol) return false; // upward jump
    }
    return true; // constant and c/sqrt(p) segments never increase internally
}

std::vector<double> DemandCurve::interior_breakpoints() const {
    std::vector<double> pts;
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) pts.push_back(segments_[i].hi);
    return pts;
}

AllocationRule AllocationRule::from_demand(const DemandCurve& g, double p0) {
    check(p0 > g.lo() && p0 < g.hi(), "AllocationRule: p0 must be interior to the demand interval");
    if (!g.is_non_increasing()) {
        throw NonMonotoneDemandError(
            "AllocationRule: demand curve increases somewhere; no IC payment rule exists");
    }

    AllocationRule a(p0, g.lo(), g.hi());
    for (double t : g.interior_breakpoints()) {
        const double dx = g.value_left(t) - g.value(t);
        if (dx <= kJumpTol) continue;
        if (t >= p0) {
            a.sell_atoms_.push_back({t, dx}); // jump exactly at p0 goes to the sell side
        } else {
            a.buy_atoms_.push_back({t, dx});
        }
    }
    for (const auto& seg : g.segments()) {
        if (seg.kind == DemandCurve::SegmentKind::kCpmm) {
            a.spans_.push_back({seg.lo, seg.hi, seg.param});
        }
    }

    const double max_sell = a.x(a.hi_);
    const double max_buy = -a.x(a.lo_);
    if (max_sell > 1.0 + 1e-9 || max_buy > 1.0 + 1e-9) {
        throw UnitDemandViolationError(
            "AllocationRule: |g(p0) - g(p)| exceeds 1 somewhere on the interval");
    }
    return a;
}

AllocationRule AllocationRule::bang_bang(std::optional<double> p_l, std::optional<double> p_h,
                                         double domain_lo, double domain_hi, double p0) {
    check(domain_lo < p0 && p0 < domain_hi, "bang_bang: p0 must be interior to the domain");
    AllocationRule a(p0, domain_lo, domain_hi);
    if (p_l) {
        check(*p_l >= domain_lo && *p_l <= p0, "bang_bang: p_l must lie in [lo, p0]");
        a.buy_atoms_.push_back({*p_l, 1.0});
    }
    if (p_h) {
        check(*p_h >= p0 && *p_h <= domain_hi, "bang_bang: p_h must lie in [p0, hi]");
        a.sell_atoms_.push_back({*p_h, 1.0});
    }
    return a;
}

double AllocationRule::span_quantity(double a, double b) const {
    if (b <= a) return 0.0;
    double q = 0.0;
    for (const auto& sp : spans_) {
        const double lo = std::max(a, sp.lo);
        const double hi = std::min(b, sp.hi);
        if (hi > lo) q += sp.c * (1.0 / std::sqrt(lo) - 1.0 / std::sqrt(hi));
    }
    return q;
}

double AllocationRule::span_payment(double a, double b) const {
    if (b <= a) return 0.0;
    double y = 0.0;
    for (const auto& sp : spans_) {
        const double lo = std::max(a, sp.lo);
        const double hi = std::min(b, sp.hi);
        if (hi > lo) {
            const double c = sp.c;
            const auto integrand = [c](double s) { return s * 0.5 * c / (s * std::sqrt(s)); };
            const double abs_tol = 1e-13 * (1.0 + c * (std::sqrt(hi) - std::sqrt(lo)));
            y += integrate_adaptive(integrand, lo, hi, abs_tol).value;
        }
    }
    return y;
}

double AllocationRule::x(double p_hat) const {
    check(p_hat >= lo_ && p_hat <= hi_, "AllocationRule::x: price outside domain");
    if (p_hat == p0_) return 0.0;
    if (p_hat > p0_) {
        double q = span_quantity(p0_, p_hat);
        for (const auto& atom : sell_atoms_) {
            if (atom.t <= p_hat) q += atom.dx;
        }
        return q;
    }
    double q = span_quantity(p_hat, p0_);
    for (const auto& atom : buy_atoms_) {
        if (atom.t >= p_hat) q += atom.dx;
    }
    return q == 0.0 ? 0.0 : -q;
}

double AllocationRule::payment(double p_hat) const {
    check(p_hat >= lo_ && p_hat <= hi_, "AllocationRule::payment: price outside domain");
    if (p_hat == p0_) return 0.0;
    if (p_hat > p0_) {
        double y = span_payment(p0_, p_hat);
        for (const auto& atom : sell_atoms_) {
            if (atom.t <= p_hat) y += atom.t * atom.dx;
        }
        return y;
    }
    double y = span_payment(p_hat, p0_);
    for (const auto& atom : buy_atoms_) {
        if (atom.t >= p_hat) y += atom.t * atom.dx;
    }
    return y == 0.0 ? 0.0 : -y;
}

std::vector<double> AllocationRule::breakpoints() const {
    std::vector<double> pts;
    for (const auto& atom : buy_atoms_) pts.push_back(atom.t);
    for (const auto& atom : sell_atoms_) pts.push_back(atom.t);
    for (const auto& sp : spans_) {
        pts.push_back(sp.lo);
        pts.push_back(sp.hi);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

ICReport verify_ic_samples(const std::vector<double>& grid, const std::vector<double>& xs,
                           const std::vector<double>& ys, double tol) {
    ICReport rep;
    rep.tolerance = tol;
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double p = grid[i];
        const double truthful = p * xs[i] - ys[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double deviation = p * xs[j] - ys[j] - truthful;
            if (deviation > rep.worst_violation) {
                rep.worst_violation = deviation;
                rep.at_true_p = p;
                rep.at_reported_p = grid[j];
            }
        }
    }
    rep.pass = rep.worst_violation <= tol;
    return rep;
}

ICReport verify_ic(const AllocationRule& a, int grid_n, double tol) {
    if (grid_n < 2) throw std::invalid_argument("verify_ic: grid_n must be >= 2");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(grid_n) + 8);
    const double lo = a.domain_lo();
    const double hi = a.domain_hi();
    for (int i = 0; i < grid_n; ++i) {
        grid.push_back(grid_point(lo, hi, i, grid_n - 1));
    }
    grid.push_back(a.p0());
    for (double t : a.breakpoints()) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> xs(grid.size()), ys(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        xs[i] = a.x(grid[i]);
        ys[i] = a.payment(grid[i]);
    }
    return verify_ic_samples(grid, xs, ys, tol);
}

} // namespace ammopt
