#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ammopt/mechanism.hpp"

using namespace ammopt;

TEST_CASE("constant-product allocation and payments match the closed forms") {
    const auto g = DemandCurve::cpmm(1.0, 0.25, 4.0);
    const auto a = AllocationRule::from_demand(g, 1.0);

    // x(p) = c*(1/sqrt(p0) - 1/sqrt(p))
    CHECK(a.x(4.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.x(1.0) == 0.0);
    CHECK(a.x(0.25) == doctest::Approx(-1.0).epsilon(1e-12));

    // y(p) = c*(sqrt(p) - sqrt(p0)), via quadrature internally
    CHECK(a.payment(4.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.payment(1.0) == 0.0);
    for (int i = 0; i <= 64; ++i) {
        const double p = 0.25 + (4.0 - 0.25) * i / 64.0;
        const double closed = std::sqrt(p) - 1.0;
        CHECK(a.payment(p) == doctest::Approx(closed).epsilon(1e-9));
    }
}

TEST_CASE("step demand subtraction") {
    const auto g = DemandCurve::steps({0.2, 1.55, 2.0}, {1.0, 0.0});
    const auto a = AllocationRule::from_demand(g, 1.1);
    CHECK(a.x(1.8) == 1.0);
    CHECK(a.x(1.0) == 0.0);
    CHECK(a.x(1.55) == 1.0); // jump included on the trade side
}

TEST_CASE("bang-bang payments are single jump sums") {
    const auto a = AllocationRule::bang_bang(0.65, 1.55, 0.2, 2.0, 1.1);
    CHECK(a.payment(1.8) == doctest::Approx(1.55).epsilon(1e-15));
    CHECK(a.payment(0.3) == doctest::Approx(-0.65).epsilon(1e-15));
    CHECK(a.payment(1.1) == 0.0);
    CHECK(a.x(1.55) == 1.0);
    CHECK(a.x(0.65) == -1.0);
    CHECK(a.x(1.0) == 0.0);
}

TEST_CASE("trader utility at the reference price and in the gap") {
    const auto a = AllocationRule::bang_bang(0.65, 1.55, 0.2, 2.0, 1.1);
    CHECK(a.trader_utility(1.9, 1.1) == 0.0);
    CHECK(a.trader_utility(1.8, 1.8) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(a.trader_utility(1.8, 1.0) == 0.0);
}

TEST_CASE("non-monotone demand is rejected") {
    const auto g = DemandCurve::steps({0.2, 1.0, 2.0}, {0.5, 1.0});
    CHECK_THROWS_AS(AllocationRule::from_demand(g, 1.1), NonMonotoneDemandError);
    CHECK_FALSE(g.is_non_increasing());
}

TEST_CASE("unit-demand bound is enforced against p0") {
    // c = 2 on [0.25, 4] with p0 = 1: |x(0.25)| = 2
    const auto g = DemandCurve::cpmm(2.0, 0.25, 4.0);
    CHECK_THROWS_AS(AllocationRule::from_demand(g, 1.0), UnitDemandViolationError);
    // the same curve is fine around a reference where both sides stay within 1
    const auto narrow = DemandCurve::cpmm(1.0, 0.5, 2.0);
    CHECK_NOTHROW(AllocationRule::from_demand(narrow, 1.0));
}

TEST_CASE("p0 must be interior to the represented interval") {
    const auto g = DemandCurve::cpmm(1.0, 0.25, 4.0);
    CHECK_THROWS_AS(AllocationRule::from_demand(g, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(AllocationRule::from_demand(g, 5.0), std::invalid_argument);
}

TEST_CASE("monotone difference property on a grid") {
    const auto g = DemandCurve::steps({0.2, 0.6, 1.0, 1.4, 2.0}, {1.4, 1.1, 0.7, 0.5});
    const auto a = AllocationRule::from_demand(g, 1.1);
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(0.2 + 1.8 * i / 100.0);
    for (double p : grid) {
        for (double q : grid) {
            CHECK((p - q) * (a.x(p) - a.x(q)) >= -1e-12);
        }
    }
}

TEST_CASE("payment sign follows the trade direction") {
    const auto g = DemandCurve::steps({0.2, 0.6, 1.0, 1.4, 2.0}, {1.4, 1.1, 0.7, 0.5});
    const auto a = AllocationRule::from_demand(g, 1.1);
    for (int i = 0; i <= 200; ++i) {
        const double p = 0.2 + 1.8 * i / 200.0;
        CHECK(a.payment(p) * (p - 1.1) >= -1e-12);
    }
}

TEST_CASE("jump-sum payments agree with a refined Stieltjes sum") {
    const auto g = DemandCurve::steps({0.2, 0.5, 0.9, 1.3, 1.7, 2.0}, {1.6, 1.3, 0.9, 0.6, 0.6});
    const auto a = AllocationRule::from_demand(g, 1.1);

    // independent oracle: sum s* dx over a partition refined at the atoms
    const auto stieltjes = [&](double p_hat) {
        std::vector<double> pts;
        const double lo = std::min(p_hat, 1.1), hi = std::max(p_hat, 1.1);
        for (int i = 0; i <= 4096; ++i) pts.push_back(lo + (hi - lo) * i / 4096.0);
        for (double t : a.breakpoints()) {
            if (t > lo && t < hi) {
                pts.push_back(std::nextafter(t, lo));
                pts.push_back(std::nextafter(t, hi));
            }
        }
        std::sort(pts.begin(), pts.end());
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double mid = 0.5 * (pts[i] + pts[i + 1]);
            sum += mid * (a.x(pts[i + 1]) - a.x(pts[i]));
        }
        return sum;
    };

    for (double p_hat : {0.3, 0.7, 1.0, 1.25, 1.5, 1.9}) {
        const double direct = a.payment(p_hat);
        const double expected = p_hat >= 1.1 ? stieltjes(p_hat) : -stieltjes(p_hat);
        CHECK(direct == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("truthful reporting dominates on solved-style rules") {
    const auto a = AllocationRule::bang_bang(0.65, 1.55, 0.2, 2.0, 1.1);
    const auto rep = verify_ic(a, 201);
    CHECK(rep.pass);
    CHECK(rep.worst_violation <= 1e-9);
}

TEST_CASE("constant-product rule with synthesized payments is IC") {
    const auto g = DemandCurve::cpmm(1.0, 0.25, 4.0);
    const auto a = AllocationRule::from_demand(g, 1.0);
    const auto rep = verify_ic(a, 101);
    CHECK(rep.pass);
}

TEST_CASE("free allocation (zero payments) is caught by the IC check") {
    const auto a = AllocationRule::bang_bang(0.65, 1.55, 0.2, 2.0, 1.1);
    std::vector<double> grid, xs, ys;
    for (int i = 0; i <= 200; ++i) {
        const double p = 0.2 + 1.8 * i / 200.0;
        grid.push_back(p);
        xs.push_back(a.x(p));
        ys.push_back(0.0); // adversarial: keep the allocation, waive the payment
    }
    const auto rep = verify_ic_samples(grid, xs, ys);
    CHECK_FALSE(rep.pass);
    CHECK(rep.worst_violation > 0.1);
}

TEST_CASE("random monotone step rules are IC with synthesized payments") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const double lo = 0.2, hi = 2.0, p0 = 1.1;
        // random monotone non-increasing demand with x(p0)=0 built in
        std::vector<double> bps{lo};
        const int k = 3 + static_cast<int>(unif(rng) * 4);
        for (int i = 0; i < k; ++i) bps.push_back(lo + (hi - lo) * unif(rng));
        bps.push_back(hi);
        std::sort(bps.begin(), bps.end());
        bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
        std::vector<double> levels(bps.size() - 1);
        double level = 2.0;
        for (double& v : levels) {
            // total drop stays below 1 so the unit-demand bound holds from any p0
            level -= unif(rng) * (0.99 / static_cast<double>(levels.size()));
            v = level;
        }
        const auto a = AllocationRule::from_demand(DemandCurve::steps(bps, levels), p0);
        const auto rep = verify_ic(a, 101);
        CHECK(rep.pass);
    }
}
