#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ammopt/profit.hpp"
#include "ammopt/solver.hpp"
#include "test_helpers.hpp"

using namespace ammopt;

TEST_CASE("no trade earns exactly zero either way") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto a = AllocationRule::bang_bang(std::nullopt, std::nullopt, 0.2, 2.0, 1.1);
    CHECK(expected_profit_direct(a, d, UpdateRule::noise()) == 0.0);
    CHECK(expected_profit_virtual(a, d, UpdateRule::noise()) == 0.0);
}

TEST_CASE("threshold rule on the uniform: closed-form profit, both routes") {
    // sell side (p_h - p0) P(p >= p_h) + buy side (p0 - p_l) P(p <= p_l)
    //   = 0.45*0.25 + 0.45*0.25 = 0.225
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto u = UpdateRule::noise();
    const auto a = AllocationRule::bang_bang(0.65, 1.55, 0.2, 2.0, 1.1);
    CHECK(expected_profit_direct(a, d, u) == doctest::Approx(0.225).epsilon(1e-9));
    CHECK(expected_profit_virtual(a, d, u) == doctest::Approx(0.225).epsilon(1e-9));
}

TEST_CASE("suboptimal thresholds earn strictly less, on both routes") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto u = UpdateRule::noise();
    const auto a = AllocationRule::bang_bang(0.5, 1.7, 0.2, 2.0, 1.1);
    const double direct = expected_profit_direct(a, d, u);
    const double virt = expected_profit_virtual(a, d, u);
    CHECK(direct < 0.225 - 1e-4);
    CHECK(std::abs(direct - virt) < 1e-6);
}

TEST_CASE("perfect information makes every trade weakly unprofitable") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto u = UpdateRule::perfect_info();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i) {
        const auto a = test_helpers::random_step_rule(rng, d.support(), 1.1);
        CHECK(expected_profit_direct(a, d, u) <= 1e-10);
    }
    const auto zero = AllocationRule::bang_bang(std::nullopt, std::nullopt, 0.2, 2.0, 1.1);
    CHECK(expected_profit_direct(zero, d, u) == 0.0);
}

TEST_CASE("profit equivalence across rules, distributions and update kinds") {
    std::mt19937_64 rng(31);
    std::vector<UpdateRule> rules{UpdateRule::noise(), UpdateRule::linear(0.25),
                                  UpdateRule::linear(0.5), UpdateRule::linear(0.75),
                                  UpdateRule::perfect_info()};
    int idx = 0;
    for (const auto& setup : test_helpers::regular_setups()) {
        for (const auto& u : rules) {
            for (int trial = 0; trial < 3; ++trial, ++idx) {
                const auto a = test_helpers::random_step_rule(rng, setup.dist.support(), setup.p0);
                const ProfitBreakdown pb = profit_breakdown(a, setup.dist, u);
                const double tol = std::max(1e-6, 1e-6 * std::abs(pb.direct));
                INFO(setup.name << " trial " << idx);
                CHECK(pb.abs_gap <= tol);
            }
        }
    }
}

TEST_CASE("threshold search matches the solver on the uniform") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto u = UpdateRule::noise();
    const OracleResult res = oracle_threshold_search(d, u, 1.1, 512);
    REQUIRE(res.best_pl.has_value());
    REQUIRE(res.best_ph.has_value());
    CHECK(std::abs(*res.best_pl - 0.65) <= res.grid_spacing + 1e-12);
    CHECK(std::abs(*res.best_ph - 1.55) <= res.grid_spacing + 1e-12);
    CHECK(res.best_profit <= 0.225 + 1e-9);
    CHECK(res.best_profit >= 0.225 - 2.0 * res.grid_spacing);
}

TEST_CASE("threshold search confirms the published exponential cell") {
    const auto d = PriceDistribution::exponential(2.0);
    const OracleResult res = oracle_threshold_search(d, UpdateRule::noise(), 1.0, 512);
    REQUIRE(res.best_pl.has_value());
    REQUIRE(res.best_ph.has_value());
    CHECK(std::abs(*res.best_pl - 0.396) <= res.grid_spacing + 5e-4);
    CHECK(std::abs(*res.best_ph - 1.5) <= res.grid_spacing + 1e-9);
}

TEST_CASE("threshold search under perfect information keeps both sentinels") {
    for (const auto& setup : test_helpers::regular_setups()) {
        const OracleResult res =
            oracle_threshold_search(setup.dist, UpdateRule::perfect_info(), setup.p0, 128);
        CHECK_FALSE(res.best_pl.has_value());
        CHECK_FALSE(res.best_ph.has_value());
        CHECK(res.best_profit == 0.0);
    }
}

TEST_CASE("nonnegativity: the sentinel keeps the oracle at or above zero") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        const double lo = 0.2 + 0.5 * unif(rng);
        const double hi = lo + 1.0 + unif(rng);
        const double p0 = lo + (hi - lo) * (0.2 + 0.6 * unif(rng));
        const OracleResult res = oracle_threshold_search(PriceDistribution::uniform(lo, hi),
                                                         UpdateRule::linear(unif(rng)), p0, 64);
        CHECK(res.best_profit >= 0.0);
    }
}

TEST_CASE("rules narrower than the support are rejected up front") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto narrow = AllocationRule::bang_bang(0.8, 1.4, 0.5, 1.8, 1.1);
    CHECK_THROWS_AS(expected_profit_direct(narrow, d, UpdateRule::noise()),
                    std::invalid_argument);
}

TEST_CASE("grid_n below 64 is rejected") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    CHECK_THROWS_AS(oracle_threshold_search(d, UpdateRule::noise(), 1.1, 32),
                    std::invalid_argument);
}

TEST_CASE("profit surface rows combine the per-side contributions") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto u = UpdateRule::noise();
    const OracleResult res = oracle_threshold_search(d, u, 1.1, 64, true);
    REQUIRE(res.surface.size() == 64u * 64u);
    // spot-check a few rows against a direct evaluation of the full rule
    for (std::size_t k : {0u, 1000u, 2000u, 4095u}) {
        const auto& row = res.surface[k];
        const auto a = AllocationRule::bang_bang(row[0], row[1], 0.2, 2.0, 1.1);
        CHECK(row[2] == doctest::Approx(expected_profit_direct(a, d, u)).epsilon(1e-7));
    }
}

TEST_CASE("monotone-rule search certifies the threshold shape on the uniform") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const OracleResult res = oracle_monotone_rule_search(d, UpdateRule::noise(), 1.1, 64, 4);
    CHECK(res.uses_only_extreme_levels());
    REQUIRE(res.best_pl.has_value());
    REQUIRE(res.best_ph.has_value());
    CHECK(std::abs(*res.best_pl - 0.65) <= 2.0 * res.grid_spacing);
    CHECK(std::abs(*res.best_ph - 1.55) <= 2.0 * res.grid_spacing);
}

TEST_CASE("monotone-rule search under perfect information stays flat") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const OracleResult res = oracle_monotone_rule_search(d, UpdateRule::perfect_info(), 1.1, 32, 4);
    for (double v : res.levels) CHECK(v == 0.0);
    CHECK(res.best_profit == 0.0);
    CHECK_FALSE(res.best_pl.has_value());
    CHECK_FALSE(res.best_ph.has_value());
}

TEST_CASE("monotone-rule optimum tracks the solver within the grid resolution") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto u = UpdateRule::linear(0.5);
    const OptimalMechanism mech = solve(d, u, 1.1);
    const OracleResult res = oracle_monotone_rule_search(d, u, 1.1, 64, 4);
    CHECK(res.uses_only_extreme_levels());
    CHECK(std::abs(res.best_profit - mech.expected_profit) < 4.0 * res.grid_spacing);
    CHECK(res.best_profit <= mech.expected_profit + 1e-9);
}

TEST_CASE("desk-scale limits of the rule search are enforced") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    CHECK_THROWS_AS(oracle_monotone_rule_search(d, UpdateRule::noise(), 1.1, 128, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle_monotone_rule_search(d, UpdateRule::noise(), 1.1, 32, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle_monotone_rule_search(d, UpdateRule::noise(), 1.1, 32, 10),
                    std::invalid_argument);
}
