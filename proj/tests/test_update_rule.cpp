#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ammopt/update_rule.hpp"

using namespace ammopt;

TEST_CASE("linear blend at the extremes and in between") {
    CHECK(UpdateRule::linear(1.0).apply(1.0, 1.7) == 1.0);  // pure noise: keep p0
    CHECK(UpdateRule::linear(0.0).apply(1.0, 1.7) == 1.7);  // perfect info: adopt the report
    CHECK(UpdateRule::linear(0.25).apply(1.0, 2.0) == doctest::Approx(1.75).epsilon(1e-15));
}

TEST_CASE("noise and perfect_info kinds") {
    CHECK(UpdateRule::noise().apply(1.3, 0.4) == 1.3);
    CHECK(UpdateRule::perfect_info().apply(1.3, 0.4) == 0.4);
}

TEST_CASE("fixed point is exact for every kind") {
    const double p0s[] = {0.3, 0.7, 1.1, 1.9};
    const double lambdas[] = {0.0, 0.3, 0.5, 0.77, 1.0};
    for (double p0 : p0s) {
        CHECK(UpdateRule::noise().apply(p0, p0) == p0);
        CHECK(UpdateRule::perfect_info().apply(p0, p0) == p0);
        for (double l : lambdas) {
            CHECK(UpdateRule::linear(l).apply(p0, p0) == p0);
        }
    }
}

TEST_CASE("linear rule is affine in the report") {
    const auto u = UpdateRule::linear(0.35);
    const double p0 = 1.1;
    for (double a : {0.3, 0.8, 1.4}) {
        for (double b : {0.6, 1.2, 1.9}) {
            const double mid = u.apply(p0, 0.5 * (a + b));
            const double avg = 0.5 * (u.apply(p0, a) + u.apply(p0, b));
            CHECK(std::abs(mid - avg) < 1e-12);
        }
    }
}

TEST_CASE("updates are monotone in the report") {
    const auto rules = {UpdateRule::noise(), UpdateRule::perfect_info(), UpdateRule::linear(0.4)};
    for (const auto& u : rules) {
        double prev = u.apply(1.1, 0.2);
        for (int i = 1; i <= 200; ++i) {
            const double p_hat = 0.2 + 1.8 * i / 200.0;
            const double cur = u.apply(1.1, p_hat);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("lambda from prior and observation variances") {
    CHECK(UpdateRule::lambda_from_variances(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(UpdateRule::lambda_from_variances(1.0, 0.0) == 0.0);
    CHECK(UpdateRule::lambda_from_variances(1.0, 3.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(UpdateRule::lambda_from_variances(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(UpdateRule::lambda_from_variances(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("lambda outside [0,1] is rejected") {
    CHECK_THROWS_AS(UpdateRule::linear(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(UpdateRule::linear(1.1), std::invalid_argument);
}

TEST_CASE("validation passes for the static rule on any distribution") {
    const auto d = PriceDistribution::exponential(1.0);
    const auto rep = validate_assumption1(UpdateRule::noise(), d, 0.9);
    CHECK(rep.betweenness_ok);
    CHECK(rep.monotonicity_ok);
    CHECK(rep.fixed_point_ok);
    CHECK(rep.consistency_ok);
    CHECK(rep.all_pass());
}

TEST_CASE("consistency holds for the linear rule exactly at the mean") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto u = UpdateRule::linear(0.5);

    const auto at_mean = validate_assumption1(u, d, 1.1);
    CHECK(at_mean.all_pass());
    CHECK(at_mean.consistency_gap < 1e-9);

    // E[pi] = 0.5*1.4 + 0.5*1.1 = 1.25 != 1.4: flagged, everything else clean
    const auto off_mean = validate_assumption1(u, d, 1.4);
    CHECK(off_mean.betweenness_ok);
    CHECK(off_mean.monotonicity_ok);
    CHECK(off_mean.fixed_point_ok);
    CHECK_FALSE(off_mean.consistency_ok);
    CHECK(off_mean.expected_update == doctest::Approx(1.25).epsilon(1e-9));
}

TEST_CASE("custom rules plug into the same validation") {
    // geometric-mean update: between the two prices, monotone, fixed point
    const auto u = UpdateRule::custom(
        [](double p0, double p_hat) { return std::sqrt(p0 * p_hat); });
    CHECK(u.kind() == UpdateRule::Kind::kCustom);
    CHECK(u.apply(1.0, 4.0) == doctest::Approx(2.0).epsilon(1e-15));

    const auto d = PriceDistribution::uniform(0.2, 2.0);
    const auto rep = validate_assumption1(u, d, 1.1);
    CHECK(rep.betweenness_ok);
    CHECK(rep.monotonicity_ok);
    CHECK(rep.fixed_point_ok);
    CHECK_FALSE(rep.consistency_ok); // E[sqrt(p0 p)] < p0 by concavity

    CHECK_THROWS_AS(UpdateRule::custom(nullptr), std::invalid_argument);
}

TEST_CASE("validation requires an interior p0") {
    const auto d = PriceDistribution::uniform(0.2, 2.0);
    CHECK_THROWS_AS(validate_assumption1(UpdateRule::noise(), d, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(validate_assumption1(UpdateRule::noise(), d, 2.5), std::invalid_argument);
}
