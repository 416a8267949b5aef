#pragma once

#include <functional>
#include <utility>

#include "ammopt/distribution.hpp"

namespace ammopt {

/// Belief update rule: the market maker's revised price estimate after a
/// trader reports p_hat. Built-in kinds: noise (keep p0), perfect_info (adopt
/// p_hat), and the linear blend lambda*p0 + (1-lambda)*p_hat. Arbitrary
/// price-to-price maps can be supplied through custom(); they are a code-level
/// extension point only and never appear in run configurations, so everything
/// expressible in a config stays checkable by validate_assumption1.
class UpdateRule {
public:
    enum class Kind { kNoise, kPerfectInfo, kLinear, kCustom };

    static UpdateRule noise() { return UpdateRule(Kind::kNoise, 1.0); }
    static UpdateRule perfect_info() { return UpdateRule(Kind::kPerfectInfo, 0.0); }
    static UpdateRule linear(double lambda);
    /// fn(p0, p_hat) must satisfy the same contract as the built-ins
    /// (betweenness, monotonicity in p_hat, fixed point, consistency); run
    /// validate_assumption1 against the target distribution to check.
    static UpdateRule custom(std::function<double(double, double)> fn);

    Kind kind() const { return kind_; }

    /// Blend weight on p0: 1 for noise, 0 for perfect_info, lambda for linear.
    /// Meaningless for custom rules.
    double weight() const { return lambda_; }

    double apply(double p0, double p_hat) const;

    /// lambda = sigma_eps^2 / (sigma0^2 + sigma_eps^2), the posterior-mean
    /// weight when a normal prior is updated with a noisy normal observation.
    static double lambda_from_variances(double sigma0_sq, double sigma_eps_sq);

private:
    UpdateRule(Kind kind, double lambda) : kind_(kind), lambda_(lambda) {}

    Kind kind_;
    double lambda_;
    std::function<double(double, double)> custom_;
};

/// Result of numerically checking the four update-rule requirements against a
/// distribution at a given p0. Failures are reported, never thrown.
struct Assumption1Report {
    bool betweenness_ok = false;  // pi(p0, p_hat) between p0 and p_hat on the grid
    bool monotonicity_ok = false; // pi non-decreasing in p_hat
    bool fixed_point_ok = false;  // pi(p0, p0) == p0
    bool consistency_ok = false;  // E[pi(p0, p_hat)] == p0
    double worst_betweenness = 0.0;
    double worst_monotonicity = 0.0;
    double fixed_point_error = 0.0;
    double expected_update = 0.0;
    double consistency_gap = 0.0;

    bool all_pass() const {
        return betweenness_ok && monotonicity_ok && fixed_point_ok && consistency_ok;
    }
};

/// Grid checks use 1001 points over the support; consistency is evaluated by
/// adaptive quadrature of pi(p0, s) f(s). p0 must lie in the interior.
Assumption1Report validate_assumption1(const UpdateRule& u, const PriceDistribution& d, double p0,
                                       double tol = 1e-6);

} // namespace ammopt
