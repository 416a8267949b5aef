#include "ammopt/update_rule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ammopt/quadrature.hpp"

namespace ammopt {

UpdateRule UpdateRule::linear(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("UpdateRule::linear: lambda must be in [0,1]");
    }
    return UpdateRule(Kind::kLinear, lambda);
}

UpdateRule UpdateRule::custom(std::function<double(double, double)> fn) {
    if (!fn) throw std::invalid_argument("UpdateRule::custom: empty function");
    UpdateRule u(Kind::kCustom, std::numeric_limits<double>::quiet_NaN());
    u.custom_ = std::move(fn);
    return u;
}

double UpdateRule::apply(double p0, double p_hat) const {
    switch (kind_) {
    case Kind::kNoise:
        return p0;
    case Kind::kPerfectInfo:
        return p_hat;
    case Kind::kLinear:
        if (lambda_ == 1.0) return p0;
        if (lambda_ == 0.0) return p_hat;
        // p_hat + lambda*(p0 - p_hat): exact fixed point at p_hat == p0.
        return p_hat + lambda_ * (p0 - p_hat);
    case Kind::kCustom:
        return custom_(p0, p_hat);
    }
    return p0;
}

double UpdateRule::lambda_from_variances(double sigma0_sq, double sigma_eps_sq) {
    if (!(sigma0_sq > 0.0)) {
        throw std::invalid_argument("lambda_from_variances: prior variance must be > 0");
    }
    if (!(sigma_eps_sq >= 0.0)) {
        throw std::invalid_argument("lambda_from_variances: observation variance must be >= 0");
    }
    return sigma_eps_sq / (sigma0_sq + sigma_eps_sq);
}

Assumption1Report validate_assumption1(const UpdateRule& u, const PriceDistribution& d, double p0,
                                       double tol) {
    const Support& sup = d.support();
    if (!sup.interior(p0)) {
        throw std::invalid_argument("validate_assumption1: p0 must be interior to the support");
    }

    Assumption1Report rep;
    constexpr int kGridN = 1001;

    double worst_between = 0.0;
    double worst_mono = 0.0;
    double prev = 0.0;
    for (int i = 0; i < kGridN; ++i) {
        const double p_hat = grid_point(sup.lo, sup.hi, i, kGridN - 1);
        const double pi = u.apply(p0, p_hat);
        const double lo = std::min(p0, p_hat);
        const double hi = std::max(p0, p_hat);
        worst_between = std::max({worst_between, lo - pi, pi - hi});
        if (i > 0) worst_mono = std::max(worst_mono, prev - pi);
        prev = pi;
    }
    rep.worst_betweenness = worst_between;
    rep.betweenness_ok = worst_between <= tol;
    rep.worst_monotonicity = worst_mono;
    rep.monotonicity_ok = worst_mono <= tol;

    rep.fixed_point_error = std::abs(u.apply(p0, p0) - p0);
    rep.fixed_point_ok = rep.fixed_point_error <= tol;

    const auto integrand = [&](double s) { return u.apply(p0, s) * d.pdf(s); };
    rep.expected_update = integrate_with_splits(integrand, {sup.lo, p0, sup.hi}, 1e-10).value;
    rep.consistency_gap = std::abs(rep.expected_update - p0);
    rep.consistency_ok = rep.consistency_gap <= tol;

    return rep;
}

} // namespace ammopt
