#include "ammopt/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "normal.hpp"

namespace ammopt {

namespace {

constexpr double kDensityFloor = 1e-300;

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

PriceDistribution PriceDistribution::uniform(double lo, double hi) {
    check(std::isfinite(lo) && std::isfinite(hi), "uniform: lo/hi must be finite");
    check(lo > 0.0, "uniform: lo must be > 0");
    check(lo < hi, "uniform: lo must be < hi");
    Support sup{lo, hi, false, 1.0};
    return PriceDistribution(Kind::kUniform, UniformParams{lo, hi}, sup);
}

PriceDistribution PriceDistribution::exponential(double rate, double truncation_quantile) {
    return exponential_at(rate, 0.0, truncation_quantile);
}

PriceDistribution PriceDistribution::exponential_at(double rate, double loc,
                                                    double truncation_quantile) {
    check(std::isfinite(rate) && rate > 0.0, "exponential: rate must be > 0");
    check(truncation_quantile > 0.0 && truncation_quantile < 1.0,
          "exponential: truncation_quantile must be in (0,1)");
    check(std::isfinite(loc), "exponential: location must be finite");
    const double eff_hi = loc - std::log1p(-truncation_quantile) / rate;
    Support sup{loc, eff_hi, true, truncation_quantile};
    return PriceDistribution(Kind::kExponential, ExponentialParams{rate, loc, truncation_quantile},
                             sup);
}

PriceDistribution PriceDistribution::truncated_normal(double mean, double stdev, double lo,
                                                      double hi) {
    check(std::isfinite(mean) && std::isfinite(stdev) && std::isfinite(lo) && std::isfinite(hi),
          "truncated_normal: parameters must be finite");
    check(stdev > 0.0, "truncated_normal: stdev must be > 0");
    check(lo > 0.0, "truncated_normal: lo must be > 0");
    check(lo < hi, "truncated_normal: lo must be < hi");
    TruncatedNormalParams p;
    p.mean = mean;
    p.stdev = stdev;
    p.lo = lo;
    p.hi = hi;
    p.z_lo = (lo - mean) / stdev;
    p.z_hi = (hi - mean) / stdev;
    p.cdf_lo = detail::norm_cdf(p.z_lo);
    p.cdf_hi = detail::norm_cdf(p.z_hi);
    p.mass = p.cdf_hi - p.cdf_lo;
    if (!(p.mass > 0.0)) {
        throw NumericalError("truncated_normal: truncation interval carries no probability mass");
    }
    Support sup{lo, hi, false, 1.0};
    return PriceDistribution(Kind::kTruncatedNormal, p, sup);
}

PriceDistribution PriceDistribution::piecewise_linear_pdf(
    std::vector<std::pair<double, double>> knots) {
    check(knots.size() >= 2, "piecewise_linear_pdf: need at least 2 knots");
    PiecewiseLinearParams p;
    p.knot_x.reserve(knots.size());
    p.knot_f.reserve(knots.size());
    for (const auto& [x, f] : knots) {
        check(std::isfinite(x) && std::isfinite(f), "piecewise_linear_pdf: knots must be finite");
        check(f > 0.0, "piecewise_linear_pdf: knot densities must be > 0");
        if (!p.knot_x.empty()) {
            check(x > p.knot_x.back(), "piecewise_linear_pdf: knot prices must be strictly increasing");
        }
        p.knot_x.push_back(x);
        p.knot_f.push_back(f);
    }
    check(p.knot_x.front() > 0.0, "piecewise_linear_pdf: support must start above 0");

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < p.knot_x.size(); ++i) {
        total += 0.5 * (p.knot_f[i] + p.knot_f[i + 1]) * (p.knot_x[i + 1] - p.knot_x[i]);
    }
    for (double& f : p.knot_f) f /= total;

    p.cum.assign(p.knot_x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < p.knot_x.size(); ++i) {
        p.cum[i + 1] = p.cum[i] +
                       0.5 * (p.knot_f[i] + p.knot_f[i + 1]) * (p.knot_x[i + 1] - p.knot_x[i]);
    }
    const double scale = p.cum.back();
    for (double& c : p.cum) c /= scale;
    for (double& f : p.knot_f) f /= scale;
    p.cum.back() = 1.0;

    Support sup{p.knot_x.front(), p.knot_x.back(), false, 1.0};
    return PriceDistribution(Kind::kPiecewiseLinearPdf, std::move(p), sup);
}

namespace {

// Index of the segment [knot_x[i], knot_x[i+1]] containing s.
std::size_t pwl_segment(const std::vector<double>& xs, double s) {
    auto it = std::upper_bound(xs.begin(), xs.end(), s);
    if (it == xs.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    if (i + 1 >= xs.size()) i = xs.size() - 2;
    return i;
}

double pwl_pdf(const PriceDistribution::PiecewiseLinearParams& p, double s) {
    const std::size_t i = pwl_segment(p.knot_x, s);
    const double h = p.knot_x[i + 1] - p.knot_x[i];
    const double t = (s - p.knot_x[i]) / h;
    return p.knot_f[i] + t * (p.knot_f[i + 1] - p.knot_f[i]);
}

double pwl_cdf(const PriceDistribution::PiecewiseLinearParams& p, double s) {
    const std::size_t i = pwl_segment(p.knot_x, s);
    const double h = p.knot_x[i + 1] - p.knot_x[i];
    const double t = s - p.knot_x[i];
    const double slope = (p.knot_f[i + 1] - p.knot_f[i]) / h;
    // the trapezoid accumulation can land an ulp past 1 at the last knot
    return std::clamp(p.cum[i] + p.knot_f[i] * t + 0.5 * slope * t * t, 0.0, 1.0);
}

double pwl_quantile(const PriceDistribution::PiecewiseLinearParams& p, double q) {
    auto it = std::upper_bound(p.cum.begin(), p.cum.end(), q);
    std::size_t i = it == p.cum.begin() ? 0 : static_cast<std::size_t>(it - p.cum.begin()) - 1;
    if (i + 1 >= p.cum.size()) i = p.cum.size() - 2;
    const double c = q - p.cum[i];
    const double h = p.knot_x[i + 1] - p.knot_x[i];
    const double f0 = p.knot_f[i];
    const double slope = (p.knot_f[i + 1] - p.knot_f[i]) / h;
    // Stable root of 0.5*slope*t^2 + f0*t = c; reduces to c/f0 when slope -> 0.
    const double disc = std::max(f0 * f0 + 2.0 * slope * c, 0.0);
    const double t = 2.0 * c / (f0 + std::sqrt(disc));
    return p.knot_x[i] + t;
}

} // namespace

double PriceDistribution::pdf(double s) const {
    if (!support_.contains(s)) return 0.0;
    switch (kind_) {
    case Kind::kUniform: {
        const auto& p = uniform_params();
        return 1.0 / (p.hi - p.lo);
    }
    case Kind::kExponential: {
        const auto& p = exponential_params();
        return p.rate * std::exp(-p.rate * (s - p.loc));
    }
    case Kind::kTruncatedNormal: {
        const auto& p = truncated_normal_params();
        const double z = (s - p.mean) / p.stdev;
        return detail::norm_pdf(z) / (p.stdev * p.mass);
    }
    case Kind::kPiecewiseLinearPdf:
        return pwl_pdf(piecewise_linear_params(), s);
    }
    return 0.0;
}

double PriceDistribution::cdf(double s) const {
    if (s <= support_.lo) return 0.0;
    if (s > support_.hi) return 1.0;
    switch (kind_) {
    case Kind::kUniform: {
        const auto& p = uniform_params();
        return (s - p.lo) / (p.hi - p.lo);
    }
    case Kind::kExponential: {
        const auto& p = exponential_params();
        return -std::expm1(-p.rate * (s - p.loc));
    }
    case Kind::kTruncatedNormal: {
        const auto& p = truncated_normal_params();
        const double z = (s - p.mean) / p.stdev;
        return std::clamp((detail::norm_cdf(z) - p.cdf_lo) / p.mass, 0.0, 1.0);
    }
    case Kind::kPiecewiseLinearPdf:
        return pwl_cdf(piecewise_linear_params(), s);
    }
    return 0.0;
}

double PriceDistribution::quantile(double q) const {
    if (!(q >= 0.0 && q < 1.0)) {
        throw std::invalid_argument("quantile: q must be in [0,1)");
    }
    if (support_.unbounded_above && q > support_.truncation_quantile) {
        throw std::invalid_argument("quantile: q exceeds the truncation quantile");
    }
    switch (kind_) {
    case Kind::kUniform: {
        const auto& p = uniform_params();
        return p.lo + q * (p.hi - p.lo);
    }
    case Kind::kExponential: {
        const auto& p = exponential_params();
        return p.loc - std::log1p(-q) / p.rate;
    }
    case Kind::kTruncatedNormal: {
        const auto& p = truncated_normal_params();
        if (q == 0.0) return p.lo;
        const double u = p.cdf_lo + q * p.mass;
        const double z = detail::inverse_norm_cdf(u);
        return std::clamp(p.mean + p.stdev * z, p.lo, p.hi);
    }
    case Kind::kPiecewiseLinearPdf:
        return pwl_quantile(piecewise_linear_params(), q);
    }
    return 0.0;
}

double PriceDistribution::hazard_upper(double s) const {
    if (!support_.contains(s)) {
        throw std::invalid_argument("hazard_upper: point outside support");
    }
    if (pdf(s) < kDensityFloor) {
        throw EndpointSingularityError("hazard_upper: density below floor");
    }
    // f/(1-F) through the per-kind survival ratio; immune to the cancellation
    // in 1-F deep in upper tails.
    const double ratio = survival_ratio(s);
    if (!(ratio > 0.0)) {
        throw EndpointSingularityError("hazard_upper: singular at support endpoint");
    }
    return 1.0 / ratio;
}

double PriceDistribution::hazard_lower(double s) const {
    if (!support_.contains(s)) {
        throw std::invalid_argument("hazard_lower: point outside support");
    }
    if (pdf(s) < kDensityFloor) {
        throw EndpointSingularityError("hazard_lower: density below floor");
    }
    const double ratio = cdf_ratio(s);
    if (!(ratio > 0.0)) {
        throw EndpointSingularityError("hazard_lower: singular at support endpoint");
    }
    return 1.0 / ratio;
}

double PriceDistribution::survival_ratio(double s) const {
    if (!support_.contains(s)) {
        throw std::invalid_argument("survival_ratio: point outside support");
    }
    switch (kind_) {
    case Kind::kUniform:
        return uniform_params().hi - s;
    case Kind::kExponential:
        return 1.0 / exponential_params().rate;
    case Kind::kTruncatedNormal: {
        const auto& p = truncated_normal_params();
        const double z = (s - p.mean) / p.stdev;
        // Phi(z_hi) - Phi(z) via the upper-tail erfc difference: stable on the right tail.
        const double num = 0.5 * (std::erfc(z * detail::kInvSqrt2) - std::erfc(p.z_hi * detail::kInvSqrt2));
        return p.stdev * std::max(num, 0.0) / detail::norm_pdf(z);
    }
    case Kind::kPiecewiseLinearPdf: {
        const double f = pdf(s);
        if (f < kDensityFloor) {
            throw EndpointSingularityError("survival_ratio: density floor reached");
        }
        return (1.0 - cdf(s)) / f;
    }
    }
    return 0.0;
}

double PriceDistribution::cdf_ratio(double s) const {
    if (!support_.contains(s)) {
        throw std::invalid_argument("cdf_ratio: point outside support");
    }
    switch (kind_) {
    case Kind::kUniform:
        return s - uniform_params().lo;
    case Kind::kExponential: {
        const auto& p = exponential_params();
        return std::expm1(p.rate * (s - p.loc)) / p.rate;
    }
    case Kind::kTruncatedNormal: {
        const auto& p = truncated_normal_params();
        const double z = (s - p.mean) / p.stdev;
        // Phi(z) - Phi(z_lo) via the lower-tail erfc difference: stable on the left tail.
        const double num = 0.5 * (std::erfc(-z * detail::kInvSqrt2) - std::erfc(-p.z_lo * detail::kInvSqrt2));
        return p.stdev * std::max(num, 0.0) / detail::norm_pdf(z);
    }
    case Kind::kPiecewiseLinearPdf: {
        const double f = pdf(s);
        if (f < kDensityFloor) {
            throw EndpointSingularityError("cdf_ratio: density floor reached");
        }
        return cdf(s) / f;
    }
    }
    return 0.0;
}

double PriceDistribution::sample(SampleStream& stream) const {
    double u = stream.next_unit();
    if (support_.unbounded_above && u > support_.truncation_quantile) {
        u = support_.truncation_quantile;
    }
    return quantile(u);
}

PriceDistribution PriceDistribution::shifted(double delta) const {
    switch (kind_) {
    case Kind::kUniform: {
        const auto& p = uniform_params();
        Support sup{p.lo + delta, p.hi + delta, false, 1.0};
        return PriceDistribution(kind_, UniformParams{p.lo + delta, p.hi + delta}, sup);
    }
    case Kind::kExponential: {
        const auto& p = exponential_params();
        const double loc = p.loc + delta;
        const double eff_hi = loc - std::log1p(-p.truncation_quantile) / p.rate;
        Support sup{loc, eff_hi, true, p.truncation_quantile};
        return PriceDistribution(kind_, ExponentialParams{p.rate, loc, p.truncation_quantile}, sup);
    }
    case Kind::kTruncatedNormal: {
        auto p = truncated_normal_params();
        p.mean += delta;
        p.lo += delta;
        p.hi += delta;
        Support sup{p.lo, p.hi, false, 1.0};
        return PriceDistribution(kind_, p, sup);
    }
    case Kind::kPiecewiseLinearPdf: {
        auto p = piecewise_linear_params();
        for (double& x : p.knot_x) x += delta;
        Support sup{p.knot_x.front(), p.knot_x.back(), false, 1.0};
        return PriceDistribution(kind_, std::move(p), sup);
    }
    }
    throw std::logic_error("shifted: unknown kind");
}

double PriceDistribution::anchor() const {
    switch (kind_) {
    case Kind::kUniform: {
        const auto& p = uniform_params();
        return 0.5 * (p.lo + p.hi);
    }
    case Kind::kExponential:
        return exponential_params().loc;
    case Kind::kTruncatedNormal:
        return truncated_normal_params().mean;
    case Kind::kPiecewiseLinearPdf: {
        const auto& p = piecewise_linear_params();
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < p.knot_x.size(); ++i) {
            const double h = p.knot_x[i + 1] - p.knot_x[i];
            const double slope = (p.knot_f[i + 1] - p.knot_f[i]) / h;
            // integral of (x_i + t)(f_i + slope*t) dt over [0, h]
            m += p.knot_x[i] * p.knot_f[i] * h + (p.knot_f[i] + slope * p.knot_x[i]) * h * h / 2.0 +
                 slope * h * h * h / 3.0;
        }
        return m;
    }
    }
    throw std::logic_error("anchor: unknown kind");
}

} // namespace ammopt
