#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <variant>
#include <vector>

#include "ammopt/errors.hpp"

namespace ammopt {

/// Price interval a distribution lives on. For kinds with unbounded upper tail
/// the effective finite bound is quantile(truncation_quantile); all grids,
/// quadrature and sampling stay inside [lo, hi].
struct Support {
    double lo = 0.0;
    double hi = 0.0;
    bool unbounded_above = false;
    double truncation_quantile = 1.0; // in (0,1]; < 1 iff unbounded_above

    double width() const { return hi - lo; }
    bool contains(double s) const { return s >= lo && s <= hi; }
    bool interior(double s) const { return s > lo && s < hi; }
};

/// Deterministic uniform-[0,1) stream used for inverse-transform sampling.
/// Draws 53-bit doubles straight from mt19937_64 so sequences are identical
/// across platforms for a given seed.
class SampleStream {
public:
    explicit SampleStream(std::uint64_t seed) : gen_(seed) {}
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

/// Trader-belief price distribution with the accessors the virtual value
/// functions need: density, CDF, quantile, and both hazard rates. Immutable
/// value type; every operation is pure.
class PriceDistribution {
public:
    enum class Kind { kUniform, kExponential, kTruncatedNormal, kPiecewiseLinearPdf };

    static constexpr double kDefaultTruncationQuantile = 1.0 - 1e-9;

    static PriceDistribution uniform(double lo, double hi);
    static PriceDistribution exponential(double rate,
                                         double truncation_quantile = kDefaultTruncationQuantile);
    static PriceDistribution truncated_normal(double mean, double stdev, double lo, double hi);
    /// Knots are (price, density) pairs, strictly increasing in price with
    /// positive densities; densities are renormalized so the trapezoid
    /// integral over the knots is exactly 1.
    static PriceDistribution piecewise_linear_pdf(std::vector<std::pair<double, double>> knots);

    Kind kind() const { return kind_; }
    const Support& support() const { return support_; }

    /// f(s); returns 0 outside the support.
    double pdf(double s) const;
    /// F(s); clamps to 0 below and 1 above the support.
    double cdf(double s) const;
    /// Inverse CDF. q in [0,1); for unbounded-above kinds q must not exceed
    /// the truncation quantile. Throws std::invalid_argument otherwise.
    double quantile(double q) const;

    /// f/(1-F) and f/F on the interior. Throws EndpointSingularityError where
    /// the denominator vanishes or the density is below the 1e-300 floor.
    double hazard_upper(double s) const;
    double hazard_lower(double s) const;

    /// (1-F)/f and F/f in analytically simplified per-kind form; finite on the
    /// whole closed support for the built-in kinds. These are the information
    /// rent terms of the virtual value functions.
    double survival_ratio(double s) const;
    double cdf_ratio(double s) const;

    /// Inverse-transform draw; deterministic per stream state.
    double sample(SampleStream& stream) const;

    /// Same shape translated by delta. Used by the simulator's shift family.
    PriceDistribution shifted(double delta) const;

    /// Re-centering anchor: midpoint for uniform, mean parameter for
    /// truncated_normal, location for exponential, numeric mean for
    /// piecewise_linear_pdf.
    double anchor() const;

    struct UniformParams {
        double lo, hi;
    };
    struct ExponentialParams {
        double rate, loc, truncation_quantile;
    };
    struct TruncatedNormalParams {
        double mean, stdev, lo, hi;
        double z_lo, z_hi;     // standardized endpoints
        double cdf_lo, cdf_hi; // standard normal CDF at the endpoints
        double mass;           // cdf_hi - cdf_lo
    };
    struct PiecewiseLinearParams {
        std::vector<double> knot_x;
        std::vector<double> knot_f; // renormalized
        std::vector<double> cum;    // cum[i] = F(knot_x[i]); cum.back() == 1
    };

    const UniformParams& uniform_params() const { return std::get<UniformParams>(params_); }
    const ExponentialParams& exponential_params() const {
        return std::get<ExponentialParams>(params_);
    }
    const TruncatedNormalParams& truncated_normal_params() const {
        return std::get<TruncatedNormalParams>(params_);
    }
    const PiecewiseLinearParams& piecewise_linear_params() const {
        return std::get<PiecewiseLinearParams>(params_);
    }

private:
    using Params =
        std::variant<UniformParams, ExponentialParams, TruncatedNormalParams, PiecewiseLinearParams>;

    PriceDistribution(Kind kind, Params params, Support support)
        : kind_(kind), params_(std::move(params)), support_(support) {}

    static PriceDistribution exponential_at(double rate, double loc, double truncation_quantile);

    Kind kind_;
    Params params_;
    Support support_;
};

} // namespace ammopt
