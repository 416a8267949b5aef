#pragma once

#include <stdexcept>
#include <string>

namespace ammopt {

/// Invalid or malformed run configuration (bad JSON, unknown fields, bad parameter values).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to meet its contract (lost bracket, non-convergence, underflow).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Hazard-rate evaluation at a point where the denominator vanishes (support endpoint)
/// or where the density is below the 1e-300 floor.
class EndpointSingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Demand curve increases somewhere, so no incentive-compatible payment rule exists.
class NonMonotoneDemandError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// |g(p0) - g(p)| exceeds the unit-demand bound somewhere on the curve's interval.
class UnitDemandViolationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace ammopt
