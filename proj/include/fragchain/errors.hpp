#pragma once

#include <stdexcept>
#include <string>

namespace fragchain {

//! Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

//! A density failed its normalization or positivity invariant.
struct InvalidDensity final : Error { using Error::Error; };

//! Screening threshold outside (0,1), or a tree too shallow for the request.
struct InvalidThreshold final : Error { using Error::Error; };

//! Live-fragment count exceeded the configured cap.
struct BudgetExceeded final : Error { using Error::Error; };

//! Noise level too large relative to the screening threshold (sigma >= eps/2).
struct NoiseTooLarge final : Error { using Error::Error; };

//! Empirical-measure denominator below the guard (signals eps too large or a
//! pathological law).
struct DegenerateDenominator final : Error { using Error::Error; };

//! Moment tail estimate exceeds tolerance for the declared exponential order.
struct DivergentMoment final : Error { using Error::Error; };

//! m1(pi) below 1e-12; the limit measure is undefined.
struct ZeroMean final : Error { using Error::Error; };

//! A localized kernel's shifted support leaves (0,1).
struct SupportOverflow final : Error { using Error::Error; };

//! Kernel moment system not solvable to tolerance (order too high).
struct IllConditioned final : Error { using Error::Error; };

//! A tabulated inverse CDF came out non-monotone or non-finite.
struct SamplerFailure final : Error { using Error::Error; };

//! A structural hypothesis (e.g. density bounded away from zero) is violated.
struct AssumptionViolated final : Error { using Error::Error; };

//! Generic parameter violation (invalid gamma, k < 1, ...).
struct InvalidParameter final : Error { using Error::Error; };

} // namespace fragchain
