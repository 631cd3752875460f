#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fragchain/laws.hpp"
#include "fragchain/test_functions.hpp"

namespace fragchain {

//! Step density pi on [0, infinity) of the tagged fragment's log-size walk,
//! together with declared class metadata. kappa1 is the exponential-moment
//! order, kappa2 the origin-decay order; both are user declarations that are
//! spot-verified numerically, not estimated.
struct LevyDensity {
    std::function<double(double)> pi;
    double kappa1 = 1.0;
    double kappa2 = 1.0;
    double quadrature_cutoff = 0.0; //!< upper integration limit
    std::vector<double> breakpoints;
    std::string key;

    //! Validates normalization (1e-8) and the declared exponential moment.
    static LevyDensity make(std::function<double(double)> pi, double kappa1,
                            double kappa2, double cutoff = 0.0,
                            std::vector<double> breakpoints = {}, std::string key = "");

    //! pi(x, infinity): tabulated cumulative with a local trapezoid
    //! correction, absolute error well below 1e-9.
    double tail(double x) const;

private:
    std::shared_ptr<const std::vector<double>> tail_knots_; // tail at i*dx
    double tail_dx_ = 0.0;
};

//! Logarithmic-scale twin beta(a) = pi(-log a)/a on (0,1).
struct BetaDensity {
    std::function<double(double)> beta;
    std::vector<double> breakpoints;
    std::string key;

    static BetaDensity make(std::function<double(double)> beta,
                            std::vector<double> breakpoints = {}, std::string key = "");
};

//! Step density of a binary law: pi(x) = e^{-2x}(rho(e^{-x}) on [0, log 2],
//! rho(1-e^{-x}) beyond).
LevyDensity pi_from_rho(const BinaryDislocationLaw& law);

//! beta(a) = pi(-log a)/a.
BetaDensity beta_from_pi(const LevyDensity& pi);

//! Inverse transform; class metadata must be re-declared by the caller.
LevyDensity pi_from_beta(const BetaDensity& beta, double kappa1, double kappa2);

//! Direct log-scale density of a binary law:
//! beta(a) = a (rho(a) 1_{[1/2,1]} + rho(1-a) 1_{[0,1/2)}).
BetaDensity beta_from_rho(const BinaryDislocationLaw& law);

//! k-th moment of pi, adaptive quadrature with absolute error below 1e-9.
//! Throws DivergentMoment when the tail estimate beyond the cutoff is not
//! negligible for the declared kappa1.
double moment_mk(const LevyDensity& pi, int k);

//! Same moment through the log-scale change of variables
//! (integral of log(1/a)^k beta(a) over (0,1)); used as a cross-check route.
double moment_mk_via_beta(const BetaDensity& beta, int k);

//! Limit of the empirical measure:
//! E(g) = (1/m1) integral of g(e^{-x}) pi(x, infinity) dx. This is the ground
//! truth for every convergence experiment.
double limit_measure(const LevyDensity& pi, const TestFunction& g);

} // namespace fragchain
