#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fragchain/laws.hpp"
#include "fragchain/simulator.hpp"
#include "fragchain/test_functions.hpp"

namespace fragchain {

//! Bandwidth rule gamma_eps. The moment rule balances the origin-decay order
//! kappa2, the density rule the declared smoothness s; "fixed" is a plain
//! power law. The coefficient is a calibration constant (the asymptotic rules
//! are defined up to constants).
struct GammaRule {
    enum class Kind { moment_rate, density_rate, fixed_power };
    Kind kind = Kind::moment_rate;
    double coeff = 1.0;
    double exponent = 0.5; //!< used by fixed_power only

    std::string describe() const;
};

//! Declared class orders and bandwidth configuration for the estimators.
struct EstimatorConfig {
    double kappa1 = 2.0; //!< exponential-moment order of the step density
    double kappa2 = 1.0; //!< origin-decay order
    double s = 1.0;      //!< Hoelder smoothness of the log-scale density
    int N = 2;           //!< kernel order (must exceed s)
    double gamma0 = 0.5; //!< truncation fraction
    double mu = 0.0;     //!< rate parameter; 0 selects the default per rule
    GammaRule moment_rule{GammaRule::Kind::moment_rate, 1.0, 0.5};
    GammaRule density_rule{GammaRule::Kind::density_rate, 0.25, 0.5};

    double mu_for_moments() const; //!< min(kappa1 - 0.01, 1) unless mu set
    double mu_for_density() const; //!< min(1, kappa1/2 - 0.01) unless mu set
    double moment_gamma(double eps) const;
    double density_gamma(double eps) const;

    //! Non-fatal warnings when declarations violate the cited hypotheses.
    std::vector<std::string> hypothesis_warnings() const;

    //! Pull kappa metadata from a law's declaration.
    static EstimatorConfig for_law(const DislocationLaw& law);
};

//! Weighted empirical measure of the frozen frontier. With sigma = 0 this is
//! the exact sum of size * g(size/eps); with sigma > 0 it uses noisy sizes and
//! drops records flagged below the truncation threshold.
double empirical_measure(const ObservationSet& obs, const TestFunction& g);

//! Reciprocal-of-cutoff estimator of the mean log step m1.
double estimate_m1(const ObservationSet& obs, const EstimatorConfig& cfg);

//! Ratio estimator of the k-th log-step moment, k >= 2 (k = 1 delegates).
double estimate_mk(const ObservationSet& obs, int k, const EstimatorConfig& cfg);

//! Pointwise estimator of the log-scale density at a in (0,1).
double estimate_beta(const ObservationSet& obs, double a, const EstimatorConfig& cfg);

//! Index estimator from the first time the tagged fragment passes below eps:
//! log(T_eps) / log(1/eps). Consistent since eps^alpha T_eps is tight.
double estimate_alpha_tagged(double T_eps, double epsilon);

//! Log-likelihood of lifetimes that are exponential with rate size^alpha:
//! sum of alpha log(size) - size^alpha * lifetime.
double alpha_loglik(std::span<const std::pair<double, double>> pairs, double alpha);

//! Golden-section maximizer of alpha_loglik (the likelihood is concave).
double alpha_mle(std::span<const std::pair<double, double>> pairs, double lo = 0.0,
                 double hi = 8.0);

//! Tagged line of descent run until the fragment size drops below eps,
//! accumulating exponential waiting times with rate size^alpha.
struct TaggedRun {
    double T_eps = 0.0;
    double final_size = 0.0;
    int n_splits = 0;
};
TaggedRun simulate_tagged_time(const DislocationLaw& law, double alpha, double epsilon,
                               std::uint64_t seed);

//! (size, lifetime) pairs harvested from the split nodes of simulated trees.
std::vector<std::pair<double, double>> collect_size_lifetime_pairs(
    const DislocationLaw& law, double alpha, std::size_t n, std::uint64_t seed);

//! Replicate-level summary of an estimator experiment.
struct ExperimentResult {
    std::vector<double> values;
    double mean = 0.0;
    double std_error = 0.0;
    std::optional<double> reference;
    double mse = 0.0; //!< vs reference when present, else central variance

    static ExperimentResult summarize(std::vector<double> values,
                                      std::optional<double> reference);
};

} // namespace fragchain
