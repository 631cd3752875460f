#pragma once

#include <cstdint>
#include <vector>

#include "fragchain/densities.hpp"
#include "fragchain/laws.hpp"
#include "fragchain/test_functions.hpp"

namespace fragchain {

//! Discrete step distribution of the tagged-fragment walk for a finitely
//! supported dislocation law: atom i of a partition is followed with
//! probability equal to its mass.
struct DiscretePi {
    struct Atom {
        double step;   //!< -log(size fraction)
        double factor; //!< the size fraction itself (exact representation)
        double weight;
    };
    std::vector<Atom> atoms;
};
DiscretePi discrete_pi(const DiscreteDislocationLaw& law);

//! Inverse-CDF sampler for a continuous step density on [0, cutoff].
class PiSampler {
public:
    explicit PiSampler(const LevyDensity& pi, std::size_t cells = 16384);
    double sample_step(double u) const { return table_.sample(u); }

private:
    PiecewiseCdfSampler table_;
};

//! One path of the compound Poisson log-size walk run to first passage above
//! -log(eta): unit-rate exponential waiting times, i.i.d. steps from pi.
struct SubordinatorPath {
    std::vector<double> jump_times;     //!< cumulative jump epochs
    std::vector<double> jump_log_sizes; //!< the steps of the walk
    double first_passage_time = 0.0;    //!< T_eta
    double overshoot = 0.0;             //!< walk value at passage + log(eta)
    double chi = 0.0;                   //!< exp(-walk value) = frozen tagged size
};

SubordinatorPath sample_first_passage(const PiSampler& pi, double eta, std::uint64_t seed);
//! Discrete-step variant; chi is accumulated multiplicatively so lattice laws
//! reproduce tree sizes bit-for-bit.
SubordinatorPath sample_first_passage(const DiscretePi& pi, double eta, std::uint64_t seed);

//! Monte Carlo check of the identity
//!   E[ sum over frozen fragments of size * f(size) ] = E*[ f(chi(T_eta)) ]:
//! left side by tree simulation, right side by first-passage sampling.
struct LemmaReport {
    double lhs_mean = 0.0, lhs_se = 0.0;
    double rhs_mean = 0.0, rhs_se = 0.0;
    double z = 0.0;
    std::size_t replicates = 0;
};
LemmaReport oracle_check_lemma(const DislocationLaw& law, double eta,
                               const TestFunction& f, std::size_t reps,
                               std::uint64_t seed);

//! Mean-zero smooth perturbation of a binary density:
//! rho_eps = rho0 + sqrt(eps) * psi_k, with |psi_k| <= tau * inf rho0 and the
//! recorded correlation r(k) against the k-th moment weight nonzero.
struct PerturbedRho {
    BinaryDislocationLaw law;
    double r_k = 0.0;    //!< integral of phi_k * psi_k over [1/2,1]
    double psi_sup = 0.0;
    int phase = 1;       //!< oscillation frequency actually used
};
PerturbedRho make_perturbed_rho(const BinaryDislocationLaw& rho0, int k, double epsilon,
                                double tau);

//! Moment weight phi_k(a) = a log(1/a)^k + (1-a) log(1/(1-a))^k on [1/2,1];
//! m_k of a binary law is the integral of phi_k against rho.
double moment_weight_phi(int k, double a);

//! Two-point indistinguishability experiment: n(eps) = floor(4/eps)+1 draws
//! from rho0, plug-in KL against the sqrt(eps)-perturbed law, Pinsker bound,
//! and the deterministic quadrature/ceiling counterparts.
struct TwoPointReport {
    std::size_t n = 0;          //!< sample size n(eps)
    double r_k = 0.0;
    double kl_plugin_mean = 0.0; //!< mean over repetitions of the plug-in KL sum
    double kl_plugin_max = 0.0;
    double tv_plugin_max = 0.0;  //!< Pinsker bound from the worst repetition
    double kl_per_sample_quad = 0.0; //!< exact per-sample KL by quadrature
    double kl_per_sample_ceiling = 0.0; //!< tau^2 * eps
    double tv_quad = 0.0;    //!< Pinsker bound from n * quadrature KL
    double tv_ceiling = 0.0; //!< (sqrt(2)/2) tau sqrt(eps n)
    double moment_shift = 0.0;           //!< m_k(pi_eps) - m_k(pi_0) by quadrature
    double moment_shift_predicted = 0.0; //!< r(k) sqrt(eps)
    std::vector<double> kl_plugin; //!< per repetition
};
TwoPointReport two_point_experiment(const BinaryDislocationLaw& rho0, int k,
                                    double epsilon, double tau, std::size_t reps,
                                    std::uint64_t seed);

} // namespace fragchain
