#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace fragchain {

//! A finite mass partition: non-increasing sizes in (0,1] summing to 1.
struct MassPartition {
    std::vector<double> sizes;

    explicit MassPartition(std::vector<double> s, double tol = 1e-12);
};

//! Tabulated inverse CDF for a bounded density on [lo, hi]. CDF values are
//! computed per cell by Simpson's rule on a fine uniform grid; sampling uses a
//! piecewise-linear inverse (CDF error < 1e-8 for smooth densities at the
//! default resolution).
class PiecewiseCdfSampler {
public:
    PiecewiseCdfSampler(const std::function<double(double)>& density, double lo,
                        double hi, std::size_t cells = 8192);

    //! Map a uniform u in [0,1) to a sample.
    double sample(double u) const;

    double total_mass() const { return total_; }

private:
    double lo_, hi_, dx_, total_;
    std::vector<double> cdf_; // cdf_[i] = integral over the first i cells
};

//! Binary dislocation law: a unit mass splits into (s, 1-s) with s drawn from
//! a density rho on [1/2, 1].
struct BinaryDislocationLaw {
    std::function<double(double)> rho;  //!< density on [1/2, 1]
    double lower_bound = 0.0;           //!< inf of rho (> 0 when Assumption D is claimed)
    double kappa1 = 1.0;                //!< declared exponential-moment order of the step density
    double kappa2 = 1.0;                //!< declared origin-decay order of the step density
    std::vector<double> breakpoints;    //!< kinks of rho inside (1/2, 1)
    std::string key;                    //!< registry key, for reports
    std::shared_ptr<const PiecewiseCdfSampler> sampler;

    //! Validates the integral invariant and builds the sampler.
    static BinaryDislocationLaw make(std::function<double(double)> rho, double kappa1,
                                     double kappa2, std::string key = "",
                                     std::vector<double> breakpoints = {});

    double sample_fraction(double u) const { return sampler->sample(u); }
};

//! Finitely supported dislocation law over explicit mass partitions.
struct DiscreteDislocationLaw {
    struct Atom {
        MassPartition partition;
        double probability;
    };
    std::vector<Atom> atoms;
    std::string key;

    static DiscreteDislocationLaw make(std::vector<Atom> atoms, std::string key = "");

    //! Index of the atom selected by a uniform u.
    std::size_t sample_atom(double u) const;
};

using DislocationLaw = std::variant<BinaryDislocationLaw, DiscreteDislocationLaw>;

const std::string& law_key(const DislocationLaw& law);

//! Built-in laws addressable by string key:
//!   "binary-uniform"            rho = 2 on [1/2,1]
//!   "binary-beta(p,q)"          Beta(p,q) density rescaled to [1/2,1]
//!   "dyadic"                    deterministic halving
//!   "ternary-uniform-discrete"  three dyadic partitions, equal weight
//!   "csv:<path>"                tabulated (a, rho(a)) rows, linear interpolation
DislocationLaw make_law(const std::string& key);

//! Tabulated binary density loaded from CSV rows "a,rho(a)".
BinaryDislocationLaw law_from_csv(const std::string& path);

} // namespace fragchain
