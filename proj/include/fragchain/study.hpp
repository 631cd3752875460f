#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fragchain/estimators.hpp"

namespace fragchain {

//! Replicated estimator study over a decreasing grid of screening thresholds.
struct StudyConfig {
    std::string law = "binary-uniform";
    std::vector<double> eps_grid;      //!< strictly decreasing
    std::string sigma_rule = "0";      //!< "0", "eps^2", "eps^3", or a number
    std::size_t replicates = 2;        //!< R >= 2
    std::uint64_t seed = 1;
    //! what to estimate: "measure:<g-key>", "m1", "m2", "m3", or "beta:<a>"
    std::string estimator = "measure:identity";
    double alpha = 0.0;
    EstimatorConfig est;

    void validate() const;
    std::string canonical() const;  //!< flat key=value text, one per line
    std::uint64_t config_hash() const; //!< FNV-1a of canonical()
};

double sigma_for(const std::string& rule, double eps);

//! Log-log rate diagnostic: OLS slope of log(mse) against log(eps).
struct RateFit {
    std::vector<double> log_eps;
    std::vector<double> log_mse;
    double slope = 0.0;
    double slope_se = 0.0;
    bool degenerate = false; //!< some mse was exactly 0 (exact-match fallback)
};
RateFit fit_rate(std::span<const std::pair<double, double>> points);

struct StudyOutcome {
    std::vector<double> eps;
    std::vector<double> sigma;
    std::vector<ExperimentResult> per_eps;
    RateFit fit;
    bool has_fit = false;
    std::vector<std::string> warnings;
};

//! Runs the study: R replicate estimator values per eps (parallel over
//! replicates, deterministic per-replicate seeds), MSE against the quadrature
//! oracle when one exists, and a rate fit when the grid has >= 3 points.
StudyOutcome run_study(const StudyConfig& cfg);

//! CSV with '#' key=value header (config echo, config hash, seed), one value
//! row per replicate, one summary row per eps, and a ratefit row. Output is
//! byte-stable for a fixed config.
void write_study_csv(const StudyConfig& cfg, const StudyOutcome& outcome,
                     std::ostream& out);

} // namespace fragchain
