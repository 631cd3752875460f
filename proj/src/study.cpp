#include "fragchain/study.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "fragchain/densities.hpp"
#include "fragchain/errors.hpp"
#include "fragchain/parallel.hpp"
#include "fragchain/quadrature.hpp"
#include "fragchain/rng.hpp"

namespace fragchain {

void StudyConfig::validate() const {
    if (eps_grid.empty()) throw InvalidParameter("eps grid must not be empty");
    for (double e : eps_grid)
        if (!(e > 0.0) || !(e < 1.0)) throw InvalidThreshold("eps values must lie in (0,1)");
    for (std::size_t i = 1; i < eps_grid.size(); ++i)
        if (!(eps_grid[i] < eps_grid[i - 1]))
            throw InvalidParameter("eps grid must be strictly decreasing");
    if (replicates < 2) throw InvalidParameter("need at least 2 replicates");
}

double sigma_for(const std::string& rule, double eps) {
    if (rule == "0" || rule.empty()) return 0.0;
    if (rule == "eps^2") return eps * eps;
    if (rule == "eps^3") return eps * eps * eps;
    try {
        return std::stod(rule);
    } catch (...) {
        throw InvalidParameter("unknown sigma rule: " + rule);
    }
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string StudyConfig::canonical() const {
    std::ostringstream s;
    s << "law=" << law << "\n";
    s << "eps_grid=";
    for (std::size_t i = 0; i < eps_grid.size(); ++i)
        s << (i ? "," : "") << fmt(eps_grid[i]);
    s << "\n";
    s << "sigma_rule=" << sigma_rule << "\n";
    s << "replicates=" << replicates << "\n";
    s << "seed=" << seed << "\n";
    s << "estimator=" << estimator << "\n";
    s << "alpha=" << fmt(alpha) << "\n";
    s << "kappa1=" << fmt(est.kappa1) << "\n";
    s << "kappa2=" << fmt(est.kappa2) << "\n";
    s << "s=" << fmt(est.s) << "\n";
    s << "N=" << est.N << "\n";
    s << "gamma0=" << fmt(est.gamma0) << "\n";
    s << "mu=" << fmt(est.mu) << "\n";
    s << "moment_rule=" << est.moment_rule.describe() << "\n";
    s << "density_rule=" << est.density_rule.describe() << "\n";
    return s.str();
}

std::uint64_t StudyConfig::config_hash() const {
    std::string text = canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw InvalidParameter("rate fit needs at least 3 points");
    RateFit out;
    for (const auto& [eps, mse] : points) {
        if (!(eps > 0.0)) throw InvalidParameter("rate fit needs positive eps");
        if (!(mse > 0.0)) {
            out.degenerate = true; // exact match somewhere; slope meaningless
            out.slope = 0.0;
            out.slope_se = 0.0;
            return out;
        }
        out.log_eps.push_back(std::log(eps));
        out.log_mse.push_back(std::log(mse));
    }
    const auto n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < out.log_eps.size(); ++i) {
        mx += out.log_eps[i];
        my += out.log_mse[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < out.log_eps.size(); ++i) {
        sxx += (out.log_eps[i] - mx) * (out.log_eps[i] - mx);
        sxy += (out.log_eps[i] - mx) * (out.log_mse[i] - my);
    }
    out.slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < out.log_eps.size(); ++i) {
        double fitted = my + out.slope * (out.log_eps[i] - mx);
        ss_res += (out.log_mse[i] - fitted) * (out.log_mse[i] - fitted);
    }
    out.slope_se = points.size() > 2
                       ? std::sqrt(ss_res / (n - 2.0) / sxx)
                       : 0.0;
    return out;
}

namespace {

struct EstimatorSpec {
    enum class Kind { measure, moment, beta } kind = Kind::measure;
    std::string g_key = "identity";
    int k = 1;
    double a = 0.5;
};

EstimatorSpec parse_estimator(const std::string& text) {
    EstimatorSpec spec;
    if (text.rfind("measure:", 0) == 0) {
        spec.kind = EstimatorSpec::Kind::measure;
        spec.g_key = text.substr(8);
        return spec;
    }
    if (text == "m1" || text == "m2" || text == "m3" || text == "m4") {
        spec.kind = EstimatorSpec::Kind::moment;
        spec.k = text[1] - '0';
        return spec;
    }
    if (text.rfind("beta:", 0) == 0) {
        spec.kind = EstimatorSpec::Kind::beta;
        spec.a = std::stod(text.substr(5));
        return spec;
    }
    throw InvalidParameter("unknown estimator spec: " + text);
}

} // namespace

StudyOutcome run_study(const StudyConfig& cfg) {
    cfg.validate();
    StudyOutcome out;
    out.warnings = cfg.est.hypothesis_warnings();

    DislocationLaw law = make_law(cfg.law);
    EstimatorSpec spec = parse_estimator(cfg.estimator);

    // quadrature oracle (binary laws only; discrete laws have no density path)
    std::optional<double> reference;
    if (const auto* bin = std::get_if<BinaryDislocationLaw>(&law)) {
        LevyDensity pi = pi_from_rho(*bin);
        switch (spec.kind) {
            case EstimatorSpec::Kind::measure:
                reference = limit_measure(pi, make_named_g(spec.g_key));
                break;
            case EstimatorSpec::Kind::moment:
                reference = moment_mk(pi, spec.k);
                break;
            case EstimatorSpec::Kind::beta: {
                BetaDensity beta = beta_from_pi(pi);
                reference = beta.beta(spec.a);
                break;
            }
        }
    }

    TestFunction g_measure;
    if (spec.kind == EstimatorSpec::Kind::measure) g_measure = make_named_g(spec.g_key);

    for (std::size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) {
        double eps = cfg.eps_grid[ei];
        double sigma = sigma_for(cfg.sigma_rule, eps);
        std::vector<double> values(cfg.replicates);
        std::uint64_t eps_seed = rng::derive(cfg.seed, ei);
        parallel_for(cfg.replicates, [&](std::size_t r) {
            std::uint64_t rep_seed = rng::derive(eps_seed, r);
            ObservationSet obs =
                simulate_observation(law, eps, cfg.alpha, rep_seed, sigma,
                                     cfg.est.gamma0, rng::derive(rep_seed, 7001));
            switch (spec.kind) {
                case EstimatorSpec::Kind::measure:
                    values[r] = empirical_measure(obs, g_measure);
                    break;
                case EstimatorSpec::Kind::moment:
                    values[r] = estimate_mk(obs, spec.k, cfg.est);
                    break;
                case EstimatorSpec::Kind::beta:
                    values[r] = estimate_beta(obs, spec.a, cfg.est);
                    break;
            }
        });
        out.eps.push_back(eps);
        out.sigma.push_back(sigma);
        out.per_eps.push_back(ExperimentResult::summarize(std::move(values), reference));
    }

    if (out.eps.size() >= 3) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < out.eps.size(); ++i)
            pts.emplace_back(out.eps[i], out.per_eps[i].mse);
        out.fit = fit_rate(pts);
        out.has_fit = true;
    }
    return out;
}

void write_study_csv(const StudyConfig& cfg, const StudyOutcome& outcome,
                     std::ostream& out) {
    std::istringstream config(cfg.canonical());
    std::string line;
    while (std::getline(config, line)) out << "# " << line << "\n";
    char hash[32];
    std::snprintf(hash, sizeof(hash), "0x%016llx",
                  static_cast<unsigned long long>(cfg.config_hash()));
    out << "# config_hash=" << hash << "\n";
    for (const auto& w : outcome.warnings) out << "# warning: " << w << "\n";

    out << "record,eps,sigma,replicate,value,mean,std_error,reference,mse\n";
    for (std::size_t i = 0; i < outcome.eps.size(); ++i) {
        const auto& res = outcome.per_eps[i];
        for (std::size_t r = 0; r < res.values.size(); ++r)
            out << "value," << fmt(outcome.eps[i]) << "," << fmt(outcome.sigma[i]) << ","
                << r << "," << fmt(res.values[r]) << ",,,,\n";
        out << "summary," << fmt(outcome.eps[i]) << "," << fmt(outcome.sigma[i]) << ",,,"
            << fmt(res.mean) << "," << fmt(res.std_error) << ","
            << (res.reference ? fmt(*res.reference) : std::string()) << ","
            << fmt(res.mse) << "\n";
    }
    if (outcome.has_fit) {
        out << "ratefit,,,,,"
            << (outcome.fit.degenerate ? std::string("degenerate") : fmt(outcome.fit.slope))
            << "," << fmt(outcome.fit.slope_se) << ",,\n";
    }
}

} // namespace fragchain
