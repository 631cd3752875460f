#include "fragchain/estimators.hpp"

#include <cmath>
#include <cstdio>

#include "fragchain/errors.hpp"
#include "fragchain/quadrature.hpp"
#include "fragchain/rng.hpp"

namespace fragchain {

std::string GammaRule::describe() const {
    char buf[96];
    switch (kind) {
        case Kind::moment_rate:
            std::snprintf(buf, sizeof(buf), "moment-rate(coeff=%g)", coeff);
            break;
        case Kind::density_rate:
            std::snprintf(buf, sizeof(buf), "density-rate(coeff=%g)", coeff);
            break;
        case Kind::fixed_power:
            std::snprintf(buf, sizeof(buf), "power(coeff=%g,exp=%g)", coeff, exponent);
            break;
    }
    return buf;
}

double EstimatorConfig::mu_for_moments() const {
    if (mu > 0.0) return mu;
    return std::min(kappa1 - 0.01, 1.0);
}

double EstimatorConfig::mu_for_density() const {
    if (mu > 0.0) return mu;
    return std::min(1.0, kappa1 / 2.0 - 0.01);
}

namespace {

double apply_rule(const GammaRule& rule, double eps, double exponent_rate) {
    double g;
    switch (rule.kind) {
        case GammaRule::Kind::fixed_power:
            g = rule.coeff * std::pow(eps, rule.exponent);
            break;
        default:
            g = rule.coeff * std::pow(eps, exponent_rate);
            break;
    }
    if (!(g > 0.0) || !(g < 1.0))
        throw InvalidParameter("bandwidth rule produced gamma outside (0,1)");
    return g;
}

} // namespace

double EstimatorConfig::moment_gamma(double eps) const {
    double m = mu_for_moments();
    double e = m / ((m + 1.0) * (2.0 * kappa2 + 1.0));
    return apply_rule(moment_rule, eps, e);
}

double EstimatorConfig::density_gamma(double eps) const {
    double m = mu_for_density();
    double e = m / ((m + 1.0) * (2.0 * s + 3.0));
    return apply_rule(density_rule, eps, e);
}

std::vector<std::string> EstimatorConfig::hypothesis_warnings() const {
    std::vector<std::string> out;
    if (!(kappa1 > std::max(1.0, kappa2)))
        out.push_back("moment estimators assume kappa1 > max(1, kappa2)");
    if (!(kappa1 > 1.0) || !(kappa2 > 1.0))
        out.push_back("density estimator assumes kappa1 > 1 and kappa2 > 1");
    if (!(static_cast<double>(N) > s))
        out.push_back("kernel order N should exceed the declared smoothness s");
    if (!(s < std::max(static_cast<double>(N), kappa2 - 1.0)))
        out.push_back("declared s should satisfy s < max(N, kappa2 - 1)");
    return out;
}

EstimatorConfig EstimatorConfig::for_law(const DislocationLaw& law) {
    EstimatorConfig cfg;
    if (const auto* bin = std::get_if<BinaryDislocationLaw>(&law)) {
        cfg.kappa1 = bin->kappa1;
        cfg.kappa2 = bin->kappa2;
    }
    return cfg;
}

double empirical_measure(const ObservationSet& obs, const TestFunction& g) {
    NeumaierSum sum;
    if (obs.sigma == 0.0) {
        for (const auto& f : obs.fragments) {
            double v = g(f.true_size / obs.epsilon);
            if (v != 0.0) sum.add(f.true_size * v);
        }
    } else {
        for (const auto& f : obs.fragments) {
            if (f.truncated) continue;
            double v = g(f.noisy_size / obs.epsilon);
            if (v != 0.0) sum.add(f.noisy_size * v);
        }
    }
    return sum.value();
}

double estimate_m1(const ObservationSet& obs, const EstimatorConfig& cfg) {
    double gamma = cfg.moment_gamma(obs.epsilon);
    CutoffPair cut = make_cutoff(gamma);
    double den = empirical_measure(obs, cut.g);
    if (std::abs(den) < 1e-12)
        throw DegenerateDenominator("empirical measure of the cutoff is ~0");
    return 1.0 / den;
}

double estimate_mk(const ObservationSet& obs, int k, const EstimatorConfig& cfg) {
    if (k < 1) throw InvalidParameter("moment order k must be >= 1");
    double gamma = cfg.moment_gamma(obs.epsilon);
    CutoffPair cut = make_cutoff(gamma);
    double den = empirical_measure(obs, cut.g);
    if (std::abs(den) < 1e-12)
        throw DegenerateDenominator("empirical measure of the cutoff is ~0");
    if (k == 1) return 1.0 / den;
    MomentTestFn mk = make_moment_testfn(k, gamma);
    return empirical_measure(obs, mk.g) / den;
}

double estimate_beta(const ObservationSet& obs, double a, const EstimatorConfig& cfg) {
    double gamma = cfg.density_gamma(obs.epsilon);
    Kernel kernel = make_kernel(cfg.N);
    LocalizedKernel loc = localize_kernel(kernel.phi, a, gamma);
    double m1 = estimate_m1(obs, cfg);
    return m1 * empirical_measure(obs, loc.integrand);
}

double estimate_alpha_tagged(double T_eps, double epsilon) {
    if (!(T_eps > 0.0)) throw InvalidParameter("first-passage time must be positive");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidThreshold("epsilon must lie in (0,1)");
    return std::log(T_eps) / std::log(1.0 / epsilon);
}

double alpha_loglik(std::span<const std::pair<double, double>> pairs, double alpha) {
    NeumaierSum ll;
    for (const auto& [size, lifetime] : pairs) {
        if (!(size > 0.0) || size > 1.0)
            throw InvalidParameter("sizes must lie in (0,1]");
        if (!(lifetime > 0.0)) throw InvalidParameter("lifetimes must be positive");
        ll.add(alpha * std::log(size) - std::pow(size, alpha) * lifetime);
    }
    return ll.value();
}

double alpha_mle(std::span<const std::pair<double, double>> pairs, double lo, double hi) {
    if (pairs.empty()) throw InvalidParameter("need at least one (size,lifetime) pair");
    // golden-section search; the log-likelihood is strictly concave in alpha
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = alpha_loglik(pairs, c);
    double fd = alpha_loglik(pairs, d);
    for (int it = 0; it < 200 && (b - a) > 1e-7; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = alpha_loglik(pairs, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = alpha_loglik(pairs, d);
        }
    }
    return 0.5 * (a + b);
}

TaggedRun simulate_tagged_time(const DislocationLaw& law, double alpha, double epsilon,
                               std::uint64_t seed) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidThreshold("epsilon must lie in (0,1)");
    if (alpha < 0.0) throw InvalidParameter("self-similarity index must be >= 0");

    TaggedRun run;
    double size = 1.0;
    rng::Stream lineage = rng::root_stream(seed);
    std::uint64_t n = 0;
    while (size >= epsilon) {
        rng::Stream sub = lineage.child(n++);
        run.T_eps += sub.next_exponential(std::pow(size, alpha));
        double u = sub.next_unit();
        // follow a fragment chosen proportionally to its mass
        if (const auto* bin = std::get_if<BinaryDislocationLaw>(&law)) {
            double s = bin->sample_fraction(sub.next_unit());
            size *= (u < s) ? s : (1.0 - s);
        } else {
            const auto& disc = std::get<DiscreteDislocationLaw>(law);
            const auto& atom = disc.atoms[disc.sample_atom(sub.next_unit())];
            double acc = 0.0;
            double chosen = atom.partition.sizes.back();
            for (double sz : atom.partition.sizes) {
                acc += sz;
                if (u < acc) {
                    chosen = sz;
                    break;
                }
            }
            size *= chosen;
        }
        ++run.n_splits;
        if (!(size > 0.0)) throw SamplerFailure("tagged fragment degenerated to size 0");
    }
    run.final_size = size;
    return run;
}

std::vector<std::pair<double, double>> collect_size_lifetime_pairs(
    const DislocationLaw& law, double alpha, std::size_t n, std::uint64_t seed) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(n);
    GrowOptions opts;
    opts.with_times = true;
    // a conservative tree at threshold t has ~2/t split nodes
    double threshold = std::clamp(2.0 / (static_cast<double>(n) + 4.0), 1e-7, 0.25);
    for (std::uint64_t attempt = 0; pairs.size() < n && attempt < 64; ++attempt) {
        FragmentTree tree = grow_tree(law, threshold, alpha, rng::derive(seed, attempt), opts);
        for (const auto& node : tree.nodes) {
            if (node.child_count == 0) continue;
            pairs.emplace_back(node.size, node.lifetime);
            if (pairs.size() >= n) break;
        }
    }
    if (pairs.size() < n) throw BudgetExceeded("could not harvest enough pairs");
    return pairs;
}

ExperimentResult ExperimentResult::summarize(std::vector<double> values,
                                             std::optional<double> reference) {
    if (values.size() < 2) throw InvalidParameter("need at least 2 replicate values");
    ExperimentResult out;
    out.values = std::move(values);
    out.reference = reference;
    const auto n = static_cast<double>(out.values.size());
    NeumaierSum s;
    for (double v : out.values) s.add(v);
    out.mean = s.value() / n;
    NeumaierSum q;
    for (double v : out.values) q.add((v - out.mean) * (v - out.mean));
    out.std_error = std::sqrt(std::max(q.value(), 0.0) / (n - 1.0) / n);
    if (reference) {
        NeumaierSum m;
        for (double v : out.values) m.add((v - *reference) * (v - *reference));
        out.mse = m.value() / n;
    } else {
        out.mse = q.value() / n;
    }
    return out;
}

} // namespace fragchain
