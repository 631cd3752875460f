#include "fragchain/tagged.hpp"

#include <algorithm>
#include <cmath>

#include "fragchain/errors.hpp"
#include "fragchain/parallel.hpp"
#include "fragchain/quadrature.hpp"
#include "fragchain/rng.hpp"
#include "fragchain/simulator.hpp"

namespace fragchain {

DiscretePi discrete_pi(const DiscreteDislocationLaw& law) {
    DiscretePi out;
    for (const auto& atom : law.atoms)
        for (double s : atom.partition.sizes)
            out.atoms.push_back({-std::log(s), s, atom.probability * s});
    double total = 0.0;
    for (const auto& a : out.atoms) total += a.weight;
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidDensity("discrete step distribution does not sum to 1");
    return out;
}

PiSampler::PiSampler(const LevyDensity& pi, std::size_t cells)
    : table_(pi.pi, 0.0, pi.quadrature_cutoff, cells) {}

namespace {

template <typename StepFn>
SubordinatorPath run_first_passage(double eta, std::uint64_t seed, StepFn&& step_of) {
    if (!(eta > 0.0) || !(eta < 1.0))
        throw InvalidThreshold("first-passage level eta must lie in (0,1)");

    SubordinatorPath path;
    const double level = -std::log(eta);
    double walk = 0.0;
    double chi = 1.0;
    double time = 0.0;
    rng::Stream stream = rng::root_stream(seed);
    std::uint64_t n = 0;
    // freeze on strict crossing chi < eta, matching the frontier rule
    while (chi >= eta) {
        if (n > 10'000'000)
            throw SamplerFailure("first-passage walk did not cross the level");
        rng::Stream sub = stream.child(n++);
        time += sub.next_exponential(1.0);
        auto [x, factor] = step_of(sub.next_unit());
        walk += x;
        chi *= factor;
        path.jump_times.push_back(time);
        path.jump_log_sizes.push_back(x);
    }
    path.first_passage_time = time;
    path.overshoot = std::max(walk - level, 0.0);
    path.chi = chi;
    return path;
}

} // namespace

SubordinatorPath sample_first_passage(const PiSampler& pi, double eta,
                                      std::uint64_t seed) {
    return run_first_passage(eta, seed, [&](double u) {
        double x = pi.sample_step(u);
        return std::pair<double, double>(x, std::exp(-x));
    });
}

SubordinatorPath sample_first_passage(const DiscretePi& pi, double eta,
                                      std::uint64_t seed) {
    return run_first_passage(eta, seed, [&](double u) {
        double acc = 0.0;
        for (const auto& atom : pi.atoms) {
            acc += atom.weight;
            if (u < acc) return std::pair<double, double>(atom.step, atom.factor);
        }
        const auto& last = pi.atoms.back();
        return std::pair<double, double>(last.step, last.factor);
    });
}

namespace {

struct MeanSe {
    double mean = 0.0, se = 0.0;
};

MeanSe summarize(const std::vector<double>& v) {
    NeumaierSum s;
    for (double x : v) s.add(x);
    double mean = s.value() / static_cast<double>(v.size());
    NeumaierSum q;
    for (double x : v) q.add((x - mean) * (x - mean));
    double var = q.value() / static_cast<double>(v.size() - 1);
    return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(v.size()))};
}

} // namespace

LemmaReport oracle_check_lemma(const DislocationLaw& law, double eta,
                               const TestFunction& f, std::size_t reps,
                               std::uint64_t seed) {
    if (reps < 2) throw InvalidParameter("need at least 2 replicates");

    std::vector<double> lhs(reps), rhs(reps);
    std::uint64_t lhs_seed = rng::derive(seed, 1);
    std::uint64_t rhs_seed = rng::derive(seed, 2);

    parallel_for(reps, [&](std::size_t r) {
        FragmentTree tree = grow_tree(law, eta, 0.0, rng::derive(lhs_seed, r));
        NeumaierSum sum;
        for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
            const auto& node = tree.nodes[i];
            if (node.size < eta && tree.nodes[node.parent].size >= eta)
                sum.add(node.size * f(node.size));
        }
        lhs[r] = sum.value();
    });

    if (const auto* bin = std::get_if<BinaryDislocationLaw>(&law)) {
        PiSampler sampler(pi_from_rho(*bin));
        parallel_for(reps, [&](std::size_t r) {
            rhs[r] = f(sample_first_passage(sampler, eta, rng::derive(rhs_seed, r)).chi);
        });
    } else {
        DiscretePi dpi = discrete_pi(std::get<DiscreteDislocationLaw>(law));
        parallel_for(reps, [&](std::size_t r) {
            rhs[r] = f(sample_first_passage(dpi, eta, rng::derive(rhs_seed, r)).chi);
        });
    }

    LemmaReport rep;
    rep.replicates = reps;
    auto [lm, ls] = summarize(lhs);
    auto [rm, rs] = summarize(rhs);
    rep.lhs_mean = lm;
    rep.lhs_se = ls;
    rep.rhs_mean = rm;
    rep.rhs_se = rs;
    double denom = std::sqrt(ls * ls + rs * rs);
    double diff = lm - rm;
    rep.z = denom > 0.0 ? diff / denom : (std::abs(diff) < 1e-12 ? 0.0 : INFINITY);
    return rep;
}

double moment_weight_phi(int k, double a) {
    double one = a >= 1.0 ? 0.0 : (1.0 - a) * std::pow(-std::log(1.0 - a), k);
    double two = a <= 0.0 ? 0.0 : a * std::pow(-std::log(a), k);
    return one + two;
}

PerturbedRho make_perturbed_rho(const BinaryDislocationLaw& rho0, int k, double epsilon,
                                double tau) {
    if (k < 1) throw InvalidParameter("moment order k must be >= 1");
    if (tau < 0.0 || tau >= 1.0) throw InvalidParameter("tau must lie in [0,1)");
    if (epsilon < 0.0) throw InvalidParameter("epsilon must be >= 0");
    if (!(rho0.lower_bound > 0.0))
        throw AssumptionViolated("perturbation requires rho bounded away from zero");

    if (tau == 0.0) {
        // degenerate perturbation: identical laws
        PerturbedRho out;
        out.law = rho0;
        return out;
    }

    const double amp = tau * rho0.lower_bound;

    // mean-zero oscillation on [1/2,1], vanishing at the endpoints; re-phase
    // to the next frequency if the moment correlation degenerates
    int phase = 1;
    double r_k = 0.0;
    std::function<double(double)> psi;
    for (; phase <= 3; ++phase) {
        int freq = phase;
        psi = [amp, freq](double a) {
            return amp * std::sin(2.0 * M_PI * freq * (2.0 * a - 1.0));
        };
        r_k = integrate([&](double a) { return moment_weight_phi(k, a) * psi(a); }, 0.5,
                        1.0, 1e-12)
                  .value;
        if (std::abs(r_k) > 1e-6 * amp) break;
    }
    if (std::abs(r_k) <= 1e-6 * amp)
        throw InvalidParameter("could not find an oscillation with nonzero correlation");

    double scale = std::sqrt(epsilon);
    auto rho0_fn = rho0.rho;
    auto rho_eps = [rho0_fn, psi, scale](double a) { return rho0_fn(a) + scale * psi(a); };

    PerturbedRho out;
    out.phase = phase;
    out.r_k = r_k;
    out.psi_sup = amp;
    out.law = BinaryDislocationLaw::make(rho_eps, rho0.kappa1, rho0.kappa2,
                                         rho0.key + "+perturbation", rho0.breakpoints);
    return out;
}

TwoPointReport two_point_experiment(const BinaryDislocationLaw& rho0, int k,
                                    double epsilon, double tau, std::size_t reps,
                                    std::uint64_t seed) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidThreshold("epsilon must lie in (0,1)");
    PerturbedRho pert = make_perturbed_rho(rho0, k, epsilon, tau);

    TwoPointReport rep;
    rep.n = static_cast<std::size_t>(std::floor(4.0 / epsilon)) + 1;
    rep.r_k = pert.r_k;

    const double sqrt_eps = std::sqrt(epsilon);
    auto& rho_eps = pert.law;

    for (std::size_t r = 0; r < reps; ++r) {
        rng::Stream stream(rng::derive(seed, r));
        NeumaierSum kl;
        for (std::size_t i = 0; i < rep.n; ++i) {
            double u = rho0.sample_fraction(stream.next_unit());
            kl.add(std::log(rho0.rho(u) / rho_eps.rho(u)));
        }
        rep.kl_plugin.push_back(kl.value());
    }
    double mx = -INFINITY;
    NeumaierSum mean;
    for (double v : rep.kl_plugin) {
        mean.add(v);
        mx = std::max(mx, v);
    }
    rep.kl_plugin_mean = mean.value() / static_cast<double>(reps);
    rep.kl_plugin_max = mx;
    rep.tv_plugin_max = std::sqrt(2.0) / 2.0 * std::sqrt(std::max(mx, 0.0));

    // deterministic counterparts: exact per-sample KL and the tau^2 eps ceiling
    rep.kl_per_sample_quad =
        integrate(
            [&](double a) {
                return rho0.rho(a) * std::log(rho0.rho(a) / rho_eps.rho(a));
            },
            0.5, 1.0, 1e-13)
            .value;
    rep.kl_per_sample_ceiling = tau * tau * epsilon;
    rep.tv_quad = std::sqrt(2.0) / 2.0 *
                  std::sqrt(std::max(rep.kl_per_sample_quad, 0.0) *
                            static_cast<double>(rep.n));
    rep.tv_ceiling =
        std::sqrt(2.0) / 2.0 * tau * std::sqrt(epsilon * static_cast<double>(rep.n));

    rep.moment_shift =
        moment_mk(pi_from_rho(rho_eps), k) - moment_mk(pi_from_rho(rho0), k);
    rep.moment_shift_predicted = pert.r_k * sqrt_eps;
    return rep;
}

} // namespace fragchain
