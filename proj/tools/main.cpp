// Command-line front end: simulation, empirical measures, estimators,
// oracle cross-checks and rate studies. Every run echoes its configuration
// into the output so results can be reproduced bit for bit.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fragchain/densities.hpp"
#include "fragchain/errors.hpp"
#include "fragchain/estimators.hpp"
#include "fragchain/laws.hpp"
#include "fragchain/quadrature.hpp"
#include "fragchain/rng.hpp"
#include "fragchain/simulator.hpp"
#include "fragchain/study.hpp"
#include "fragchain/tagged.hpp"
#include "fragchain/test_functions.hpp"

namespace {

using namespace fragchain;

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw InvalidParameter("cannot open output file: " + path);
    return file;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
    return grid;
}

void add_estimator_flags(CLI::App* cmd, EstimatorConfig& est) {
    cmd->add_option("--kappa1", est.kappa1, "declared exponential-moment order");
    cmd->add_option("--kappa2", est.kappa2, "declared origin-decay order");
    cmd->add_option("--smoothness", est.s, "declared Hoelder smoothness");
    cmd->add_option("--kernel-order", est.N, "vanishing-moment kernel order");
    cmd->add_option("--gamma0", est.gamma0, "truncation fraction");
    cmd->add_option("--mu", est.mu, "rate parameter (0 = default)");
    cmd->add_option("--moment-coeff", est.moment_rule.coeff, "moment bandwidth coefficient");
    cmd->add_option("--density-coeff", est.density_rule.coeff,
                    "density bandwidth coefficient");
}

int run_simulate(const std::string& law_key, double eps, double alpha,
                 std::uint64_t seed, double sigma, double gamma0,
                 std::uint64_t noise_seed, bool with_times, const std::string& out_path) {
    DislocationLaw law = make_law(law_key);
    GrowOptions opts;
    opts.with_times = with_times;
    double threshold = sigma > 0.0 ? eps - sigma : eps;
    FragmentTree tree = grow_tree(law, threshold, alpha, seed, opts);
    ObservationSet obs = sigma > 0.0
                             ? observe_noisy(tree, eps, sigma, gamma0, noise_seed)
                             : observe(tree, eps);
    std::ofstream file;
    write_jsonl(obs, tree, open_out(out_path, file));
    return 0;
}

int run_study_cmd(const StudyConfig& cfg, const std::string& out_path) {
    StudyOutcome outcome = run_study(cfg);
    std::ofstream file;
    write_study_csv(cfg, outcome, open_out(out_path, file));
    return 0;
}

int run_alpha(const std::string& mode, const std::string& law_key, double alpha_true,
              double eps, std::size_t reps, std::size_t pairs_n, std::uint64_t seed,
              const std::string& out_path) {
    DislocationLaw law = make_law(law_key);
    std::ofstream file;
    std::ostream& out = open_out(out_path, file);
    if (mode == "tagged") {
        out << "# mode=tagged law=" << law_key << " alpha=" << alpha_true
            << " eps=" << eps << " reps=" << reps << " seed=" << seed << "\n";
        out << "replicate,T_eps,estimate\n";
        std::vector<double> est(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            TaggedRun run = simulate_tagged_time(law, alpha_true, eps, rng::derive(seed, r));
            est[r] = estimate_alpha_tagged(run.T_eps, eps);
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g", r, run.T_eps, est[r]);
            out << buf << "\n";
        }
        auto res = ExperimentResult::summarize(std::move(est), alpha_true);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "summary,mean=%.17g,se=%.17g,mse=%.17g",
                      res.mean, res.std_error, res.mse);
        out << buf << "\n";
        return 0;
    }
    if (mode == "mle") {
        auto pairs = collect_size_lifetime_pairs(law, alpha_true, pairs_n, seed);
        double ahat = alpha_mle(pairs);
        out << "# mode=mle law=" << law_key << " alpha=" << alpha_true
            << " pairs=" << pairs_n << " seed=" << seed << "\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "alpha_hat,%.17g", ahat);
        out << buf << "\n";
        return 0;
    }
    throw InvalidParameter("estimate-alpha mode must be 'tagged' or 'mle'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and inference for conservative self-similar "
                 "fragmentation chains"};
    app.require_subcommand(1);

    // ---- simulate ----------------------------------------------------------
    std::string law_key = "binary-uniform", out_path, g_key = "identity";
    double eps = 1e-3, alpha = 0.0, sigma = 0.0, gamma0 = 0.5;
    std::uint64_t seed = 1, noise_seed = 0;
    bool with_times = false;

    auto* sim = app.add_subcommand("simulate", "dump one frozen frontier as JSON lines");
    sim->add_option("--law", law_key, "dislocation law key")->required();
    sim->add_option("--eps", eps, "screening threshold")->required();
    sim->add_option("--alpha", alpha, "self-similarity index");
    sim->add_option("--seed", seed, "root seed")->required();
    sim->add_option("--sigma", sigma, "noise level");
    sim->add_option("--gamma0", gamma0, "truncation fraction");
    sim->add_option("--noise-seed", noise_seed, "noise seed");
    sim->add_flag("--with-times", with_times, "draw lifetimes/birth times");
    sim->add_option("--out", out_path, "output path (default stdout)");

    // ---- studies (measure / estimate-moment / estimate-beta / rate-study) --
    StudyConfig study;
    std::string eps_grid_text = "1e-3";
    int moment_k = 1;
    double beta_a = 0.5;

    auto* measure = app.add_subcommand("measure", "replicated empirical measure");
    measure->add_option("--law", study.law);
    measure->add_option("--eps", eps_grid_text, "eps or comma list");
    measure->add_option("--g", g_key, "test function: one|identity|square|c1ramp");
    measure->add_option("--sigma", study.sigma_rule, "0, eps^2, eps^3 or a number");
    measure->add_option("--reps", study.replicates);
    measure->add_option("--seed", study.seed);
    measure->add_option("--out", out_path);
    add_estimator_flags(measure, study.est);

    auto* momcmd = app.add_subcommand("estimate-moment", "moment estimator study");
    momcmd->add_option("--k", moment_k, "moment order")->required();
    momcmd->add_option("--law", study.law);
    momcmd->add_option("--eps", eps_grid_text, "eps or comma list");
    momcmd->add_option("--sigma", study.sigma_rule);
    momcmd->add_option("--reps", study.replicates);
    momcmd->add_option("--seed", study.seed);
    momcmd->add_option("--out", out_path);
    add_estimator_flags(momcmd, study.est);

    auto* betacmd = app.add_subcommand("estimate-beta", "pointwise density estimator study");
    betacmd->add_option("--a", beta_a, "evaluation point")->required();
    betacmd->add_option("--law", study.law);
    betacmd->add_option("--eps", eps_grid_text, "eps or comma list");
    betacmd->add_option("--sigma", study.sigma_rule);
    betacmd->add_option("--reps", study.replicates);
    betacmd->add_option("--seed", study.seed);
    betacmd->add_option("--out", out_path);
    add_estimator_flags(betacmd, study.est);

    auto* ratecmd = app.add_subcommand("rate-study", "estimator study over an eps grid");
    ratecmd->add_option("--law", study.law);
    ratecmd->add_option("--eps-grid", eps_grid_text, "comma-separated decreasing grid");
    ratecmd->add_option("--estimator", study.estimator,
                        "measure:<g>|m1|m2|m3|beta:<a>");
    ratecmd->add_option("--sigma", study.sigma_rule);
    ratecmd->add_option("--reps", study.replicates);
    ratecmd->add_option("--seed", study.seed);
    ratecmd->add_option("--out", out_path);
    add_estimator_flags(ratecmd, study.est);

    // ---- estimate-alpha -----------------------------------------------------
    std::string alpha_mode = "tagged";
    double alpha_true = 1.0;
    std::size_t alpha_reps = 200, alpha_pairs = 10000;
    auto* alphacmd = app.add_subcommand("estimate-alpha", "self-similarity index");
    alphacmd->add_option("--mode", alpha_mode, "tagged|mle")->required();
    alphacmd->add_option("--law", law_key);
    alphacmd->add_option("--alpha", alpha_true, "true index for the simulation");
    alphacmd->add_option("--eps", eps, "threshold for the tagged time");
    alphacmd->add_option("--reps", alpha_reps);
    alphacmd->add_option("--pairs", alpha_pairs, "sample size for the MLE");
    alphacmd->add_option("--seed", seed);
    alphacmd->add_option("--out", out_path);

    // ---- oracle-check -------------------------------------------------------
    double eta = 0.1;
    std::size_t oracle_reps = 100000;
    auto* oracle = app.add_subcommand("oracle-check",
                                      "frozen-frontier vs first-passage identity");
    oracle->add_option("--law", law_key)->required();
    oracle->add_option("--eta", eta)->required();
    oracle->add_option("--fn", g_key, "test function key");
    oracle->add_option("--reps", oracle_reps);
    oracle->add_option("--seed", seed);
    oracle->add_option("--out", out_path);

    // ---- two-point ----------------------------------------------------------
    double tau = 0.1;
    std::size_t tp_reps = 16;
    auto* twopoint = app.add_subcommand("two-point",
                                        "indistinguishability experiment");
    twopoint->add_option("--law", law_key)->required();
    twopoint->add_option("--k", moment_k);
    twopoint->add_option("--eps", eps)->required();
    twopoint->add_option("--tau", tau);
    twopoint->add_option("--reps", tp_reps);
    twopoint->add_option("--seed", seed);
    twopoint->add_option("--out", out_path);

    // ---- kernel -------------------------------------------------------------
    int kernel_order = 2;
    std::string dump_path;
    auto* kernelcmd = app.add_subcommand("kernel", "vanishing-moment kernel inspection");
    kernelcmd->add_option("--order", kernel_order)->required();
    kernelcmd->add_option("--dump", dump_path, "CSV of (a, phi, phi')");

    // Every subcommand accepts --config <file>, a flat key=value file whose
    // keys are the long option names. Explicit flags override file values.
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] != "--config") continue;
        if (i + 1 >= args.size()) {
            std::cerr << "error: --config needs a file argument\n";
            return 1;
        }
        std::ifstream cfg(args[i + 1]);
        if (!cfg) {
            std::cerr << "error: cannot open config file: " << args[i + 1] << "\n";
            return 1;
        }
        std::vector<std::string> expanded;
        std::string line;
        while (std::getline(cfg, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            expanded.push_back("--" + line.substr(0, eq));
            expanded.push_back(line.substr(eq + 1));
        }
        args.erase(args.begin() + i, args.begin() + i + 2);
        args.insert(args.begin() + i, expanded.begin(), expanded.end());
        break;
    }
    for (auto* sub : app.get_subcommands({}))
        for (CLI::Option* opt : sub->get_options())
            if (opt->get_expected_min() > 0)
                opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& a : args) cargs.push_back(a.c_str());
    CLI11_PARSE(app, static_cast<int>(cargs.size()), cargs.data());

    try {
        if (sim->parsed())
            return run_simulate(law_key, eps, alpha, seed, sigma, gamma0, noise_seed,
                                with_times, out_path);
        if (measure->parsed() || momcmd->parsed() || betacmd->parsed() ||
            ratecmd->parsed()) {
            study.eps_grid = parse_grid(eps_grid_text);
            if (measure->parsed()) study.estimator = "measure:" + g_key;
            if (momcmd->parsed()) study.estimator = "m" + std::to_string(moment_k);
            if (betacmd->parsed()) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "beta:%.6g", beta_a);
                study.estimator = buf;
            }
            return run_study_cmd(study, out_path);
        }
        if (alphacmd->parsed())
            return run_alpha(alpha_mode, law_key, alpha_true, eps, alpha_reps,
                             alpha_pairs, seed, out_path);
        if (oracle->parsed()) {
            auto rep = oracle_check_lemma(make_law(law_key), eta, make_named_g(g_key),
                                          oracle_reps, seed);
            std::ofstream file;
            std::ostream& out = open_out(out_path, file);
            out << "law,eta,fn,reps,lhs_mean,lhs_se,rhs_mean,rhs_se,z\n";
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%s,%.17g,%s,%zu,%.17g,%.17g,%.17g,%.17g,%.6g",
                          law_key.c_str(), eta, g_key.c_str(), rep.replicates,
                          rep.lhs_mean, rep.lhs_se, rep.rhs_mean, rep.rhs_se, rep.z);
            out << buf << "\n";
            return 0;
        }
        if (twopoint->parsed()) {
            auto law = make_law(law_key);
            const auto* bin = std::get_if<BinaryDislocationLaw>(&law);
            if (!bin) throw InvalidParameter("two-point experiment needs a binary law");
            auto rep = two_point_experiment(*bin, moment_k, eps, tau, tp_reps, seed);
            std::ofstream file;
            std::ostream& out = open_out(out_path, file);
            out << "n,r_k,kl_plugin_mean,kl_plugin_max,tv_plugin_max,"
                   "kl_per_sample_quad,kl_per_sample_ceiling,tv_quad,tv_ceiling,"
                   "moment_shift,moment_shift_predicted\n";
            char buf[384];
            std::snprintf(buf, sizeof(buf),
                          "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                          rep.n, rep.r_k, rep.kl_plugin_mean, rep.kl_plugin_max,
                          rep.tv_plugin_max, rep.kl_per_sample_quad,
                          rep.kl_per_sample_ceiling, rep.tv_quad, rep.tv_ceiling,
                          rep.moment_shift, rep.moment_shift_predicted);
            out << buf << "\n";
            return 0;
        }
        if (kernelcmd->parsed()) {
            Kernel k = make_kernel(kernel_order);
            std::printf("order %d moments:", k.order);
            for (double m : k.moments) std::printf(" %.3e", m);
            std::printf("\n");
            if (!dump_path.empty()) {
                std::ofstream file(dump_path);
                file << "a,phi,dphi\n";
                for (int i = 0; i <= 2000; ++i) {
                    double a = static_cast<double>(i) / 2000.0;
                    char buf[128];
                    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", a,
                                  k.phi.eval(a), k.phi.deriv(a));
                    file << buf << "\n";
                }
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
