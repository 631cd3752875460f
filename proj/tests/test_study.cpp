#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fragchain/errors.hpp"
#include "fragchain/rng.hpp"
#include "fragchain/study.hpp"

using namespace fragchain;

TEST_CASE("rate fit recovers an exact power law") {
    std::vector<std::pair<double, double>> pts = {{1e-2, 1e-2}, {1e-3, 1e-3}, {1e-4, 1e-4}};
    RateFit fit = fit_rate(pts);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.slope_se == doctest::Approx(0.0));
    CHECK(!fit.degenerate);

    std::vector<std::pair<double, double>> quad = {{1e-1, 2e-2}, {1e-2, 2e-4}, {1e-3, 2e-6}};
    CHECK(fit_rate(quad).slope == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("rate fit with multiplicative jitter stays near the truth") {
    rng::Stream stream = rng::root_stream(5);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 8; ++i) {
        double eps = std::pow(10.0, -1.0 - 0.5 * i);
        double jitter = 1.0 + 0.1 * stream.next_signed_unit();
        pts.emplace_back(eps, 3.0 * eps * jitter);
    }
    RateFit fit = fit_rate(pts);
    CHECK(std::abs(fit.slope - 1.0) <= 0.1);
}

TEST_CASE("rate fit degenerates on exact matches") {
    std::vector<std::pair<double, double>> pts = {{1e-2, 1e-3}, {1e-3, 0.0}, {1e-4, 1e-5}};
    RateFit fit = fit_rate(pts);
    CHECK(fit.degenerate);
    CHECK_THROWS_AS(fit_rate(std::vector<std::pair<double, double>>{{1e-2, 1e-3}}),
                    InvalidParameter);
}

TEST_CASE("study config validation") {
    StudyConfig cfg;
    cfg.eps_grid = {1e-2, 1e-3};
    cfg.replicates = 1;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg.replicates = 4;
    cfg.eps_grid = {1e-3, 1e-2};
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg.eps_grid = {1e-2, 1e-3};
    CHECK_NOTHROW(cfg.validate());
    CHECK(sigma_for("eps^3", 1e-2) == doctest::Approx(1e-6));
    CHECK(sigma_for("0", 1e-2) == 0.0);
    CHECK_THROWS_AS(sigma_for("bogus", 1e-2), InvalidParameter);
}

TEST_CASE("study means track the oracle and MSE shrinks with eps") {
    StudyConfig cfg;
    cfg.law = "binary-uniform";
    cfg.eps_grid = {1e-2, 1e-3};
    cfg.replicates = 64;
    cfg.seed = 91;
    cfg.estimator = "measure:identity";
    StudyOutcome out = run_study(cfg);
    REQUIRE(out.per_eps.size() == 2);
    CHECK(*out.per_eps[0].reference == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    for (const auto& res : out.per_eps)
        CHECK(std::abs(res.mean - 2.0 / 3.0) <= 4.0 * res.std_error);
    CHECK(out.per_eps[1].mse < out.per_eps[0].mse);
}

TEST_CASE("studies are byte-identical across runs") {
    StudyConfig cfg;
    cfg.law = "ternary-uniform-discrete";
    cfg.eps_grid = {5e-2, 1e-2, 2e-3};
    cfg.replicates = 16;
    cfg.seed = 2024;
    cfg.estimator = "measure:square";
    std::ostringstream a, b;
    write_study_csv(cfg, run_study(cfg), a);
    write_study_csv(cfg, run_study(cfg), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("config_hash=0x") != std::string::npos);
    CHECK(a.str().find("# seed=2024") != std::string::npos);
    CHECK(a.str().find("ratefit") != std::string::npos);
}

TEST_CASE("noise rule reuses tree seeds so paired studies share trees") {
    StudyConfig base;
    base.law = "binary-uniform";
    base.eps_grid = {1e-3};
    base.replicates = 8;
    base.seed = 7;
    base.estimator = "measure:c1ramp";
    StudyConfig noisy = base;
    noisy.sigma_rule = "eps^3";
    StudyOutcome a = run_study(base);
    StudyOutcome b = run_study(noisy);
    for (std::size_t r = 0; r < 8; ++r)
        CHECK(std::abs(a.per_eps[0].values[r] - b.per_eps[0].values[r]) <= 1e-5);
}

TEST_CASE("moment study over a grid reports a positive rate") {
    StudyConfig cfg;
    cfg.law = "binary-uniform";
    cfg.eps_grid = {1e-2, 1e-3, 1e-4};
    cfg.replicates = 24;
    cfg.seed = 3;
    cfg.estimator = "m1";
    cfg.est.kappa2 = 0.1;
    StudyOutcome out = run_study(cfg);
    REQUIRE(out.has_fit);
    CHECK(!out.fit.degenerate);
    CHECK(out.fit.slope > 0.0);
}
