#include "fragchain/densities.hpp"

#include <algorithm>
#include <cmath>

#include "fragchain/errors.hpp"
#include "fragchain/quadrature.hpp"

namespace fragchain {

namespace {

// Cutoff c solving kappa1*c - 5 log c = 38, so that x^k e^{-kappa1 x} is below
// ~1e-15 at the cutoff for k <= 5.
double default_cutoff(double kappa1) {
    double c = 38.0 / kappa1;
    for (int i = 0; i < 4; ++i) c = (38.0 + 5.0 * std::log(std::max(c, 3.0))) / kappa1;
    return c;
}

} // namespace

LevyDensity LevyDensity::make(std::function<double(double)> pi, double kappa1,
                              double kappa2, double cutoff,
                              std::vector<double> breakpoints, std::string key) {
    if (!(kappa1 > 0.0) || !(kappa2 > 0.0))
        throw InvalidParameter("class orders kappa1, kappa2 must be positive");
    LevyDensity out;
    out.pi = std::move(pi);
    out.kappa1 = kappa1;
    out.kappa2 = kappa2;
    if (cutoff > 0.0) {
        out.quadrature_cutoff = cutoff;
    } else {
        // the decay-rate formula is blind to the density's coefficient, so
        // extend until the integrand of the fifth moment is truly negligible
        double c = default_cutoff(kappa1);
        while (c < 1e4 && out.pi(c) * std::pow(std::max(c, 1.0), 5) > 1e-16) c *= 1.25;
        out.quadrature_cutoff = c;
    }
    out.breakpoints = std::move(breakpoints);
    out.key = std::move(key);

    auto mass = integrate(out.pi, 0.0, out.quadrature_cutoff, 1e-11, out.breakpoints);
    if (std::abs(mass.value - 1.0) > 1e-8)
        throw InvalidDensity("pi does not integrate to 1 on [0, cutoff] (got " +
                             std::to_string(mass.value) + ")");

    // Spot-verify the declared exponential moment slightly inside the class.
    double kappa = 0.9 * kappa1;
    auto expm = integrate([&](double x) { return std::exp(kappa * x) * out.pi(x); }, 0.0,
                          out.quadrature_cutoff, 1e-9, out.breakpoints);
    if (!std::isfinite(expm.value))
        throw InvalidDensity("exponential moment diverges below declared kappa1");

    // Cumulative table for tail(): per-cell Simpson on a fine uniform grid.
    const std::size_t cells = 32768;
    double dx = out.quadrature_cutoff / static_cast<double>(cells);
    auto knots = std::make_shared<std::vector<double>>(cells + 1);
    NeumaierSum acc;
    std::vector<double> cdf(cells + 1, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
        double a = dx * static_cast<double>(i);
        acc.add(dx *
                (out.pi(a) + 4.0 * out.pi(a + 0.5 * dx) + out.pi(a + dx)) / 6.0);
        cdf[i + 1] = acc.value();
    }
    double total = cdf.back();
    for (std::size_t i = 0; i <= cells; ++i) (*knots)[i] = total - cdf[i];
    out.tail_knots_ = std::move(knots);
    out.tail_dx_ = dx;
    return out;
}

double LevyDensity::tail(double x) const {
    if (x >= quadrature_cutoff) return 0.0;
    if (x <= 0.0) return (*tail_knots_)[0];
    auto i = static_cast<std::size_t>(x / tail_dx_);
    if (i >= tail_knots_->size() - 1) i = tail_knots_->size() - 2;
    double xi = tail_dx_ * static_cast<double>(i);
    // subtract the short leg [xi, x] with a trapezoid
    return (*tail_knots_)[i] - 0.5 * (x - xi) * (pi(xi) + pi(x));
}

BetaDensity BetaDensity::make(std::function<double(double)> beta,
                              std::vector<double> breakpoints, std::string key) {
    BetaDensity out;
    out.beta = std::move(beta);
    out.breakpoints = std::move(breakpoints);
    out.key = std::move(key);

    auto mass = integrate(out.beta, 0.0, 1.0, 1e-10, out.breakpoints);
    if (std::abs(mass.value - 1.0) > 1e-8)
        throw InvalidDensity("beta does not integrate to 1 on (0,1) (got " +
                             std::to_string(mass.value) + ")");
    for (int i = 1; i < 2048; ++i) {
        double a = static_cast<double>(i) / 2048.0;
        if (out.beta(a) < -1e-12) throw InvalidDensity("beta takes negative values");
    }
    return out;
}

LevyDensity pi_from_rho(const BinaryDislocationLaw& law) {
    const double log2 = std::log(2.0);
    auto rho = law.rho;
    auto pi = [rho, log2](double x) {
        if (x < 0.0) return 0.0;
        double e = std::exp(-x);
        double r = x <= log2 ? rho(e) : rho(1.0 - e);
        return e * e * r;
    };
    std::vector<double> breaks = {log2};
    for (double b : law.breakpoints) {
        breaks.push_back(-std::log(b));       // rho kink reached from the first branch
        if (1.0 - b > 0.0) breaks.push_back(-std::log(1.0 - b)); // and from the second
    }
    return LevyDensity::make(pi, law.kappa1, law.kappa2, 0.0, std::move(breaks), law.key);
}

BetaDensity beta_from_pi(const LevyDensity& pi) {
    auto p = pi.pi;
    auto beta = [p](double a) {
        if (a <= 0.0 || a >= 1.0) return 0.0;
        return p(-std::log(a)) / a;
    };
    std::vector<double> breaks;
    for (double x : pi.breakpoints)
        if (x > 0.0) breaks.push_back(std::exp(-x));
    // the quadrature cutoff maps to a lower support edge near 0
    breaks.push_back(std::exp(-pi.quadrature_cutoff));
    std::sort(breaks.begin(), breaks.end());
    return BetaDensity::make(beta, std::move(breaks), pi.key);
}

LevyDensity pi_from_beta(const BetaDensity& beta, double kappa1, double kappa2) {
    auto b = beta.beta;
    auto pi = [b](double x) {
        if (x < 0.0) return 0.0;
        double a = std::exp(-x);
        return a * b(a);
    };
    std::vector<double> breaks;
    for (double a : beta.breakpoints)
        if (a > 0.0 && a < 1.0) breaks.push_back(-std::log(a));
    std::sort(breaks.begin(), breaks.end());
    return LevyDensity::make(pi, kappa1, kappa2, 0.0, std::move(breaks), beta.key);
}

BetaDensity beta_from_rho(const BinaryDislocationLaw& law) {
    auto rho = law.rho;
    auto beta = [rho](double a) {
        if (a <= 0.0 || a >= 1.0) return 0.0;
        return a * (a >= 0.5 ? rho(a) : rho(1.0 - a));
    };
    std::vector<double> breaks = {0.5};
    for (double b : law.breakpoints) {
        breaks.push_back(b);
        breaks.push_back(1.0 - b);
    }
    std::sort(breaks.begin(), breaks.end());
    return BetaDensity::make(beta, std::move(breaks), law.key);
}

double moment_mk(const LevyDensity& pi, int k) {
    if (k < 1) throw InvalidParameter("moment order k must be >= 1");
    const double c = pi.quadrature_cutoff;
    auto integrand = [&](double x) { return std::pow(x, k) * pi.pi(x); };
    auto val = integrate(integrand, 0.0, c, 1e-10, pi.breakpoints);

    // Tail heuristic: fit a local exponential decay rate at the cutoff and
    // extrapolate; reject if the extrapolated mass is not negligible.
    double p1 = pi.pi(0.9 * c), p2 = pi.pi(c);
    if (p2 > 0.0 && p1 > 0.0) {
        double rate = std::log(p1 / p2) / (0.1 * c);
        double tail = rate > 0.0 ? std::pow(c, k) * p2 / rate
                                 : std::numeric_limits<double>::infinity();
        if (!(tail < 1e-9))
            throw DivergentMoment("tail of x^k pi(x) beyond the cutoff is not negligible");
    }
    return val.value;
}

double moment_mk_via_beta(const BetaDensity& beta, int k) {
    if (k < 1) throw InvalidParameter("moment order k must be >= 1");
    // Substituting a = e^{-x} removes the logarithmic endpoint singularity;
    // the integrand still goes through the BetaDensity callback.
    auto integrand = [&](double x) {
        double a = std::exp(-x);
        if (a <= 0.0 || a >= 1.0) return 0.0;
        return std::pow(x, k) * a * beta.beta(a);
    };
    std::vector<double> breaks;
    for (double a : beta.breakpoints)
        if (a > 0.0 && a < 1.0) breaks.push_back(-std::log(a));
    return integrate(integrand, 0.0, 700.0, 1e-10, breaks).value;
}

double limit_measure(const LevyDensity& pi, const TestFunction& g) {
    double m1 = moment_mk(pi, 1);
    if (m1 < 1e-12) throw ZeroMean("m1(pi) below 1e-12; limit measure undefined");

    // E(g) = (1/m1) int_0^inf g(e^{-x}) tail(x) dx. g has support in [0,1] so
    // the integrand vanishes nowhere to clip; the cutoff bounds the domain.
    std::vector<double> breaks;
    for (double b : g.breakpoints)
        if (b > 0.0 && b < 1.0) breaks.push_back(-std::log(b));
    if (g.support_lo > 0.0) breaks.push_back(-std::log(g.support_lo));
    if (g.support_hi < 1.0) breaks.push_back(-std::log(g.support_hi));
    for (double x : pi.breakpoints) breaks.push_back(x);
    std::sort(breaks.begin(), breaks.end());

    auto integrand = [&](double x) {
        double a = std::exp(-x);
        double val = g(a);
        if (val == 0.0) return 0.0;
        return val * pi.tail(x);
    };
    auto res = integrate(integrand, 0.0, pi.quadrature_cutoff, 1e-9, breaks);
    return res.value / m1;
}

} // namespace fragchain
