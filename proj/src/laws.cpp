#include "fragchain/laws.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fragchain/errors.hpp"
#include "fragchain/quadrature.hpp"

namespace fragchain {

MassPartition::MassPartition(std::vector<double> s, double tol) : sizes(std::move(s)) {
    if (sizes.empty()) throw InvalidParameter("mass partition must be non-empty");
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    NeumaierSum sum;
    for (double x : sizes) {
        if (!(x > 0.0) || x > 1.0)
            throw InvalidParameter("mass partition sizes must lie in (0,1]");
        sum.add(x);
    }
    if (std::abs(sum.value() - 1.0) > tol)
        throw InvalidParameter("mass partition does not sum to 1");
}

PiecewiseCdfSampler::PiecewiseCdfSampler(const std::function<double(double)>& density,
                                         double lo, double hi, std::size_t cells)
    : lo_(lo), hi_(hi), dx_((hi - lo) / static_cast<double>(cells)) {
    cdf_.resize(cells + 1);
    cdf_[0] = 0.0;
    NeumaierSum acc;
    for (std::size_t i = 0; i < cells; ++i) {
        double a = lo_ + dx_ * static_cast<double>(i);
        double m = density(a + 0.5 * dx_);
        double b = density(a);
        double c = density(a + dx_);
        if (!std::isfinite(b) || !std::isfinite(c) || !std::isfinite(m) || m < 0.0 ||
            b < 0.0 || c < 0.0)
            throw SamplerFailure("density non-finite or negative on sampling grid");
        acc.add(dx_ * (b + 4.0 * m + c) / 6.0);
        cdf_[i + 1] = acc.value();
    }
    total_ = cdf_.back();
    if (!(total_ > 0.0)) throw SamplerFailure("density has zero total mass");
    for (std::size_t i = 1; i < cdf_.size(); ++i)
        if (cdf_[i] < cdf_[i - 1]) throw SamplerFailure("inverse-CDF table not monotone");
}

double PiecewiseCdfSampler::sample(double u) const {
    double target = u * total_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
    if (i >= cdf_.size() - 1) i = cdf_.size() - 2;
    double mass = cdf_[i + 1] - cdf_[i];
    double frac = mass > 0.0 ? (target - cdf_[i]) / mass : 0.0;
    frac = std::clamp(frac, 0.0, 1.0);
    double x = lo_ + dx_ * (static_cast<double>(i) + frac);
    return std::min(x, hi_);
}

BinaryDislocationLaw BinaryDislocationLaw::make(std::function<double(double)> rho,
                                                double kappa1, double kappa2,
                                                std::string key,
                                                std::vector<double> breakpoints) {
    BinaryDislocationLaw law;
    law.rho = std::move(rho);
    law.kappa1 = kappa1;
    law.kappa2 = kappa2;
    law.key = std::move(key);
    law.breakpoints = std::move(breakpoints);

    auto mass = integrate(law.rho, 0.5, 1.0, 1e-12, law.breakpoints);
    if (std::abs(mass.value - 1.0) > 1e-10)
        throw InvalidDensity("rho does not integrate to 1 on [1/2,1] (got " +
                             std::to_string(mass.value) + ")");

    double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4096; ++i) {
        double a = 0.5 + 0.5 * static_cast<double>(i) / 4096.0;
        inf = std::min(inf, law.rho(a));
    }
    law.lower_bound = std::max(inf, 0.0);

    law.sampler = std::make_shared<PiecewiseCdfSampler>(law.rho, 0.5, 1.0);
    return law;
}

DiscreteDislocationLaw DiscreteDislocationLaw::make(std::vector<Atom> atoms,
                                                    std::string key) {
    DiscreteDislocationLaw law;
    law.atoms = std::move(atoms);
    law.key = std::move(key);
    if (law.atoms.empty()) throw InvalidParameter("discrete law needs at least one atom");
    NeumaierSum p;
    for (const auto& atom : law.atoms) {
        if (!(atom.probability > 0.0))
            throw InvalidParameter("atom probabilities must be positive");
        // Assumption A: the trivial partition (1,0,...) carries no mass.
        if (atom.partition.sizes.size() == 1)
            throw InvalidDensity("degenerate single-fragment atom is not allowed");
        p.add(atom.probability);
    }
    if (std::abs(p.value() - 1.0) > 1e-12)
        throw InvalidDensity("atom probabilities do not sum to 1");
    return law;
}

std::size_t DiscreteDislocationLaw::sample_atom(double u) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        acc += atoms[i].probability;
        if (u < acc) return i;
    }
    return atoms.size() - 1;
}

const std::string& law_key(const DislocationLaw& law) {
    return std::visit([](const auto& l) -> const std::string& { return l.key; }, law);
}

namespace {

BinaryDislocationLaw make_binary_uniform() {
    auto law = BinaryDislocationLaw::make([](double) { return 2.0; }, 2.0, 1.0,
                                          "binary-uniform");
    return law;
}

// Beta(p,q) density rescaled to [1/2,1]. The associated step density decays
// like x^(q-1) at the origin and like e^{-(q+1)x} in the tail.
BinaryDislocationLaw make_binary_beta(double p, double q) {
    if (!(p > 0.0) || !(q > 0.0)) throw InvalidParameter("beta parameters must be positive");
    double norm = 2.0 / std::beta(p, q);
    auto rho = [p, q, norm](double a) {
        double u = 2.0 * a - 1.0;
        if (u <= 0.0 || u >= 1.0) {
            // endpoint limits, continuous extension where finite
            if (u == 0.0 && p >= 1.0) return p == 1.0 ? norm : 0.0;
            if (u == 1.0 && q >= 1.0) return q == 1.0 ? norm : 0.0;
            return 0.0;
        }
        return norm * std::pow(u, p - 1.0) * std::pow(1.0 - u, q - 1.0);
    };
    char buf[64];
    std::snprintf(buf, sizeof(buf), "binary-beta(%g,%g)", p, q);
    return BinaryDislocationLaw::make(rho, q + 1.0, q, buf);
}

DiscreteDislocationLaw make_dyadic() {
    std::vector<DiscreteDislocationLaw::Atom> atoms;
    atoms.push_back({MassPartition({0.5, 0.5}), 1.0});
    return DiscreteDislocationLaw::make(std::move(atoms), "dyadic");
}

// Equal-weight mixture of three dyadic-rational partitions; products of the
// fragment sizes stay exact in binary floating point.
DiscreteDislocationLaw make_ternary_uniform() {
    std::vector<DiscreteDislocationLaw::Atom> atoms;
    atoms.push_back({MassPartition({0.5, 0.25, 0.25}), 1.0 / 3.0});
    atoms.push_back({MassPartition({0.375, 0.375, 0.25}), 1.0 / 3.0});
    atoms.push_back({MassPartition({0.5, 0.375, 0.125}), 1.0 / 3.0});
    return DiscreteDislocationLaw::make(std::move(atoms), "ternary-uniform-discrete");
}

} // namespace

BinaryDislocationLaw law_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open density file: " + path);
    auto table = std::make_shared<std::vector<std::pair<double, double>>>();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double a, v;
        if (row >> a >> v) table->emplace_back(a, v);
    }
    if (table->size() < 2) throw InvalidParameter("density file needs >= 2 rows");
    std::sort(table->begin(), table->end());
    if (table->front().first > 0.5 || table->back().first < 1.0)
        throw InvalidParameter("tabulated density must cover [1/2,1]");

    auto rho = [table](double a) {
        auto it = std::lower_bound(table->begin(), table->end(), a,
                                   [](const auto& r, double x) { return r.first < x; });
        if (it == table->begin()) return it->second;
        if (it == table->end()) return table->back().second;
        auto prev = it - 1;
        double w = (a - prev->first) / (it->first - prev->first);
        return prev->second + w * (it->second - prev->second);
    };
    std::vector<double> breaks;
    for (const auto& [a, v] : *table)
        if (a > 0.5 && a < 1.0) breaks.push_back(a);
    return BinaryDislocationLaw::make(rho, 1.0, 1.0, "csv:" + path, std::move(breaks));
}

DislocationLaw make_law(const std::string& key) {
    if (key == "binary-uniform") return make_binary_uniform();
    if (key == "dyadic") return make_dyadic();
    if (key == "ternary-uniform-discrete") return make_ternary_uniform();
    if (key.rfind("binary-beta(", 0) == 0 && key.back() == ')') {
        std::string args = key.substr(12, key.size() - 13);
        auto comma = args.find(',');
        if (comma == std::string::npos)
            throw InvalidParameter("expected binary-beta(p,q): " + key);
        double p = std::stod(args.substr(0, comma));
        double q = std::stod(args.substr(comma + 1));
        return make_binary_beta(p, q);
    }
    if (key.rfind("csv:", 0) == 0) return law_from_csv(key.substr(4));
    throw InvalidParameter("unknown law key: " + key);
}

} // namespace fragchain
