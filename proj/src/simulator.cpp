#include "fragchain/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "fragchain/errors.hpp"
#include "fragchain/quadrature.hpp"
#include "fragchain/rng.hpp"

namespace fragchain {

namespace {

// Children sizes for one split. The last child takes the exact remainder so a
// split conserves the parent mass to the last bit.
void split_sizes(const DislocationLaw& law, double parent, std::uint64_t stream,
                 std::vector<double>& out) {
    out.clear();
    double u = rng::to_unit(rng::derive(stream, rng::kTagPartition));
    if (const auto* bin = std::get_if<BinaryDislocationLaw>(&law)) {
        double s = bin->sample_fraction(u);
        double first = parent * s;
        out.push_back(first);
        out.push_back(parent - first);
    } else {
        const auto& disc = std::get<DiscreteDislocationLaw>(law);
        const auto& atom = disc.atoms[disc.sample_atom(u)];
        const auto& sizes = atom.partition.sizes;
        double used = 0.0;
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
            double c = parent * sizes[i];
            out.push_back(c);
            used += c;
        }
        out.push_back(parent - used);
    }
}

double node_noise(std::uint64_t node_stream, std::uint64_t noise_seed) {
    std::uint64_t s = rng::derive(rng::derive(node_stream, rng::kTagNoise), noise_seed);
    return 2.0 * rng::to_unit(rng::splitmix64(s)) - 1.0;
}

} // namespace

std::string FragmentTree::label(std::int32_t node) const {
    std::vector<std::int32_t> path;
    for (std::int32_t i = node; i > 0; i = nodes[i].parent) {
        const auto& p = nodes[nodes[i].parent];
        path.push_back(i - p.child_begin);
    }
    std::string out;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (!out.empty()) out += '.';
        out += std::to_string(*it);
    }
    return out;
}

FragmentTree grow_tree(const DislocationLaw& law, double threshold, double alpha,
                       std::uint64_t seed, const GrowOptions& opts) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw InvalidThreshold("screening threshold must lie in (0,1)");
    if (alpha < 0.0) throw InvalidParameter("self-similarity index must be >= 0");

    FragmentTree tree;
    tree.threshold = threshold;
    tree.alpha = alpha;
    tree.seed = seed;
    tree.with_times = opts.with_times;
    tree.law_key = law_key(law);

    FragmentNode root;
    root.size = 1.0;
    root.stream = rng::root_stream(seed).state();
    tree.nodes.push_back(root);

    NeumaierSum defect;
    std::vector<double> children;
    std::vector<std::size_t> work;
    work.push_back(0);

    while (!work.empty()) {
        std::size_t idx = work.back();
        work.pop_back();

        double size = tree.nodes[idx].size;
        if (size < threshold) continue;

        if (opts.with_times) {
            double rate = std::pow(size, alpha);
            tree.nodes[idx].lifetime =
                rng::Stream(rng::derive(tree.nodes[idx].stream, rng::kTagLifetime))
                    .next_exponential(rate);
        }

        split_sizes(law, size, tree.nodes[idx].stream, children);

        if (tree.nodes.size() + children.size() > opts.max_nodes)
            throw BudgetExceeded("fragment budget exceeded; raise max_nodes or eps");

        double birth = tree.nodes[idx].birth_time + tree.nodes[idx].lifetime;
        std::int32_t begin = static_cast<std::int32_t>(tree.nodes.size());
        std::int32_t count = 0;
        for (std::size_t c = 0; c < children.size(); ++c) {
            if (children[c] < opts.dust_floor) {
                defect.add(children[c]);
                continue;
            }
            FragmentNode child;
            child.size = children[c];
            child.birth_time = birth;
            child.parent = static_cast<std::int32_t>(idx);
            child.stream = rng::derive(tree.nodes[idx].stream, rng::kTagChildBase + c);
            tree.nodes.push_back(child);
            ++count;
        }
        tree.nodes[idx].child_begin = begin;
        tree.nodes[idx].child_count = count;
        for (std::int32_t c = 0; c < count; ++c)
            work.push_back(static_cast<std::size_t>(begin + c));
    }
    tree.mass_defect = defect.value();
    return tree;
}

ObservationSet observe(const FragmentTree& tree, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidThreshold("screening threshold must lie in (0,1)");
    if (epsilon < tree.threshold * (1.0 - 1e-12))
        throw InvalidThreshold("tree was not grown down to the requested threshold");

    ObservationSet obs;
    obs.epsilon = epsilon;
    obs.sigma = 0.0;
    obs.gamma0 = 0.5;
    obs.seed = tree.seed;
    obs.mass_defect = tree.mass_defect;
    obs.law_key = tree.law_key;

    // sizes decrease along every lineage, so a single scan finds the frontier
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
        const auto& node = tree.nodes[i];
        const auto& parent = tree.nodes[node.parent];
        if (node.size < epsilon && parent.size >= epsilon) {
            FrozenFragment f;
            f.true_size = node.size;
            f.noisy_size = node.size;
            f.parent_size = parent.size;
            f.parent_noisy = parent.size;
            f.birth_time = node.birth_time;
            f.lifetime = node.lifetime;
            f.node = static_cast<std::int32_t>(i);
            obs.fragments.push_back(f);
        }
    }
    return obs;
}

ObservationSet observe_noisy(const FragmentTree& tree, double epsilon, double sigma,
                             double gamma0, std::uint64_t noise_seed) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidThreshold("screening threshold must lie in (0,1)");
    if (sigma < 0.0) throw InvalidParameter("noise level must be >= 0");
    if (sigma >= epsilon / 2.0)
        throw NoiseTooLarge("noise level must satisfy sigma < eps/2");
    if (!(gamma0 > 0.0) || !(gamma0 < 1.0))
        throw InvalidParameter("truncation fraction gamma0 must lie in (0,1)");
    if (tree.threshold > (epsilon - sigma) * (1.0 + 1e-12))
        throw InvalidThreshold("tree must be grown down to eps - sigma for noisy frontiers");

    ObservationSet obs;
    obs.epsilon = epsilon;
    obs.sigma = sigma;
    obs.gamma0 = gamma0;
    obs.seed = tree.seed;
    obs.noise_seed = noise_seed;
    obs.mass_defect = tree.mass_defect;
    obs.law_key = tree.law_key;

    const double t_eps = gamma0 * epsilon;
    std::vector<double> noisy(tree.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
        noisy[i] = tree.nodes[i].size + sigma * node_noise(tree.nodes[i].stream, noise_seed);

    // A node is on the noisy frontier if it is the first node of its lineage
    // whose noisy size drops below eps. Parents precede children, so one pass
    // with a reachability flag suffices even though noisy sizes need not be
    // monotone along a lineage.
    std::vector<char> reachable(tree.nodes.size(), 0);
    reachable[0] = 1;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (!reachable[i]) continue;
        bool frozen = noisy[i] < epsilon;
        if (frozen && i == 0) continue; // a root below eps is not observable
        if (frozen) {
            const auto& node = tree.nodes[i];
            FrozenFragment f;
            f.true_size = node.size;
            f.noisy_size = noisy[i];
            f.parent_size = tree.nodes[node.parent].size;
            f.parent_noisy = noisy[static_cast<std::size_t>(node.parent)];
            f.birth_time = node.birth_time;
            f.lifetime = node.lifetime;
            f.node = static_cast<std::int32_t>(i);
            f.truncated = noisy[i] < t_eps;
            obs.fragments.push_back(f);
            continue;
        }
        const auto& node = tree.nodes[i];
        for (std::int32_t c = 0; c < node.child_count; ++c)
            reachable[static_cast<std::size_t>(node.child_begin + c)] = 1;
    }
    return obs;
}

ObservationSet simulate_observation(const DislocationLaw& law, double epsilon,
                                    double alpha, std::uint64_t seed, double sigma,
                                    double gamma0, std::uint64_t noise_seed,
                                    const GrowOptions& opts) {
    if (sigma > 0.0) {
        if (sigma >= epsilon / 2.0)
            throw NoiseTooLarge("noise level must satisfy sigma < eps/2");
        FragmentTree tree = grow_tree(law, epsilon - sigma, alpha, seed, opts);
        return observe_noisy(tree, epsilon, sigma, gamma0, noise_seed);
    }
    FragmentTree tree = grow_tree(law, epsilon, alpha, seed, opts);
    return observe(tree, epsilon);
}

void write_jsonl(const ObservationSet& obs, const FragmentTree& tree, std::ostream& out) {
    nlohmann::json header = {
        {"epsilon", obs.epsilon},       {"sigma", obs.sigma},
        {"gamma0", obs.gamma0},         {"seed", obs.seed},
        {"noise_seed", obs.noise_seed}, {"mass_defect", obs.mass_defect},
        {"law", obs.law_key},           {"count", obs.fragments.size()},
    };
    out << header.dump() << '\n';
    for (const auto& f : obs.fragments) {
        nlohmann::json rec = {
            {"label", tree.label(f.node)},
            {"size", f.true_size},
            {"noisy_size", f.noisy_size},
            {"parent_size", f.parent_size},
            {"birth_time", f.birth_time},
            {"lifetime", f.lifetime},
            {"truncated", f.truncated},
        };
        out << rec.dump() << '\n';
    }
}

} // namespace fragchain
