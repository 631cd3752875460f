#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fragchain/laws.hpp"

namespace fragchain {

//! One node of the marked genealogical tree. Children of a node are stored
//! contiguously, parents always precede children in the arena.
struct FragmentNode {
    double size = 0.0;
    double birth_time = 0.0;
    double lifetime = 0.0;
    std::int32_t parent = -1;
    std::int32_t child_begin = 0;
    std::int32_t child_count = 0;
    std::uint64_t stream = 0; //!< label-derived RNG stream
};

struct GrowOptions {
    std::size_t max_nodes = 8'000'000; //!< budget cap; guards tiny thresholds
    bool with_times = false;           //!< draw exponential lifetimes (rate size^alpha)
    double dust_floor = 1e-15;         //!< fragments below this are discarded into mass_defect
};

//! Full genealogy down to a true-size threshold: every fragment of size >=
//! threshold is split exactly once more, children below stay as leaves.
struct FragmentTree {
    std::vector<FragmentNode> nodes;
    double threshold = 0.0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    bool with_times = false;
    double mass_defect = 0.0;
    std::string law_key;

    //! Path of child indices from the root ("" for the root, e.g. "0.1.0").
    std::string label(std::int32_t node) const;
};

FragmentTree grow_tree(const DislocationLaw& law, double threshold, double alpha,
                       std::uint64_t seed, const GrowOptions& opts = {});

//! One record of the frozen frontier.
struct FrozenFragment {
    double true_size = 0.0;
    double noisy_size = 0.0;
    double parent_size = 0.0;  //!< parent's true size
    double parent_noisy = 0.0; //!< parent's noisy size (= parent_size when sigma = 0)
    double birth_time = 0.0;
    double lifetime = 0.0;
    std::int32_t node = -1; //!< index into the originating tree
    bool truncated = false; //!< noisy size below t_eps = gamma0 * eps (sigma > 0 only)
};

//! The observable set of fragments frozen below the screening threshold.
struct ObservationSet {
    double epsilon = 0.0;
    double sigma = 0.0;
    double gamma0 = 0.5;
    std::uint64_t seed = 0;
    std::uint64_t noise_seed = 0;
    double mass_defect = 0.0;
    std::string law_key;
    std::vector<FrozenFragment> fragments;

    double truncation_threshold() const { return gamma0 * epsilon; }
};

//! Exact (sigma = 0) frontier at eps >= tree threshold.
ObservationSet observe(const FragmentTree& tree, double epsilon);

//! Noise-corrupted frontier: i.i.d. uniform[-1,1] noise scaled by sigma is
//! attached to every node, the frontier is recomputed on noisy sizes, and
//! records below gamma0*eps are flagged truncated. Requires sigma < eps/2 and
//! a tree grown at least down to eps - sigma.
ObservationSet observe_noisy(const FragmentTree& tree, double epsilon, double sigma,
                             double gamma0, std::uint64_t noise_seed);

//! Convenience: grow to the needed depth and observe in one call.
ObservationSet simulate_observation(const DislocationLaw& law, double epsilon,
                                    double alpha, std::uint64_t seed, double sigma = 0.0,
                                    double gamma0 = 0.5, std::uint64_t noise_seed = 0,
                                    const GrowOptions& opts = {});

//! JSON-lines dump: header object first, then one object per frozen fragment.
void write_jsonl(const ObservationSet& obs, const FragmentTree& tree, std::ostream& out);

} // namespace fragchain
