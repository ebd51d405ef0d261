#ifndef HAWKRANK_DISCOVERY_HPP
#define HAWKRANK_DISCOVERY_HPP

#include "hawkrank/graph.hpp"
#include "hawkrank/rank.hpp"

#include <map>
#include <string>
#include <vector>

namespace hawkrank {

struct DiscoveryConfig {
    double tau = 0.10;
    RankRule rank_rule = RankRule::Threshold;
    int max_subset_size = 0;  // 0: no cap beyond the candidate pool size
    int max_iterations = 50;
    bool annotate_intermediates = false;
    bool empty_candidate = false;  // also test the empty parent set first
    LatentRule latent_rule = LatentRule::Exact;

    RankCriterion criterion() const { return {tau, rank_rule}; }
};

struct DiscoveryState {
    std::vector<int> active;  // observed ascending, then latents by creation
    SummaryGraph graph;
    SurrogateRegistry registry;
    std::map<int, std::vector<int>> parent_sets;
    std::vector<std::string> log;
    int iteration = 0;

    explicit DiscoveryState(int n_observed);
};

struct DiscoveryResult {
    SummaryGraph graph;
    std::vector<int> unresolved;
    std::map<std::pair<int, int>, int> intermediate_counts;  // (src, dst) -> h
    std::vector<std::string> log;
    std::map<int, std::vector<int>> parent_sets;

    bool resolved() const { return unresolved.empty(); }
};

bool phase_one(DiscoveryState& state, const WindowCovariance& src, const DiscoveryConfig& cfg);
bool phase_two(DiscoveryState& state, const WindowCovariance& src, const DiscoveryConfig& cfg);

void register_surrogate(DiscoveryState& state, int latent, const std::vector<int>& effects);

// Observed nodes are ids 0..n_observed-1 of the covariance source.
DiscoveryResult run_discovery(const WindowCovariance& src, int n_observed, const DiscoveryConfig& cfg);

void annotate_intermediates(DiscoveryResult& result, const WindowCovariance& src, const DiscoveryConfig& cfg);

}  // namespace hawkrank

#endif
