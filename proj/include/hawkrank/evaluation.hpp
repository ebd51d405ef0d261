#ifndef HAWKRANK_EVALUATION_HPP
#define HAWKRANK_EVALUATION_HPP

#include "hawkrank/graph.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hawkrank {

// adj(i, j) = 1 for an edge j -> i. Observed nodes first.
struct AdjacencyMatrix {
    Eigen::MatrixXi adj;
    int n_observed = 0;

    int size() const { return static_cast<int>(adj.rows()); }
    int n_latent() const { return size() - n_observed; }
    int edges() const { return adj.sum(); }
};

AdjacencyMatrix adjacency(const SummaryGraph& g);

// Contract single-child latent relays into direct edges and drop edges among
// the observed effects a latent confounder fully explains.
AdjacencyMatrix simplify_ground_truth(const SummaryGraph& g);
SummaryGraph simplify_graph(const SummaryGraph& g);

struct ScoreReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<int> best_permutation;  // pred latent k matched to truth latent perm[k]
    int padding_added = 0;
    bool greedy = false;
};

constexpr int kMaxExhaustiveLatents = 8;

ScoreReport score(const AdjacencyMatrix& pred, const AdjacencyMatrix& truth);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
};

struct BatchSummary {
    MetricSummary precision, recall, f1;
    int runs = 0;
};

BatchSummary batch_score(const std::vector<ScoreReport>& runs);

std::string format_report(const ScoreReport& r);

}  // namespace hawkrank

#endif
