#ifndef HAWKRANK_SYNTHESIS_HPP
#define HAWKRANK_SYNTHESIS_HPP

#include "hawkrank/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace hawkrank {

// splitmix64 step; used to derive independent child seeds from a master seed
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

struct EventData {
    std::vector<std::vector<double>> times;  // per subprocess, sorted
    double horizon = 0.0;

    int dims() const { return static_cast<int>(times.size()); }
    std::size_t total() const;
};

void write_events(std::ostream& os, const EventData& e);
EventData read_events(std::istream& is, int dims = -1, double horizon = -1.0);

// Ogata thinning. Per-source excitation state decays by exp(-beta dt).
EventData simulate_hawkes(const SummaryGraph& g, double horizon, std::uint64_t seed);

// theta[k-1](i, j): mass of phi_ij over ((k-1)delta, k delta], k = 1..k_max
struct ThetaCoeffs {
    std::vector<Eigen::MatrixXd> theta;
    Eigen::VectorXd theta0;

    int k_max() const { return static_cast<int>(theta.size()); }
    int dims() const { return static_cast<int>(theta0.size()); }
    Eigen::MatrixXd total() const;
};

ThetaCoeffs theta_coeffs(const SummaryGraph& g, double delta, int k_max);

// Smallest k_max whose dropped tail is below rel_tail of the integrated influence.
int default_k_max(const SummaryGraph& g, double delta, double rel_tail = 1e-6);

enum class NoiseModel { PoissonINAR, Gaussian };

struct DiscretePanel {
    Eigen::MatrixXd values;  // T x l
    double delta = 0.1;
    NoiseModel noise = NoiseModel::PoissonINAR;
    double sigma = 0.0;
};

int burn_in_bins(int k_max);

DiscretePanel generate_inar(const SummaryGraph& g, double delta, int T, int k_max, std::uint64_t seed);
DiscretePanel generate_inar(const ThetaCoeffs& th, double delta, int T, std::uint64_t seed);

DiscretePanel generate_linear_gaussian(const SummaryGraph& g, double delta, int T, int k_max, double sigma,
                                       std::uint64_t seed);
DiscretePanel generate_linear_gaussian(const ThetaCoeffs& th, double delta, int T, double sigma,
                                       std::uint64_t seed);

void write_panel(std::ostream& os, const Eigen::MatrixXd& values, const std::vector<std::string>& header);

struct CaseSpec {
    int case_id = 1;
    double alpha_lo = 0.4;
    double alpha_hi = 0.8;
    double beta = 1.0;
    double mu = 0.1;
    std::vector<int> hidden;  // latent node ids
};

CaseSpec default_case_spec(int case_id);

// Topology of a benchmark case with every edge constant set to 1.
SummaryGraph case_topology(int case_id);

// Benchmark graph with constants drawn uniformly from the case range and
// stationarity enforced by resampling.
SummaryGraph paper_case(int case_id, std::uint64_t seed, CaseSpec* spec_out = nullptr);
SummaryGraph paper_case(const CaseSpec& spec, std::uint64_t seed);

// Auxiliary structures used by tests and the CLI.
enum class NamedGraph {
    IntermediatePair,         // L1 -> L2 -> O1, L1 -> L3 -> O2
    IntermediatePairMinusL3,  // L1 -> L2 -> O1, L1 -> O2
    RelayChain,               // O2 -> L1 -> O1
};
SummaryGraph named_topology(NamedGraph which);

// Chain O2 -> L1 -> ... -> Lh -> O1 plus self-loop on O2.
SummaryGraph relay_chain(int h);

// Draw every edge constant of `topology` uniformly in [lo, hi], resampling
// until stationary.
SummaryGraph sample_constants(const SummaryGraph& topology, double lo, double hi, std::uint64_t seed,
                              int max_attempts = 100);

SummaryGraph apply_faithfulness_violation(const SummaryGraph& g, std::uint64_t seed);

}  // namespace hawkrank

#endif
