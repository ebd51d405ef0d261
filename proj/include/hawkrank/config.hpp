#ifndef HAWKRANK_CONFIG_HPP
#define HAWKRANK_CONFIG_HPP

#include "hawkrank/discovery.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hawkrank {

enum class DataMode { Hawkes, Inar, Gaussian };

// Flat key=value run configuration. Every key has a default; see keys().
struct RunConfig {
    int case_id = 1;
    std::string graph;  // edge-list file overriding case_id when set
    long bins = 80000;
    double horizon = 0.0;  // events horizon for binning; 0: last event rounded up
    double delta = 0.1;
    double beta = 1.0;
    double alpha_lo = -1.0;  // negative: case default
    double alpha_hi = -1.0;
    double mu = 0.1;
    double warmup = 100.0;  // simulated time discarded before the first bin
    int m = 0;              // 0: noise-limited automatic window
    int m_cap = 600;
    int k_max = 0;  // 0: tail-based default
    double tau = 0.10;
    RankRule rank_rule = RankRule::Threshold;
    double sigma = 1.0;
    DataMode mode = DataMode::Hawkes;
    std::vector<int> seeds{0};
    std::uint64_t master_seed = 20240601;
    std::string out = ".";
    bool faithfulness_violation = false;

    int max_subset_size = 0;
    int max_iterations = 50;
    bool annotate_intermediates = false;
    bool empty_candidate = true;
    LatentRule latent_rule = LatentRule::Exact;

    double oracle_delta = 1.0;
    int oracle_k = 2;
    int oracle_m = 10;

    std::vector<int> sweep_case;
    std::vector<double> sweep_delta;
    std::vector<double> sweep_tau;
    std::vector<long> sweep_bins;

    int device = -1;  // -1: all devices merged
    std::vector<int> alarms;
    std::vector<int> exclude;

    DiscoveryConfig discovery() const;

    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static const std::vector<std::string>& keys();
    static std::string help(const std::string& key);
};

// Lines are `key = value`; `#` starts a comment; `include = path` pulls in
// another file relative to the including one. Later lines win.
void apply_config(RunConfig& cfg, std::istream& is, const std::string& origin = "<stream>",
                  const std::string& base_dir = ".", int depth = 0);
RunConfig load_config(const std::string& path);

// Every key in keys() order, one `key=value` per line.
void write_config(std::ostream& os, const RunConfig& cfg);

}  // namespace hawkrank

#endif
