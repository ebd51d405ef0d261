#ifndef HAWKRANK_BINNING_HPP
#define HAWKRANK_BINNING_HPP

#include "hawkrank/graph.hpp"
#include "hawkrank/synthesis.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace hawkrank {

struct BinnedPanel {
    Eigen::MatrixXd counts;  // T x p
    double delta = 0.1;
    bool standardized = false;
    Eigen::VectorXd means;
    Eigen::VectorXd sds;
    std::vector<int> ids;  // subprocess id of each column

    int rows() const { return static_cast<int>(counts.rows()); }
    int cols() const { return static_cast<int>(counts.cols()); }
};

// counts(n, i) = #{t in ((n-1) delta, n delta]}, n = 1..floor(horizon / delta).
// `keep` selects which subprocesses become columns (all when empty).
BinnedPanel bin_events(const EventData& e, double delta, const std::vector<int>& keep = {});

BinnedPanel panel_from_matrix(const Eigen::MatrixXd& values, double delta, const std::vector<int>& ids = {});

BinnedPanel standardize(const BinnedPanel& p);

struct LagEstimate {
    int k_eff = 1;
    Eigen::VectorXd max_abs_corr;  // entry k-1 for lag k
    double threshold = 0.0;
};

LagEstimate estimate_effective_lags(const BinnedPanel& p, int k_cap, double alpha_sig = 0.01);

// Largest window m <= cap whose null canonical correlation floor
// sqrt(p (m + 1) / n) stays at or below tau / 2; at least 1.
int noise_limited_lags(long n, int p, double tau, int cap);

// Rows r in (m, T]; column c holds counts(r - lag_c, col of node_c).
// Var::node refers to the column position in the panel.
Eigen::MatrixXd lag_matrix(const BinnedPanel& p, const VarSet& spec, int m);

void write_binned(const std::string& csv_path, const std::string& meta_path, const BinnedPanel& p);
BinnedPanel read_binned(const std::string& csv_path, const std::string& meta_path = "");

}  // namespace hawkrank

#endif
