#ifndef HAWKRANK_RANK_HPP
#define HAWKRANK_RANK_HPP

#include "hawkrank/binning.hpp"
#include "hawkrank/graph.hpp"
#include "hawkrank/linalg.hpp"
#include "hawkrank/synthesis.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace hawkrank {

// Second moments of the linear representation over every node.
struct PopulationModel {
    ThetaCoeffs theta;
    Eigen::VectorXd noise_var;
    std::vector<Eigen::MatrixXd> autocov;  // autocov[h] = Cov(X^n, X^{n-h}), h = 0..m
    int m = 0;

    int dims() const { return theta.dims(); }
    // Cov(X_i^{n-a}, X_j^{n-b})
    double cov(int i, int a, int j, int b) const
    {
        return b >= a ? autocov[b - a](i, j) : autocov[a - b](j, i);
    }
};

// Poisson noise has variance equal to the stationary mean; Gaussian uses sigma^2.
PopulationModel population_model(const ThetaCoeffs& th, const Eigen::VectorXd& noise_var, int m);
PopulationModel population_model(const SummaryGraph& g, double delta, int k_max, int m,
                                 NoiseModel noise = NoiseModel::PoissonINAR, double sigma = 1.0);

Eigen::VectorXd inar_noise_variance(const ThetaCoeffs& th);

// Covariance over the window universe {(node, lag) : node in nodes, lag 0..m}.
// Built once from a panel or a population model and read-only afterwards.
class WindowCovariance {
public:
    static WindowCovariance from_population(const PopulationModel& model, const std::vector<int>& nodes);
    static WindowCovariance from_panel(const BinnedPanel& panel, int m);

    int m() const { return m_; }
    const std::vector<int>& nodes() const { return nodes_; }
    bool population() const { return n_samples_ == 0; }
    long n_samples() const { return n_samples_; }
    int universe_size() const { return static_cast<int>(sigma_.rows()); }
    bool covers(const Var& v) const;
    int index(const Var& v) const;

    Eigen::MatrixXd block(const VarSet& a, const VarSet& b) const;
    const Eigen::MatrixXd& matrix() const { return sigma_; }
    // inverse of the universe covariance (ridged when needed), computed on first use
    const Eigen::MatrixXd& precision() const;

    // every variable of the given nodes at lags lo..hi
    VarSet vars(const std::vector<int>& nodes, int lo, int hi) const;
    VarSet all_vars() const { return vars(nodes_, 0, m_); }

private:
    std::vector<int> nodes_;
    std::map<int, int> pos_;
    int m_ = 0;
    long n_samples_ = 0;
    Eigen::MatrixXd sigma_;
    mutable std::shared_ptr<Eigen::MatrixXd> precision_;
};

Eigen::MatrixXd sample_cross_cov(const BinnedPanel& p, const VarSet& a, const VarSet& b, int m);
Eigen::MatrixXd population_cross_cov(const PopulationModel& model, const VarSet& a, const VarSet& b);

constexpr double kPopulationTol = 1e-7;

// Threshold counts rho >= tau. Bartlett reads tau as a significance level and
// picks the smallest rank whose chi-square statistic is not rejected.
enum class RankRule { Threshold, Bartlett };

struct RankCriterion {
    double tau = 0.1;
    RankRule rule = RankRule::Threshold;

    RankCriterion(double t = 0.1, RankRule r = RankRule::Threshold) : tau(t), rule(r) {}
};

struct RankTestResult {
    int estimated_rank = 0;
    Eigen::VectorXd rho;  // descending
    double tau = 0.1;
    long n_samples = 0;
    bool at_most = false;  // estimated_rank <= r
    bool exact = false;    // rho_r >= tau and rho_{r+1} < tau
    int hypothesis = 0;
};

// Canonical correlations of blocks A and B. Variables shared by both blocks
// contribute exact ones; the remainder comes from the partial problem given
// the shared set.
Eigen::VectorXd canonical_correlations(const WindowCovariance& src, const VarSet& a, const VarSet& b);

RankTestResult rank_test(const WindowCovariance& src, const VarSet& a, const VarSet& b, int r, RankCriterion crit);

// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double df);

// De(L) and Sib(De(L)) bookkeeping. Observed nodes are their own surrogate.
class SurrogateRegistry {
public:
    explicit SurrogateRegistry(int n_observed = 0) : n_observed_(n_observed) {}

    int n_observed() const { return n_observed_; }
    bool is_observed(int node) const { return node < n_observed_; }
    void set(int latent, int surrogate, const std::set<int>& siblings);
    bool has(int node) const { return is_observed(node) || surrogate_.count(node) > 0; }
    int surrogate(int node) const;
    std::set<int> siblings_of(int node) const;  // siblings of De(node)
    // all observed effects: surrogate plus siblings
    std::set<int> effects(int node) const;

private:
    int n_observed_;
    std::map<int, int> surrogate_;
    std::map<int, std::set<int>> siblings_;
};

struct IdentTest {
    VarSet a;
    VarSet b;
    int r = 0;
    RankTestResult result;
    bool pass = false;
};

// Observed target with an all-observed candidate set.
IdentTest test_parent_cause_observed(const WindowCovariance& src, const std::vector<int>& candidate, int target,
                                     const std::vector<int>& observed, RankCriterion crit);

// Pair (N1, N2) sharing a latent confounder.
IdentTest test_latent_confounder_pair(const WindowCovariance& src, int n1, int n2, const SurrogateRegistry& reg,
                                      const std::vector<int>& observed, RankCriterion crit);

// Exact: rank |A|-1 exactly. TargetRow: the target's current row is spanned by
// the other currents, which also holds when nothing outside A sees the latent.
enum class LatentRule { Exact, TargetRow };

// Candidate set or target involving latent nodes.
IdentTest test_parent_cause_latent(const WindowCovariance& src, const std::vector<int>& candidate, int target,
                                   const SurrogateRegistry& reg, const std::vector<int>& observed, RankCriterion crit,
                                   LatentRule rule = LatentRule::Exact);

// Largest h such that dropping lags 1..h of `parent` from the conditioning
// set keeps the rank identity of the observed parent test.
int count_intermediate_latents(const WindowCovariance& src, int target, int parent,
                               const std::vector<int>& parent_set, const std::vector<int>& observed, RankCriterion crit);

std::string describe(const VarSet& v);

}  // namespace hawkrank

#endif
