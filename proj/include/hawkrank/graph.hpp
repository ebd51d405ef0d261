#ifndef HAWKRANK_GRAPH_HPP
#define HAWKRANK_GRAPH_HPP

#include <Eigen/Dense>

#include <cmath>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hawkrank {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class NodeKind { Observed, Latent };

struct Node {
    int index = 0;
    NodeKind kind = NodeKind::Observed;
    double mu = 0.1;
};

// w(s) = exp(-beta s). Every edge shares the same decay shape.
struct Decay {
    double beta = 1.0;

    double integral() const;
    double weight(double s) const { return std::exp(-beta * s); }
    // integral of w over [t0, t1]
    double mass(double t0, double t1) const;
};

// Summary graph over subprocesses. Observed nodes occupy 0..p-1 and
// latent nodes p..p+q-1. An edge (src, dst) with constant a means src
// excites dst.
class SummaryGraph {
public:
    using EdgeKey = std::pair<int, int>;

    SummaryGraph() = default;
    SummaryGraph(int n_observed, int n_latent, double beta = 1.0, double mu = 0.1);

    int size() const { return static_cast<int>(nodes_.size()); }
    int num_observed() const { return n_observed_; }
    int num_latent() const { return size() - n_observed_; }

    int add_observed(double mu = 0.1);
    int add_latent(double mu = 0.1);

    const Node& node(int i) const { return nodes_.at(i); }
    NodeKind kind(int i) const { return nodes_.at(i).kind; }
    bool is_latent(int i) const { return kind(i) == NodeKind::Latent; }
    double mu(int i) const { return nodes_.at(i).mu; }
    void set_mu(int i, double mu);

    void add_edge(int src, int dst, double a);
    void remove_edge(int src, int dst);
    bool has_edge(int src, int dst) const { return edges_.count({src, dst}) > 0; }
    double excite(int src, int dst) const;
    void set_excite(int src, int dst, double a);
    const std::map<EdgeKey, double>& edges() const { return edges_; }

    std::vector<int> parents(int dst) const;
    std::vector<int> children(int src) const;

    const Decay& decay() const { return decay_; }
    void set_decay(Decay d) { decay_ = d; }

    // O1..Op for observed, L1..Lq for latent
    std::string name(int i) const;

    bool operator==(const SummaryGraph& o) const;

private:
    void check_node(int i) const;

    std::vector<Node> nodes_;
    int n_observed_ = 0;
    std::map<EdgeKey, double> edges_;
    Decay decay_;
};

// Phi(dst, src) = a * int_0^inf w(s) ds
Eigen::MatrixXd integrated_influence(const SummaryGraph& g);

double spectral_radius(const Eigen::MatrixXd& m);

bool assert_stationary(const SummaryGraph& g, double eps_stat = 1e-9);

// Plain-text edge list:
//   decay exp beta=<v>
//   node <id> <observed|latent> mu=<v>
//   <src> <dst> <a>
void write_graph(std::ostream& os, const SummaryGraph& g);
SummaryGraph read_graph(std::istream& is);
void save_graph(const std::string& path, const SummaryGraph& g);
SummaryGraph load_graph(const std::string& path);

// A window variable: subprocess `node` at offset `lag` before the current bin.
struct Var {
    int node = 0;
    int lag = 0;

    friend bool operator==(const Var& a, const Var& b) { return a.node == b.node && a.lag == b.lag; }
    friend bool operator<(const Var& a, const Var& b)
    {
        return a.node != b.node ? a.node < b.node : a.lag < b.lag;
    }
};

using VarSet = std::vector<Var>;

// DAG over (node, lag) for lag 0..m. Edge (j,k') -> (i,k) iff j -> i in the
// summary graph and 1 <= k' - k <= k_eff.
class WindowGraph {
public:
    WindowGraph(int n_nodes, int m);

    int n_nodes() const { return n_nodes_; }
    int m() const { return m_; }
    int num_vars() const { return n_nodes_ * (m_ + 1); }
    int index(const Var& v) const { return v.node * (m_ + 1) + v.lag; }
    Var var(int idx) const { return {idx / (m_ + 1), idx % (m_ + 1)}; }

    void add_edge(const Var& from, const Var& to);
    bool has_edge(const Var& from, const Var& to) const;
    const std::vector<int>& parents(int idx) const { return parents_[idx]; }
    const std::vector<int>& children(int idx) const { return children_[idx]; }
    int num_edges() const;

    std::vector<int> topological_order() const;

private:
    int n_nodes_;
    int m_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
};

WindowGraph expand_window(const SummaryGraph& g, int m, int k_eff);

// Reachability (Bayes-ball) d-separation. Sets must be pairwise disjoint.
bool d_separated(const WindowGraph& w, const VarSet& a, const VarSet& b, const VarSet& c);

struct PathSituationReport {
    bool holds = false;
    int path_length = -1;  // number of latent intermediates, -1 when absent
    std::vector<std::string> violations;
};

PathSituationReport check_path_situation(const SummaryGraph& g, int latent,
                                         const std::vector<int>& effects,
                                         std::size_t path_cap = 10000);

}  // namespace hawkrank

#endif
