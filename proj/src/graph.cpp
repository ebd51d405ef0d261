#include "hawkrank/graph.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace hawkrank {

double Decay::integral() const
{
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ConfigError("decay rate beta must be positive and finite");
    return 1.0 / beta;
}

double Decay::mass(double t0, double t1) const
{
    return (std::exp(-beta * t0) - std::exp(-beta * t1)) / beta;
}

SummaryGraph::SummaryGraph(int n_observed, int n_latent, double beta, double mu)
{
    decay_.beta = beta;
    for (int i = 0; i < n_observed; ++i)
        add_observed(mu);
    for (int i = 0; i < n_latent; ++i)
        add_latent(mu);
}

int SummaryGraph::add_observed(double mu)
{
    if (num_latent() > 0)
        throw ConfigError("observed nodes must precede latent nodes");
    nodes_.push_back({size(), NodeKind::Observed, mu});
    ++n_observed_;
    return size() - 1;
}

int SummaryGraph::add_latent(double mu)
{
    nodes_.push_back({size(), NodeKind::Latent, mu});
    return size() - 1;
}

void SummaryGraph::check_node(int i) const
{
    if (i < 0 || i >= size())
        throw ConfigError("node index " + std::to_string(i) + " out of range");
}

void SummaryGraph::set_mu(int i, double mu)
{
    check_node(i);
    if (!(mu >= 0.0))
        throw ConfigError("background intensity must be non-negative");
    nodes_[i].mu = mu;
}

void SummaryGraph::add_edge(int src, int dst, double a)
{
    check_node(src);
    check_node(dst);
    if (!(a > 0.0) || !std::isfinite(a))
        throw ConfigError("edge " + name(src) + "->" + name(dst) + " needs a positive constant");
    edges_[{src, dst}] = a;
}

void SummaryGraph::remove_edge(int src, int dst) { edges_.erase({src, dst}); }

double SummaryGraph::excite(int src, int dst) const
{
    auto it = edges_.find({src, dst});
    return it == edges_.end() ? 0.0 : it->second;
}

void SummaryGraph::set_excite(int src, int dst, double a)
{
    if (!has_edge(src, dst))
        throw ConfigError("no edge " + name(src) + "->" + name(dst));
    add_edge(src, dst, a);
}

std::vector<int> SummaryGraph::parents(int dst) const
{
    std::vector<int> out;
    for (const auto& [key, a] : edges_)
        if (key.second == dst)
            out.push_back(key.first);
    return out;
}

std::vector<int> SummaryGraph::children(int src) const
{
    std::vector<int> out;
    for (const auto& [key, a] : edges_)
        if (key.first == src)
            out.push_back(key.second);
    return out;
}

std::string SummaryGraph::name(int i) const
{
    if (i < n_observed_)
        return "O" + std::to_string(i + 1);
    return "L" + std::to_string(i - n_observed_ + 1);
}

bool SummaryGraph::operator==(const SummaryGraph& o) const
{
    if (size() != o.size() || n_observed_ != o.n_observed_ || decay_.beta != o.decay_.beta)
        return false;
    for (int i = 0; i < size(); ++i)
        if (nodes_[i].mu != o.nodes_[i].mu)
            return false;
    return edges_ == o.edges_;
}

Eigen::MatrixXd integrated_influence(const SummaryGraph& g)
{
    const double tail = g.decay().integral();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(g.size(), g.size());
    for (const auto& [key, a] : g.edges())
        phi(key.second, key.first) = a * tail;
    return phi;
}

double spectral_radius(const Eigen::MatrixXd& m)
{
    if (m.size() == 0)
        return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool assert_stationary(const SummaryGraph& g, double eps_stat)
{
    return spectral_radius(integrated_influence(g)) < 1.0 - eps_stat;
}

void write_graph(std::ostream& os, const SummaryGraph& g)
{
    os << std::setprecision(17);
    os << "decay exp beta=" << g.decay().beta << "\n";
    for (int i = 0; i < g.size(); ++i)
        os << "node " << i << (g.is_latent(i) ? " latent" : " observed") << " mu=" << g.mu(i) << "\n";
    for (const auto& [key, a] : g.edges())
        os << key.first << " " << key.second << " " << a << "\n";
}

namespace {

double parse_keyed(const std::string& tok, const std::string& key, int line)
{
    if (tok.rfind(key + "=", 0) != 0)
        throw InputError("line " + std::to_string(line) + ": expected " + key + "=<value>");
    try {
        return std::stod(tok.substr(key.size() + 1));
    } catch (const std::exception&) {
        throw InputError("line " + std::to_string(line) + ": bad number in '" + tok + "'");
    }
}

}  // namespace

SummaryGraph read_graph(std::istream& is)
{
    SummaryGraph g;
    std::string raw;
    int line = 0;
    std::vector<std::tuple<int, int, double, int>> pending;
    while (std::getline(is, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos)
            raw.erase(hash);
        std::istringstream ss(raw);
        std::string head;
        if (!(ss >> head))
            continue;
        if (head == "decay") {
            std::string form, tok;
            ss >> form >> tok;
            if (form != "exp")
                throw InputError("line " + std::to_string(line) + ": only exponential decay is supported");
            g.set_decay({parse_keyed(tok, "beta", line)});
        } else if (head == "node") {
            int id = -1;
            std::string kind, tok;
            if (!(ss >> id >> kind >> tok))
                throw InputError("line " + std::to_string(line) + ": malformed node line");
            if (id != g.size())
                throw InputError("line " + std::to_string(line) + ": node ids must be listed in order");
            double mu = parse_keyed(tok, "mu", line);
            try {
                if (kind == "observed")
                    g.add_observed(mu);
                else if (kind == "latent")
                    g.add_latent(mu);
                else
                    throw InputError("line " + std::to_string(line) + ": unknown node kind '" + kind + "'");
            } catch (const ConfigError& e) {
                throw InputError("line " + std::to_string(line) + ": " + e.what());
            }
        } else {
            int src = 0, dst = 0;
            double a = 0.0;
            std::istringstream es(raw);
            if (!(es >> src >> dst >> a))
                throw InputError("line " + std::to_string(line) + ": malformed edge line");
            pending.emplace_back(src, dst, a, line);
        }
    }
    for (const auto& [src, dst, a, ln] : pending) {
        try {
            g.add_edge(src, dst, a);
        } catch (const ConfigError& e) {
            throw InputError("line " + std::to_string(ln) + ": " + e.what());
        }
    }
    return g;
}

void save_graph(const std::string& path, const SummaryGraph& g)
{
    std::ofstream os(path);
    if (!os)
        throw InputError("cannot write " + path);
    write_graph(os, g);
}

SummaryGraph load_graph(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw InputError("cannot read " + path);
    return read_graph(is);
}

WindowGraph::WindowGraph(int n_nodes, int m)
    : n_nodes_(n_nodes), m_(m), parents_(n_nodes * (m + 1)), children_(n_nodes * (m + 1))
{
}

void WindowGraph::add_edge(const Var& from, const Var& to)
{
    if (from.lag <= to.lag)
        throw ConfigError("window edges must point from larger to smaller lag");
    int f = index(from), t = index(to);
    parents_[t].push_back(f);
    children_[f].push_back(t);
}

bool WindowGraph::has_edge(const Var& from, const Var& to) const
{
    const auto& ps = parents_[index(to)];
    return std::find(ps.begin(), ps.end(), index(from)) != ps.end();
}

int WindowGraph::num_edges() const
{
    int n = 0;
    for (const auto& ps : parents_)
        n += static_cast<int>(ps.size());
    return n;
}

std::vector<int> WindowGraph::topological_order() const
{
    std::vector<int> indeg(num_vars());
    for (int v = 0; v < num_vars(); ++v)
        indeg[v] = static_cast<int>(parents_[v].size());
    std::vector<int> order, stack;
    for (int v = 0; v < num_vars(); ++v)
        if (indeg[v] == 0)
            stack.push_back(v);
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (int c : children_[v])
            if (--indeg[c] == 0)
                stack.push_back(c);
    }
    if (static_cast<int>(order.size()) != num_vars())
        throw NumericalError("window graph has a cycle");
    return order;
}

WindowGraph expand_window(const SummaryGraph& g, int m, int k_eff)
{
    if (k_eff < 1 || m < k_eff)
        throw ConfigError("expand_window needs m >= k_eff >= 1");
    WindowGraph w(g.size(), m);
    for (const auto& [key, a] : g.edges()) {
        auto [src, dst] = key;
        for (int k = 0; k <= m; ++k)
            for (int kp = k + 1; kp <= std::min(m, k + k_eff); ++kp)
                w.add_edge({src, kp}, {dst, k});
    }
    return w;
}

bool d_separated(const WindowGraph& w, const VarSet& a, const VarSet& b, const VarSet& c)
{
    const int n = w.num_vars();
    std::vector<char> in_a(n, 0), in_b(n, 0), in_c(n, 0);
    for (const auto& v : a)
        in_a[w.index(v)] = 1;
    for (const auto& v : b) {
        if (in_a[w.index(v)])
            throw ConfigError("d_separated: sets overlap");
        in_b[w.index(v)] = 1;
    }
    for (const auto& v : c) {
        if (in_a[w.index(v)] || in_b[w.index(v)])
            throw ConfigError("d_separated: sets overlap");
        in_c[w.index(v)] = 1;
    }

    // ancestors of C (including C) decide whether a collider is open
    std::vector<char> anc_c(in_c);
    std::vector<int> stack;
    for (int v = 0; v < n; ++v)
        if (in_c[v])
            stack.push_back(v);
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int p : w.parents(v))
            if (!anc_c[p]) {
                anc_c[p] = 1;
                stack.push_back(p);
            }
    }

    // states: (node, arrived from child = 0 / from parent = 1)
    std::vector<char> seen(2 * n, 0);
    std::vector<std::pair<int, int>> queue;
    for (int v = 0; v < n; ++v)
        if (in_a[v]) {
            queue.push_back({v, 0});
        }
    while (!queue.empty()) {
        auto [v, dir] = queue.back();
        queue.pop_back();
        if (seen[2 * v + dir])
            continue;
        seen[2 * v + dir] = 1;
        if (in_b[v])
            return false;
        if (dir == 0) {
            // came up from a child (or start): pass to parents and children if not blocked
            if (!in_c[v]) {
                for (int p : w.parents(v))
                    queue.push_back({p, 0});
                for (int ch : w.children(v))
                    queue.push_back({ch, 1});
            }
        } else {
            // came down from a parent
            if (!in_c[v])
                for (int ch : w.children(v))
                    queue.push_back({ch, 1});
            if (anc_c[v])
                for (int p : w.parents(v))
                    queue.push_back({p, 0});
        }
    }
    return true;
}

namespace {

// All latent nodes lying on some directed cycle that stays inside the latent set.
std::set<int> latent_cycle_members(const SummaryGraph& g)
{
    std::set<int> out;
    for (int s = g.num_observed(); s < g.size(); ++s) {
        std::vector<char> seen(g.size(), 0);
        std::vector<int> stack;
        for (int c : g.children(s))
            if (g.is_latent(c) && c != s)
                stack.push_back(c);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (v == s) {
                out.insert(s);
                break;
            }
            if (seen[v])
                continue;
            seen[v] = 1;
            for (int c : g.children(v))
                if (g.is_latent(c))
                    stack.push_back(c);
        }
    }
    return out;
}

}  // namespace

PathSituationReport check_path_situation(const SummaryGraph& g, int latent,
                                         const std::vector<int>& effects, std::size_t path_cap)
{
    if (latent < 0 || latent >= g.size() || !g.is_latent(latent))
        throw ConfigError("check_path_situation: source must be a latent node");
    if (effects.size() < 2)
        throw ConfigError("check_path_situation: need at least two effects");
    for (int e : effects)
        if (e < 0 || e >= g.size() || g.is_latent(e))
            throw ConfigError("check_path_situation: effects must be observed nodes");

    PathSituationReport rep;
    const std::set<int> cyclic = latent_cycle_members(g);
    std::set<int> lengths;
    std::size_t n_paths = 0;

    for (int target : effects) {
        std::size_t found = 0;
        std::vector<int> path{latent};
        std::vector<char> on_path(g.size(), 0);
        on_path[latent] = 1;
        std::function<void(int)> walk = [&](int v) {
            for (int c : g.children(v)) {
                if (c == target) {
                    ++found;
                    if (++n_paths > path_cap)
                        throw NumericalError("path enumeration exceeded cap of " + std::to_string(path_cap));
                    int len = static_cast<int>(path.size()) - 1;
                    lengths.insert(len);
                    for (std::size_t k = 1; k < path.size(); ++k) {
                        int mid = path[k];
                        if (g.has_edge(mid, mid))
                            rep.violations.push_back("intermediate " + g.name(mid) + " has a self-loop");
                        if (cyclic.count(mid))
                            rep.violations.push_back("intermediate " + g.name(mid) + " lies on a latent cycle");
                    }
                } else if (g.is_latent(c) && !on_path[c]) {
                    on_path[c] = 1;
                    path.push_back(c);
                    walk(c);
                    path.pop_back();
                    on_path[c] = 0;
                }
            }
        };
        walk(latent);
        if (found == 0)
            rep.violations.push_back("no latent-only path from " + g.name(latent) + " to " + g.name(target));
    }
    if (lengths.size() > 1) {
        std::ostringstream os;
        os << "unequal path lengths:";
        for (int l : lengths)
            os << " " << l;
        rep.violations.push_back(os.str());
    }
    std::sort(rep.violations.begin(), rep.violations.end());
    rep.violations.erase(std::unique(rep.violations.begin(), rep.violations.end()), rep.violations.end());
    rep.holds = rep.violations.empty();
    if (rep.holds)
        rep.path_length = *lengths.begin();
    return rep;
}

}  // namespace hawkrank
