#include "hawkrank/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace hawkrank {

AdjacencyMatrix adjacency(const SummaryGraph& g)
{
    AdjacencyMatrix out;
    out.n_observed = g.num_observed();
    out.adj = Eigen::MatrixXi::Zero(g.size(), g.size());
    for (const auto& [key, a] : g.edges())
        out.adj(key.second, key.first) = 1;
    return out;
}

namespace {

SummaryGraph drop_node(const SummaryGraph& g, int victim)
{
    SummaryGraph out;
    out.set_decay(g.decay());
    std::vector<int> remap(g.size(), -1);
    for (int i = 0; i < g.size(); ++i) {
        if (i == victim)
            continue;
        remap[i] = g.is_latent(i) ? out.add_latent(g.mu(i)) : out.add_observed(g.mu(i));
    }
    for (const auto& [key, a] : g.edges())
        if (key.first != victim && key.second != victim)
            out.add_edge(remap[key.first], remap[key.second], a);
    return out;
}

}  // namespace

SummaryGraph simplify_graph(const SummaryGraph& g_in)
{
    SummaryGraph g = g_in;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r = g.num_observed(); r < g.size(); ++r) {
            std::vector<int> kids;
            for (int c : g.children(r))
                if (c != r)
                    kids.push_back(c);
            if (kids.size() > 1)
                continue;
            // a relay passes its parents straight through to its only child
            if (kids.size() == 1) {
                const int child = kids[0];
                for (int par : g.parents(r))
                    if (par != r && !g.has_edge(par, child))
                        g.add_edge(par, child, g.excite(par, r) * g.excite(r, child));
            }
            g = drop_node(g, r);
            changed = true;
            break;
        }
    }
    for (int l = g.num_observed(); l < g.size(); ++l) {
        std::set<int> kids;
        for (int c : g.children(l))
            if (!g.is_latent(c))
                kids.insert(c);
        std::set<int> explained;
        for (int c : kids) {
            bool inside = true;
            for (int par : g.parents(c))
                if (par != l && !kids.count(par))
                    inside = false;
            if (inside)
                explained.insert(c);
        }
        if (explained.size() < 2)
            continue;
        for (int u : explained)
            for (int v : explained)
                g.remove_edge(u, v);
    }
    return g;
}

AdjacencyMatrix simplify_ground_truth(const SummaryGraph& g) { return adjacency(simplify_graph(g)); }

namespace {

Eigen::MatrixXi pad(const AdjacencyMatrix& a, int q)
{
    const int n = a.n_observed + q;
    Eigen::MatrixXi out = Eigen::MatrixXi::Zero(n, n);
    out.topLeftCorner(a.size(), a.size()) = a.adj;
    return out;
}

// truth index of every pred index under the latent matching perm
int overlap(const Eigen::MatrixXi& pred, const Eigen::MatrixXi& truth, int p, const std::vector<int>& perm)
{
    const int n = static_cast<int>(pred.rows());
    auto map = [&](int i) { return i < p ? i : p + perm[i - p]; };
    int tp = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (pred(i, j))
                tp += truth(map(i), map(j));
    return tp;
}

}  // namespace

ScoreReport score(const AdjacencyMatrix& pred, const AdjacencyMatrix& truth)
{
    if (pred.n_observed != truth.n_observed)
        throw ConfigError("predicted and true graphs disagree on the observed node count");
    const int p = pred.n_observed;
    const int q = std::max(pred.n_latent(), truth.n_latent());
    ScoreReport rep;
    rep.padding_added = std::abs(pred.n_latent() - truth.n_latent());
    Eigen::MatrixXi pa = pad(pred, q), ta = pad(truth, q);
    const int n_pred = pa.sum(), n_truth = ta.sum();

    std::vector<int> perm(q);
    std::iota(perm.begin(), perm.end(), 0);
    int best_tp = -1;
    std::vector<int> best = perm;
    if (q <= kMaxExhaustiveLatents) {
        do {
            int tp = overlap(pa, ta, p, perm);
            if (tp > best_tp) {
                best_tp = tp;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        // greedy: repeatedly fix the pred latent whose best free match gains most
        rep.greedy = true;
        std::vector<int> assign(q, -1);
        std::vector<char> used(q, 0);
        for (int step = 0; step < q; ++step) {
            int bi = -1, bj = -1, bgain = -1;
            for (int i = 0; i < q; ++i) {
                if (assign[i] >= 0)
                    continue;
                for (int j = 0; j < q; ++j) {
                    if (used[j])
                        continue;
                    int gain = 0;
                    for (int k = 0; k < p + q; ++k) {
                        int kt = k < p ? k : (assign[k - p] >= 0 ? p + assign[k - p] : -1);
                        if (kt < 0)
                            continue;
                        gain += pa(p + i, k) * ta(p + j, kt) + pa(k, p + i) * ta(kt, p + j);
                    }
                    if (gain > bgain) {
                        bgain = gain;
                        bi = i;
                        bj = j;
                    }
                }
            }
            assign[bi] = bj;
            used[bj] = 1;
        }
        best = assign;
        best_tp = overlap(pa, ta, p, best);
    }
    rep.best_permutation = best;
    if (n_pred == 0 && n_truth == 0) {
        rep.precision = rep.recall = rep.f1 = 1.0;
        return rep;
    }
    rep.precision = n_pred > 0 ? static_cast<double>(best_tp) / n_pred : 0.0;
    rep.recall = n_truth > 0 ? static_cast<double>(best_tp) / n_truth : 0.0;
    rep.f1 = rep.precision + rep.recall > 0.0 ? 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall) : 0.0;
    return rep;
}

BatchSummary batch_score(const std::vector<ScoreReport>& runs)
{
    if (runs.empty())
        throw ConfigError("batch_score needs at least one run");
    BatchSummary s;
    s.runs = static_cast<int>(runs.size());
    auto summarize = [&](auto get) {
        MetricSummary m;
        for (const auto& r : runs)
            m.mean += get(r);
        m.mean /= runs.size();
        if (runs.size() > 1) {
            double ss = 0.0;
            for (const auto& r : runs)
                ss += (get(r) - m.mean) * (get(r) - m.mean);
            m.sd = std::sqrt(ss / (runs.size() - 1));
        }
        return m;
    };
    s.precision = summarize([](const ScoreReport& r) { return r.precision; });
    s.recall = summarize([](const ScoreReport& r) { return r.recall; });
    s.f1 = summarize([](const ScoreReport& r) { return r.f1; });
    return s;
}

std::string format_report(const ScoreReport& r)
{
    nlohmann::json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["best_permutation"] = r.best_permutation;
    j["padding_added"] = r.padding_added;
    j["greedy"] = r.greedy;
    return j.dump();
}

}  // namespace hawkrank
