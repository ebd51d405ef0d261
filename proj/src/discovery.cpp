#include "hawkrank/discovery.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace hawkrank {

using nlohmann::json;

DiscoveryState::DiscoveryState(int n_observed) : graph(n_observed, 0), registry(n_observed)
{
    for (int i = 0; i < n_observed; ++i)
        active.push_back(i);
}

namespace {

std::vector<int> observed_ids(const DiscoveryState& s)
{
    std::vector<int> out(s.graph.num_observed());
    std::iota(out.begin(), out.end(), 0);
    return out;
}

json names(const SummaryGraph& g, const std::vector<int>& ids)
{
    json out = json::array();
    for (int i : ids)
        out.push_back(g.name(i));
    return out;
}

json rho_near(const RankTestResult& r)
{
    json out = json::array();
    const int len = static_cast<int>(r.rho.size());
    for (int k = std::max(0, r.hypothesis - 2); k < std::min(len, r.hypothesis + 2); ++k)
        out.push_back(r.rho(k));
    return out;
}

void log_test(DiscoveryState& s, const char* phase, const char* kind, const json& subject, const IdentTest& t)
{
    json rec;
    rec["iter"] = s.iteration;
    rec["phase"] = phase;
    rec["test"] = kind;
    rec["subject"] = subject;
    rec["A"] = describe(t.a);
    rec["B"] = describe(t.b);
    rec["r"] = t.r;
    rec["rank"] = t.result.estimated_rank;
    rec["n_rho"] = t.result.rho.size();
    rec["rho_near_r"] = rho_near(t.result);
    rec["tau"] = t.result.tau;
    rec["n"] = t.result.n_samples;
    rec["pass"] = t.pass;
    s.log.push_back(rec.dump());
}

void log_action(DiscoveryState& s, const json& rec)
{
    json r = rec;
    r["iter"] = s.iteration;
    s.log.push_back(r.dump());
}

// Lexicographic k-subsets of pool (pool sorted ascending).
template <typename Visit>
bool for_each_subset(const std::vector<int>& pool, int k, Visit&& visit)
{
    const int n = static_cast<int>(pool.size());
    if (k > n)
        return false;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
        std::vector<int> subset(k);
        for (int i = 0; i < k; ++i)
            subset[i] = pool[idx[i]];
        if (visit(subset))
            return true;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i)
            --i;
        if (i < 0)
            return false;
        ++idx[i];
        for (int j = i + 1; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

bool phase_one(DiscoveryState& state, const WindowCovariance& src, const DiscoveryConfig& cfg)
{
    const std::vector<int> observed = observed_ids(state);
    // results only depend on the registry, which this phase does not touch
    std::map<std::pair<int, std::vector<int>>, bool> cache;
    bool any = false;
    bool restart = true;
    while (restart) {
        restart = false;
        for (int target : state.active) {
            std::set<int> pool_set(state.active.begin(), state.active.end());
            pool_set.insert(observed.begin(), observed.end());
            std::vector<int> pool(pool_set.begin(), pool_set.end());
            const int cap = cfg.max_subset_size > 0 ? std::min<int>(cfg.max_subset_size, pool.size())
                                                     : static_cast<int>(pool.size());
            std::vector<int> found;
            bool hit = false;
            for (int k = cfg.empty_candidate ? 0 : 1; k <= cap && !hit; ++k) {
                hit = for_each_subset(pool, k, [&](const std::vector<int>& cand) {
                    auto key = std::make_pair(target, cand);
                    auto it = cache.find(key);
                    if (it != cache.end())
                        return it->second;
                    const bool all_observed = state.registry.is_observed(target) &&
                                              std::all_of(cand.begin(), cand.end(), [&](int c) {
                                                  return state.registry.is_observed(c);
                                              });
                    IdentTest t;
                    const char* kind = all_observed ? "observed_parent" : "latent_parent";
                    if (all_observed)
                        t = test_parent_cause_observed(src, cand, target, observed, cfg.criterion());
                    else
                        t = test_parent_cause_latent(src, cand, target, state.registry, observed, cfg.criterion(), cfg.latent_rule);
                    json subject;
                    subject["target"] = state.graph.name(target);
                    subject["candidate"] = names(state.graph, cand);
                    log_test(state, "I", kind, subject, t);
                    cache[key] = t.pass;
                    if (t.pass)
                        found = cand;
                    return t.pass;
                });
            }
            if (!hit) {
                if (cap < static_cast<int>(pool.size())) {
                    json rec;
                    rec["phase"] = "I";
                    rec["action"] = "abstain";
                    rec["target"] = state.graph.name(target);
                    rec["reason"] = "subset cap " + std::to_string(cap) + " reached";
                    log_action(state, rec);
                }
                continue;
            }
            for (int c : found)
                state.graph.add_edge(c, target, 1.0);
            state.parent_sets[target] = found;
            state.active.erase(std::find(state.active.begin(), state.active.end(), target));
            json rec;
            rec["phase"] = "I";
            rec["action"] = "resolve";
            rec["target"] = state.graph.name(target);
            rec["parents"] = names(state.graph, found);
            log_action(state, rec);
            any = true;
            restart = true;
            break;
        }
    }
    return any;
}

void register_surrogate(DiscoveryState& state, int latent, const std::vector<int>& effects)
{
    if (effects.size() < 2)
        throw ConfigError("a latent needs at least two observed effects");
    std::set<int> eff(effects.begin(), effects.end());
    const int sur = *eff.begin();
    eff.erase(eff.begin());
    state.registry.set(latent, sur, eff);
}

bool phase_two(DiscoveryState& state, const WindowCovariance& src, const DiscoveryConfig& cfg)
{
    const std::vector<int> observed = observed_ids(state);
    const std::vector<int> act = state.active;
    const int n = static_cast<int>(act.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
    std::vector<char> paired(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            IdentTest t = test_latent_confounder_pair(src, act[i], act[j], state.registry, observed, cfg.criterion());
            json subject;
            subject["pair"] = names(state.graph, {act[i], act[j]});
            log_test(state, "II", "latent_pair", subject, t);
            if (t.pass) {
                paired[i] = paired[j] = 1;
                int a = root(i), b = root(j);
                if (a != b)
                    parent[std::max(a, b)] = std::min(a, b);
            }
        }
    std::map<int, std::vector<int>> clusters;
    for (int i = 0; i < n; ++i)
        if (paired[i])
            clusters[root(i)].push_back(act[i]);
    if (clusters.empty())
        return false;

    for (const auto& [r, members] : clusters) {
        const int latent = state.graph.add_latent();
        std::vector<int> effects;
        for (int mem : members)
            effects.push_back(state.registry.surrogate(mem));
        register_surrogate(state, latent, effects);
        for (int mem : members) {
            state.graph.add_edge(latent, mem, 1.0);
            state.active.erase(std::find(state.active.begin(), state.active.end(), mem));
            state.parent_sets[mem] = {latent};
        }
        state.active.push_back(latent);
        json rec;
        rec["phase"] = "II";
        rec["action"] = "new_latent";
        rec["latent"] = state.graph.name(latent);
        rec["members"] = names(state.graph, members);
        rec["surrogate"] = state.graph.name(state.registry.surrogate(latent));
        const std::set<int> sib_set = state.registry.siblings_of(latent);
        std::vector<int> sib(sib_set.begin(), sib_set.end());
        rec["siblings"] = names(state.graph, sib);
        log_action(state, rec);
    }
    return true;
}

DiscoveryResult run_discovery(const WindowCovariance& src, int n_observed, const DiscoveryConfig& cfg)
{
    if (cfg.max_iterations < 1)
        throw ConfigError("max_iterations must be at least 1");
    if (cfg.max_subset_size < 0)
        throw ConfigError("max_subset_size must be non-negative");
    if (src.m() < 1)
        throw ConfigError("lag budget must be at least 1");
    for (int i = 0; i < n_observed; ++i)
        if (!src.covers({i, 0}))
            throw ConfigError("covariance source does not cover observed node " + std::to_string(i));

    DiscoveryState state(n_observed);
    for (int it = 1; it <= cfg.max_iterations && !state.active.empty(); ++it) {
        state.iteration = it;
        bool p1 = phase_one(state, src, cfg);
        if (state.active.empty())
            break;
        bool p2 = phase_two(state, src, cfg);
        if (!p1 && !p2)
            break;
    }
    DiscoveryResult res;
    res.graph = state.graph;
    res.unresolved = state.active;
    res.log = std::move(state.log);
    res.parent_sets = state.parent_sets;
    if (cfg.annotate_intermediates)
        annotate_intermediates(res, src, cfg);
    return res;
}

void annotate_intermediates(DiscoveryResult& result, const WindowCovariance& src, const DiscoveryConfig& cfg)
{
    const int p = result.graph.num_observed();
    std::vector<int> observed(p);
    std::iota(observed.begin(), observed.end(), 0);
    for (const auto& [target, parents] : result.parent_sets) {
        if (target >= p)
            continue;
        if (!std::all_of(parents.begin(), parents.end(), [&](int c) { return c < p; }))
            continue;
        for (int par : parents) {
            int h = count_intermediate_latents(src, target, par, parents, observed, cfg.criterion());
            result.intermediate_counts[{par, target}] = h;
            json rec;
            rec["action"] = "intermediates";
            rec["edge"] = result.graph.name(par) + "->" + result.graph.name(target);
            rec["h"] = h;
            result.log.push_back(rec.dump());
        }
    }
}

}  // namespace hawkrank
