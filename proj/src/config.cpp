#include "hawkrank/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hawkrank {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v)
{
    std::istringstream is(v);
    T out{};
    is >> out;
    if (is.fail() || !is.eof())
        throw ConfigError("key '" + key + "': cannot parse '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

// Comma-separated items; integer lists also accept ranges like 0-9.
template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v)
{
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        if constexpr (std::is_integral_v<T>) {
            const auto dash = item.find('-', 1);
            if (dash != std::string::npos) {
                T lo = parse_number<T>(key, item.substr(0, dash));
                T hi = parse_number<T>(key, item.substr(dash + 1));
                if (hi < lo)
                    throw ConfigError("key '" + key + "': empty range '" + item + "'");
                for (T x = lo; x <= hi; ++x)
                    out.push_back(x);
                continue;
            }
        }
        out.push_back(parse_number<T>(key, item));
    }
    return out;
}

// shortest text that reads back to the same value
template <typename T>
std::string str(T x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + str(v[i]);
    return out;
}

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    std::string doc;
};

#define HR_NUM(name, member, type, doc)                                                                    \
    {                                                                                                      \
        name, Field{[](RunConfig& c, const std::string& k, const std::string& v) {                         \
                        c.member = parse_number<type>(k, v);                                               \
                    },                                                                                     \
                    [](const RunConfig& c) { return str(c.member); }, doc }                                \
    }
#define HR_BOOL(name, member, doc)                                                                         \
    {                                                                                                      \
        name, Field{[](RunConfig& c, const std::string& k, const std::string& v) {                         \
                        c.member = parse_bool(k, v);                                                       \
                    },                                                                                     \
                    [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, doc }     \
    }
#define HR_LIST(name, member, type, doc)                                                                   \
    {                                                                                                      \
        name, Field{[](RunConfig& c, const std::string& k, const std::string& v) {                         \
                        c.member = parse_list<type>(k, v);                                                 \
                    },                                                                                     \
                    [](const RunConfig& c) { return join(c.member); }, doc }                               \
    }

const std::vector<std::pair<std::string, Field>>& table()
{
    static const std::vector<std::pair<std::string, Field>> t = {
        HR_NUM("case", case_id, int, "benchmark case 1..6"),
        {"graph", Field{[](RunConfig& c, const std::string&, const std::string& v) { c.graph = v; },
                        [](const RunConfig& c) { return c.graph; }, "edge-list graph file overriding case"}},
        HR_NUM("bins", bins, long, "number of bins T"),
        HR_NUM("horizon", horizon, double, "events horizon for binning (0: from data)"),
        HR_NUM("delta", delta, double, "bin width"),
        HR_NUM("beta", beta, double, "exponential kernel decay"),
        HR_NUM("alpha_lo", alpha_lo, double, "lower edge constant (negative: case default)"),
        HR_NUM("alpha_hi", alpha_hi, double, "upper edge constant (negative: case default)"),
        HR_NUM("mu", mu, double, "baseline intensity"),
        HR_NUM("warmup", warmup, double, "simulated time dropped before the first bin"),
        HR_NUM("m", m, int, "lag window (0: noise-limited automatic choice)"),
        HR_NUM("m_cap", m_cap, int, "upper bound for the automatic window"),
        HR_NUM("k_max", k_max, int, "discrete lags of the linear model (0: tail default)"),
        HR_NUM("tau", tau, double, "rank threshold"),
        {"rank_rule",
         Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                   if (v == "threshold")
                       c.rank_rule = RankRule::Threshold;
                   else if (v == "bartlett")
                       c.rank_rule = RankRule::Bartlett;
                   else
                       throw ConfigError("key '" + k + "': expected threshold or bartlett");
               },
               [](const RunConfig& c) {
                   return std::string(c.rank_rule == RankRule::Threshold ? "threshold" : "bartlett");
               },
               "threshold | bartlett"}},
        HR_NUM("sigma", sigma, double, "noise scale of the Gaussian generator"),
        {"mode",
         Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                   if (v == "hawkes")
                       c.mode = DataMode::Hawkes;
                   else if (v == "inar")
                       c.mode = DataMode::Inar;
                   else if (v == "gaussian")
                       c.mode = DataMode::Gaussian;
                   else
                       throw ConfigError("key '" + k + "': expected hawkes, inar or gaussian");
               },
               [](const RunConfig& c) {
                   return std::string(c.mode == DataMode::Hawkes ? "hawkes"
                                      : c.mode == DataMode::Inar ? "inar"
                                                                 : "gaussian");
               },
               "hawkes | inar | gaussian"}},
        HR_LIST("seeds", seeds, int, "trial indices, e.g. 0-9"),
        HR_NUM("master_seed", master_seed, std::uint64_t, "master seed all streams derive from"),
        {"out", Field{[](RunConfig& c, const std::string&, const std::string& v) { c.out = v; },
                      [](const RunConfig& c) { return c.out; }, "output directory"}},
        HR_BOOL("faithfulness_violation", faithfulness_violation, "tie two random edge constants"),
        HR_NUM("max_subset_size", max_subset_size, int, "candidate size cap (0: none)"),
        HR_NUM("max_iterations", max_iterations, int, "phase alternation cap"),
        HR_BOOL("annotate_intermediates", annotate_intermediates, "count intermediate latents"),
        HR_BOOL("empty_candidate", empty_candidate, "test the empty parent set first"),
        {"latent_rule",
         Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                   if (v == "exact")
                       c.latent_rule = LatentRule::Exact;
                   else if (v == "target-row")
                       c.latent_rule = LatentRule::TargetRow;
                   else
                       throw ConfigError("key '" + k + "': expected exact or target-row");
               },
               [](const RunConfig& c) {
                   return std::string(c.latent_rule == LatentRule::Exact ? "exact" : "target-row");
               },
               "exact | target-row"}},
        HR_NUM("oracle_delta", oracle_delta, double, "bin width of the population oracle"),
        HR_NUM("oracle_k", oracle_k, int, "discrete lags of the population oracle"),
        HR_NUM("oracle_m", oracle_m, int, "window of the population oracle"),
        HR_LIST("sweep_case", sweep_case, int, "sweep grid: cases"),
        HR_LIST("sweep_delta", sweep_delta, double, "sweep grid: bin widths"),
        HR_LIST("sweep_tau", sweep_tau, double, "sweep grid: thresholds"),
        HR_LIST("sweep_bins", sweep_bins, long, "sweep grid: sample sizes"),
        HR_NUM("device", device, int, "alarm device filter (-1: all)"),
        HR_LIST("alarms", alarms, int, "alarm ids to keep (empty: all)"),
        HR_LIST("exclude", exclude, int, "alarm ids treated as latent"),
    };
    return t;
}

#undef HR_NUM
#undef HR_BOOL
#undef HR_LIST

const Field& field(const std::string& key)
{
    for (const auto& [name, f] : table())
        if (name == key)
            return f;
    throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

DiscoveryConfig RunConfig::discovery() const
{
    DiscoveryConfig d;
    d.tau = tau;
    d.rank_rule = rank_rule;
    d.max_subset_size = max_subset_size;
    d.max_iterations = max_iterations;
    d.annotate_intermediates = annotate_intermediates;
    d.empty_candidate = empty_candidate;
    d.latent_rule = latent_rule;
    return d;
}

void RunConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, key, trim(value)); }

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys()
{
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& [name, f] : table())
            out.push_back(name);
        return out;
    }();
    return k;
}

std::string RunConfig::help(const std::string& key) { return field(key).doc; }

void apply_config(RunConfig& cfg, std::istream& is, const std::string& origin, const std::string& base_dir, int depth)
{
    if (depth > 16)
        throw ConfigError(origin + ": include nesting too deep");
    std::string line;
    int ln = 0;
    while (std::getline(is, line)) {
        ++ln;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(ln) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "include") {
            std::filesystem::path p(value);
            if (p.is_relative())
                p = std::filesystem::path(base_dir) / p;
            std::ifstream in(p);
            if (!in)
                throw ConfigError(origin + ":" + std::to_string(ln) + ": cannot open include '" + p.string() + "'");
            apply_config(cfg, in, p.string(), p.parent_path().string(), depth + 1);
            continue;
        }
        try {
            cfg.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(ln) + ": " + e.what());
        }
    }
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    RunConfig cfg;
    const std::string dir = std::filesystem::path(path).parent_path().string();
    apply_config(cfg, in, path, dir.empty() ? "." : dir);
    return cfg;
}

void write_config(std::ostream& os, const RunConfig& cfg)
{
    for (const auto& key : RunConfig::keys())
        os << key << "=" << cfg.get(key) << "\n";
}

}  // namespace hawkrank
