#include "hawkrank/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace hawkrank {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t graph_seed(const RunConfig& cfg, int trial)
{
    return split_seed(cfg.master_seed, 2 * static_cast<std::uint64_t>(trial));
}

std::uint64_t data_seed(const RunConfig& cfg, int trial)
{
    return split_seed(cfg.master_seed, 2 * static_cast<std::uint64_t>(trial) + 1);
}

SummaryGraph truth_graph(const RunConfig& cfg, int trial)
{
    if (!cfg.graph.empty())
        return load_graph(cfg.graph);
    CaseSpec spec = default_case_spec(cfg.case_id);
    spec.beta = cfg.beta;
    spec.mu = cfg.mu;
    if (cfg.alpha_lo > 0.0)
        spec.alpha_lo = cfg.alpha_lo;
    if (cfg.alpha_hi > 0.0)
        spec.alpha_hi = cfg.alpha_hi;
    SummaryGraph g = paper_case(spec, graph_seed(cfg, trial));
    if (!cfg.faithfulness_violation)
        return g;
    // a tie can push the radius over one; redraw the tie until it is stationary
    for (std::uint64_t k = 0; k < 100; ++k) {
        SummaryGraph tied = apply_faithfulness_violation(g, split_seed(graph_seed(cfg, trial), 1000 + k));
        if (assert_stationary(tied))
            return tied;
    }
    throw NumericalError("no stationary tie found for the faithfulness violation");
}

namespace {

std::vector<int> observed_ids(const SummaryGraph& g)
{
    std::vector<int> ids(g.num_observed());
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw InputError("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& dir, const std::string& name)
{
    std::ofstream os(fs::path(dir) / name);
    if (!os)
        throw InputError("cannot write " + (fs::path(dir) / name).string());
    os << std::setprecision(17);
    return os;
}

int k_max_for(const SummaryGraph& g, const RunConfig& cfg)
{
    return cfg.k_max > 0 ? cfg.k_max : default_k_max(g, cfg.delta);
}

EventData simulate_observed(const SummaryGraph& truth, const RunConfig& cfg, int trial)
{
    if (cfg.bins < 1 || !(cfg.delta > 0.0) || cfg.warmup < 0.0)
        throw ConfigError("bins and delta must be positive and warmup non-negative");
    const double span = static_cast<double>(cfg.bins) * cfg.delta;
    EventData full = simulate_hawkes(truth, cfg.warmup + span, data_seed(cfg, trial));
    EventData e;
    e.horizon = span;
    e.times.resize(truth.num_observed());
    for (int i = 0; i < truth.num_observed(); ++i)
        for (double t : full.times[i])
            if (t > cfg.warmup)
                e.times[i].push_back(t - cfg.warmup);
    return e;
}

json names(const SummaryGraph& g, const std::vector<int>& ids)
{
    json out = json::array();
    for (int i : ids)
        out.push_back(g.name(i));
    return out;
}

json result_json(const DiscoveryResult& r, int m)
{
    json j;
    j["m"] = m;
    j["resolved"] = r.resolved();
    j["unresolved"] = names(r.graph, r.unresolved);
    json ps = json::object();
    for (const auto& [node, parents] : r.parent_sets)
        ps[r.graph.name(node)] = names(r.graph, parents);
    j["parent_sets"] = ps;
    json ic = json::object();
    for (const auto& [edge, h] : r.intermediate_counts)
        ic[r.graph.name(edge.first) + "->" + r.graph.name(edge.second)] = h;
    j["intermediate_counts"] = ic;
    return j;
}

void write_result(const std::string& dir, const DiscoveryResult& r, int m)
{
    ensure_dir(dir);
    save_graph((fs::path(dir) / "discovered.graph").string(), r.graph);
    auto log = open_out(dir, "discovery.log");
    for (const auto& line : r.log)
        log << line << "\n";
    auto js = open_out(dir, "discovery.json");
    js << result_json(r, m).dump(2) << "\n";
}

std::string meta_for(const std::string& panel_path)
{
    fs::path p(panel_path);
    fs::path meta = p;
    meta.replace_extension(".meta");
    return fs::exists(meta) ? meta.string() : std::string();
}

// Horizon written by simulate or ingest next to the events file; 0 when absent.
double recorded_horizon(const std::string& events_path)
{
    const fs::path dir = fs::path(events_path).parent_path();
    for (const char* name : {"manifest.txt", "ingest_manifest.txt"}) {
        std::ifstream is(dir / name);
        std::string line;
        while (std::getline(is, line))
            if (line.rfind("events_horizon=", 0) == 0)
                return std::stod(line.substr(15));
    }
    return 0.0;
}

}  // namespace

BinnedPanel synthesize_panel(const SummaryGraph& truth, const RunConfig& cfg, int trial)
{
    const std::vector<int> obs = observed_ids(truth);
    if (cfg.mode == DataMode::Hawkes)
        return bin_events(simulate_observed(truth, cfg, trial), cfg.delta, obs);
    if (cfg.bins > std::numeric_limits<int>::max())
        throw ConfigError("bins too large for the discrete generators");
    const int T = static_cast<int>(cfg.bins);
    DiscretePanel d = cfg.mode == DataMode::Inar
                          ? generate_inar(truth, cfg.delta, T, k_max_for(truth, cfg), data_seed(cfg, trial))
                          : generate_linear_gaussian(truth, cfg.delta, T, k_max_for(truth, cfg), cfg.sigma,
                                                     data_seed(cfg, trial));
    return panel_from_matrix(d.values.leftCols(truth.num_observed()), cfg.delta, obs);
}

int choose_window(const BinnedPanel& panel, const RunConfig& cfg)
{
    if (cfg.m > 0)
        return cfg.m;
    return noise_limited_lags(panel.rows(), panel.cols(), cfg.tau, cfg.m_cap);
}

DiscoveryResult discover_panel(const BinnedPanel& panel, const RunConfig& cfg, int* m_used)
{
    const int m = choose_window(panel, cfg);
    if (m_used)
        *m_used = m;
    const BinnedPanel z = panel.standardized ? panel : standardize(panel);
    const WindowCovariance src = WindowCovariance::from_panel(z, m);
    return run_discovery(src, z.cols(), cfg.discovery());
}

DiscoveryResult discover_oracle(const SummaryGraph& truth, const RunConfig& cfg)
{
    const PopulationModel pm = population_model(truth, cfg.oracle_delta, cfg.oracle_k, cfg.oracle_m);
    const WindowCovariance src = WindowCovariance::from_population(pm, observed_ids(truth));
    return run_discovery(src, truth.num_observed(), cfg.discovery());
}

TrialOutcome run_trial(const RunConfig& cfg, int trial, bool oracle)
{
    const auto t0 = std::chrono::steady_clock::now();
    TrialOutcome out;
    out.truth = truth_graph(cfg, trial);
    if (oracle) {
        out.result = discover_oracle(out.truth, cfg);
        out.m = cfg.oracle_m;
    } else {
        out.result = discover_panel(synthesize_panel(out.truth, cfg, trial), cfg, &out.m);
    }
    out.score = score(adjacency(out.result.graph), simplify_ground_truth(out.truth));
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::vector<AlarmRecord> read_alarms(std::istream& is)
{
    std::vector<AlarmRecord> out;
    std::string line;
    int ln = 0;
    while (std::getline(is, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.rfind("alarm_id", 0) == 0)
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ','))
            f.push_back(tok);
        const std::string where = "alarms line " + std::to_string(ln);
        if (f.size() != 4)
            throw InputError(where + ": expected alarm_id,device_id,start_ts,end_ts");
        AlarmRecord r;
        try {
            std::size_t used = 0;
            r.alarm_id = std::stoi(f[0], &used);
            r.device_id = std::stoi(f[1]);
            r.start_ts = std::stod(f[2]);
            r.end_ts = std::stod(f[3]);
        } catch (const std::exception&) {
            throw InputError(where + ": cannot parse '" + line + "'");
        }
        if (!std::isfinite(r.start_ts) || !std::isfinite(r.end_ts))
            throw InputError(where + ": timestamps must be finite");
        if (r.start_ts > r.end_ts)
            throw InputError(where + ": start_ts is after end_ts");
        out.push_back(r);
    }
    return out;
}

IngestResult ingest_alarms(const std::vector<AlarmRecord>& records, int device, const std::vector<int>& alarms,
                           const std::vector<int>& exclude)
{
    const std::set<int> keep(alarms.begin(), alarms.end());
    const std::set<int> drop(exclude.begin(), exclude.end());
    std::set<int> excluded_seen;
    std::map<int, std::vector<double>> by_alarm;
    IngestResult res;
    for (const auto& r : records) {
        if (device >= 0 && r.device_id != device)
            continue;
        if (!keep.empty() && !keep.count(r.alarm_id))
            continue;
        ++res.records;
        if (drop.count(r.alarm_id)) {
            excluded_seen.insert(r.alarm_id);
            continue;
        }
        by_alarm[r.alarm_id].push_back(r.start_ts);
    }
    if (by_alarm.empty())
        throw InputError("alarm selection is empty");
    double t0 = std::numeric_limits<double>::infinity();
    for (const auto& [id, ts] : by_alarm)
        t0 = std::min(t0, *std::min_element(ts.begin(), ts.end()));
    double last = 0.0;
    for (auto& [id, ts] : by_alarm) {
        std::sort(ts.begin(), ts.end());
        for (double& t : ts)
            t -= t0;
        last = std::max(last, ts.back());
        res.alarm_of_column.push_back(id);
        res.events.times.push_back(ts);
    }
    res.events.horizon = last;
    res.excluded.assign(excluded_seen.begin(), excluded_seen.end());
    return res;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log)
{
    if (cfg.seeds.empty())
        throw ConfigError("seeds must not be empty");
    const int trial = cfg.seeds.front();
    const SummaryGraph truth = truth_graph(cfg, trial);
    ensure_dir(cfg.out);
    save_graph((fs::path(cfg.out) / "truth.graph").string(), truth);

    auto man = open_out(cfg.out, "manifest.txt");
    write_config(man, cfg);
    man << "trial=" << trial << "\n";
    man << "graph_seed=" << graph_seed(cfg, trial) << "\n";
    man << "data_seed=" << data_seed(cfg, trial) << "\n";
    man << "spectral_radius=" << spectral_radius(integrated_influence(truth)) << "\n";
    man << "observed=" << truth.num_observed() << "\n";
    man << "latent=" << truth.num_latent() << "\n";

    if (cfg.mode == DataMode::Hawkes) {
        const EventData e = simulate_observed(truth, cfg, trial);
        auto os = open_out(cfg.out, "events.csv");
        write_events(os, e);
        man << "events_horizon=" << e.horizon << "\n";
        log << "simulated " << e.total() << " events on " << e.dims() << " observed subprocesses\n";
    } else {
        const BinnedPanel p = synthesize_panel(truth, cfg, trial);
        write_binned((fs::path(cfg.out) / "panel.csv").string(), (fs::path(cfg.out) / "panel.meta").string(), p);
        log << "generated " << p.rows() << " x " << p.cols() << " panel\n";
    }
    return kExitOk;
}

int cmd_bin(const RunConfig& cfg, const std::string& events_path, std::ostream& log)
{
    std::ifstream is(events_path);
    if (!is)
        throw InputError("cannot read " + events_path);
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : recorded_horizon(events_path);
    EventData e = read_events(is, -1, horizon > 0.0 ? horizon : -1.0);
    if (horizon <= 0.0)
        e.horizon = std::ceil(e.horizon / cfg.delta) * cfg.delta + 0.5 * cfg.delta;
    const BinnedPanel p = bin_events(e, cfg.delta);
    ensure_dir(cfg.out);
    write_binned((fs::path(cfg.out) / "panel.csv").string(), (fs::path(cfg.out) / "panel.meta").string(), p);

    auto man = open_out(cfg.out, "bin_manifest.txt");
    man << "events=" << events_path << "\n";
    man << "delta=" << cfg.delta << "\n";
    man << "horizon=" << e.horizon << "\n";
    man << "rows=" << p.rows() << "\n";
    man << "cols=" << p.cols() << "\n";
    const int cap = std::min(cfg.m_cap, p.rows() / 10 - 1);
    if (cap >= 1) {
        const LagEstimate est = estimate_effective_lags(p, cap);
        man << "k_eff=" << est.k_eff << "\n";
        man << "k_eff_threshold=" << est.threshold << "\n";
    }
    man << "noise_limited_m=" << noise_limited_lags(p.rows(), p.cols(), cfg.tau, cfg.m_cap) << "\n";
    log << "binned " << p.rows() << " bins x " << p.cols() << " subprocesses\n";
    return kExitOk;
}

int cmd_discover(const RunConfig& cfg, const std::string& panel_path, const std::string& oracle_graph,
                 std::ostream& log)
{
    DiscoveryResult r;
    int m = 0;
    if (!oracle_graph.empty()) {
        r = discover_oracle(load_graph(oracle_graph), cfg);
        m = cfg.oracle_m;
    } else {
        if (panel_path.empty())
            throw ConfigError("discover needs a panel or an oracle graph");
        r = discover_panel(read_binned(panel_path, meta_for(panel_path)), cfg, &m);
    }
    write_result(cfg.out, r, m);
    log << "window m=" << m << ", " << r.graph.num_latent() << " latent, " << r.graph.edges().size() << " edges";
    if (!r.resolved())
        log << ", " << r.unresolved.size() << " unresolved";
    log << "\n";
    return r.resolved() ? kExitOk : kExitUnresolved;
}

int cmd_eval(const RunConfig& cfg, const std::string& pred_path, const std::string& truth_path, std::ostream& log)
{
    const SummaryGraph pred = load_graph(pred_path);
    const SummaryGraph truth = load_graph(truth_path);
    if (pred.num_observed() != truth.num_observed())
        throw InputError("predicted and true graphs disagree on the observed node count");
    const ScoreReport rep = score(adjacency(pred), simplify_ground_truth(truth));
    ensure_dir(cfg.out);
    auto os = open_out(cfg.out, "score.json");
    os << format_report(rep) << "\n";
    log << format_report(rep) << "\n";
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log)
{
    if (cfg.sweep_case.empty() && cfg.sweep_delta.empty() && cfg.sweep_tau.empty() && cfg.sweep_bins.empty())
        throw ConfigError("sweep grid is empty");
    if (cfg.seeds.empty())
        throw ConfigError("seeds must not be empty");
    auto or_default = [](auto v, auto d) { return v.empty() ? decltype(v){d} : v; };
    const auto cases = or_default(cfg.sweep_case, cfg.case_id);
    const auto deltas = or_default(cfg.sweep_delta, cfg.delta);
    const auto taus = or_default(cfg.sweep_tau, cfg.tau);
    const auto sizes = or_default(cfg.sweep_bins, cfg.bins);

    ensure_dir(cfg.out);
    auto csv = open_out(cfg.out, "sweep.csv");
    csv << std::setprecision(6);
    csv << "case,samples,delta,tau,seed,precision,recall,f1,unresolved,m,seconds,status\n";
    int failures = 0;
    for (int c : cases)
        for (long n : sizes)
            for (double d : deltas)
                for (double t : taus) {
                    RunConfig cell = cfg;
                    cell.case_id = c;
                    cell.bins = n;
                    cell.delta = d;
                    cell.tau = t;
                    const std::string key = std::to_string(c) + "," + std::to_string(n) + "," +
                                            [&] {
                                                std::ostringstream os;
                                                os << d << "," << t;
                                                return os.str();
                                            }();
                    std::vector<ScoreReport> ok;
                    for (int s : cfg.seeds) {
                        try {
                            TrialOutcome o = run_trial(cell, s, false);
                            ok.push_back(o.score);
                            csv << key << "," << s << "," << o.score.precision << "," << o.score.recall << ","
                                << o.score.f1 << "," << o.result.unresolved.size() << "," << o.m << ","
                                << o.seconds << ",ok\n";
                        } catch (const std::exception& e) {
                            ++failures;
                            std::string msg = e.what();
                            std::replace(msg.begin(), msg.end(), ',', ';');
                            csv << key << "," << s << ",,,,,,,error: " << msg << "\n";
                        }
                        csv.flush();
                    }
                    if (ok.empty())
                        continue;
                    const BatchSummary b = batch_score(ok);
                    csv << key << ",mean," << b.precision.mean << "," << b.recall.mean << "," << b.f1.mean
                        << ",,,," << b.runs << " runs\n";
                    csv << key << ",sd," << b.precision.sd << "," << b.recall.sd << "," << b.f1.sd << ",,,,"
                        << b.runs << " runs\n";
                    log << "case " << c << " bins " << n << " delta " << d << " tau " << t << ": F1 "
                        << b.f1.mean << " (sd " << b.f1.sd << ", " << b.runs << " runs)\n";
                }
    if (failures)
        log << failures << " runs failed; see sweep.csv\n";
    return kExitOk;
}

int cmd_ingest(const RunConfig& cfg, const std::string& alarms_path, std::ostream& log)
{
    std::ifstream is(alarms_path);
    if (!is)
        throw InputError("cannot read " + alarms_path);
    const IngestResult res = ingest_alarms(read_alarms(is), cfg.device, cfg.alarms, cfg.exclude);
    ensure_dir(cfg.out);
    auto ev = open_out(cfg.out, "events.csv");
    write_events(ev, res.events);
    auto man = open_out(cfg.out, "ingest_manifest.txt");
    man << "source=" << alarms_path << "\n";
    man << "device=" << cfg.device << "\n";
    man << "records=" << res.records << "\n";
    man << "events_horizon=" << res.events.horizon << "\n";
    for (std::size_t c = 0; c < res.alarm_of_column.size(); ++c)
        man << "column." << c << "=alarm " << res.alarm_of_column[c] << "\n";
    for (int id : res.excluded)
        man << "excluded=alarm " << id << "\n";
    log << "ingested " << res.events.total() << " events over " << res.alarm_of_column.size()
        << " observed alarm types";
    if (!res.excluded.empty())
        log << ", " << res.excluded.size() << " excluded";
    log << "\n";
    return kExitOk;
}

}  // namespace hawkrank
