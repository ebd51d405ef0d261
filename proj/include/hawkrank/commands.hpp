#ifndef HAWKRANK_COMMANDS_HPP
#define HAWKRANK_COMMANDS_HPP

#include "hawkrank/binning.hpp"
#include "hawkrank/config.hpp"
#include "hawkrank/discovery.hpp"
#include "hawkrank/evaluation.hpp"
#include "hawkrank/synthesis.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hawkrank {

enum ExitCode : int { kExitOk = 0, kExitUnresolved = 2, kExitInput = 3, kExitNumerical = 4 };

// Seeds of one trial, both derived from the master seed.
std::uint64_t graph_seed(const RunConfig& cfg, int trial);
std::uint64_t data_seed(const RunConfig& cfg, int trial);

// Truth graph of a trial: the configured graph file, or the benchmark case
// with freshly drawn constants.
SummaryGraph truth_graph(const RunConfig& cfg, int trial);

// Observed count panel (columns = observed nodes) generated from `truth`.
BinnedPanel synthesize_panel(const SummaryGraph& truth, const RunConfig& cfg, int trial);

// Window used for a panel: cfg.m when positive, else the noise-limited choice.
int choose_window(const BinnedPanel& panel, const RunConfig& cfg);

DiscoveryResult discover_panel(const BinnedPanel& panel, const RunConfig& cfg, int* m_used = nullptr);
DiscoveryResult discover_oracle(const SummaryGraph& truth, const RunConfig& cfg);

struct TrialOutcome {
    SummaryGraph truth;
    DiscoveryResult result;
    ScoreReport score;
    int m = 0;
    double seconds = 0.0;
};

TrialOutcome run_trial(const RunConfig& cfg, int trial, bool oracle);

struct AlarmRecord {
    int alarm_id = 0;
    int device_id = 0;
    double start_ts = 0.0;
    double end_ts = 0.0;
};

std::vector<AlarmRecord> read_alarms(std::istream& is);

struct IngestResult {
    EventData events;
    std::vector<int> alarm_of_column;  // observed column -> alarm id
    std::vector<int> excluded;         // excluded alarm ids present in the selection
    std::size_t records = 0;
};

// Event time is the alarm start; times are shifted so the first kept event is 0.
IngestResult ingest_alarms(const std::vector<AlarmRecord>& records, int device, const std::vector<int>& alarms,
                           const std::vector<int>& exclude);

// Subcommands write their artifacts under cfg.out and return an exit code.
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_bin(const RunConfig& cfg, const std::string& events_path, std::ostream& log);
int cmd_discover(const RunConfig& cfg, const std::string& panel_path, const std::string& oracle_graph,
                 std::ostream& log);
int cmd_eval(const RunConfig& cfg, const std::string& pred_path, const std::string& truth_path, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_ingest(const RunConfig& cfg, const std::string& alarms_path, std::ostream& log);

}  // namespace hawkrank

#endif
