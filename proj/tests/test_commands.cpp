#include "hawkrank/commands.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hawkrank;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name)
    {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("alarm records parse with an optional header")
{
    std::istringstream is("alarm_id,device_id,start_ts,end_ts\n3,1,10.5,11\n\n4,1,12,12\r\n");
    const auto r = read_alarms(is);
    REQUIRE(r.size() == 2);
    CHECK(r[0].alarm_id == 3);
    CHECK(r[1].start_ts == 12.0);
    std::istringstream no_header("1,2,3,4\n");
    CHECK(read_alarms(no_header).size() == 1);
}

TEST_CASE("malformed alarm rows are rejected with the line number")
{
    std::istringstream reversed("1,1,5,4\n");
    CHECK_THROWS_WITH_AS(read_alarms(reversed), doctest::Contains("line 1"), InputError);
    std::istringstream short_row("alarm_id,device_id,start_ts,end_ts\n1,1,5\n");
    CHECK_THROWS_WITH_AS(read_alarms(short_row), doctest::Contains("line 2"), InputError);
    std::istringstream junk("1,x,5,6\n");
    CHECK_THROWS_AS(read_alarms(junk), InputError);
}

TEST_CASE("ingest selects a device, shifts time and drops excluded alarms")
{
    const std::vector<AlarmRecord> rec{{5, 1, 100, 101}, {2, 1, 103, 104}, {5, 1, 102, 102},
                                       {9, 1, 104, 105}, {2, 2, 50, 51}};
    const IngestResult r = ingest_alarms(rec, 1, {}, {9});
    CHECK(r.records == 4);
    CHECK(r.alarm_of_column == std::vector<int>{2, 5});
    CHECK(r.excluded == std::vector<int>{9});
    CHECK(r.events.times[0] == std::vector<double>{3.0});
    CHECK(r.events.times[1] == std::vector<double>{0.0, 2.0});

    const IngestResult all = ingest_alarms(rec, -1, {}, {});
    CHECK(all.alarm_of_column.size() == 3);
    CHECK(all.excluded.empty());
    CHECK_THROWS_AS(ingest_alarms(rec, 7, {}, {}), InputError);
    CHECK_THROWS_AS(ingest_alarms(rec, 1, {9}, {9}), InputError);
}

TEST_CASE("trial seeds are stable and per-trial distinct")
{
    RunConfig c;
    CHECK(graph_seed(c, 0) != data_seed(c, 0));
    CHECK(graph_seed(c, 1) != graph_seed(c, 0));
    CHECK(truth_graph(c, 3) == truth_graph(c, 3));
    c.faithfulness_violation = true;
    CHECK(assert_stationary(truth_graph(c, 3)));
}

TEST_CASE("simulate, bin, discover and eval chain together reproducibly")
{
    TempDir dir("hawkrank_commands_test");
    RunConfig c;
    c.case_id = 1;
    c.bins = 20000;
    c.out = (dir.path / "sim").string();
    std::ostringstream log;
    CHECK(cmd_simulate(c, log) == kExitOk);
    const std::string events = slurp(dir.path / "sim" / "events.csv");
    CHECK(cmd_simulate(c, log) == kExitOk);
    CHECK(slurp(dir.path / "sim" / "events.csv") == events);

    RunConfig b = c;
    b.out = (dir.path / "bin").string();
    CHECK(cmd_bin(b, (dir.path / "sim" / "events.csv").string(), log) == kExitOk);
    const BinnedPanel p = read_binned((dir.path / "bin" / "panel.csv").string());
    CHECK(p.rows() == 20000);
    CHECK(p.cols() == 3);

    RunConfig d = c;
    d.out = (dir.path / "disc").string();
    const int code = cmd_discover(d, (dir.path / "bin" / "panel.csv").string(), "", log);
    CHECK((code == kExitOk || code == kExitUnresolved));
    CHECK(std::filesystem::exists(dir.path / "disc" / "discovered.graph"));
    CHECK(std::filesystem::exists(dir.path / "disc" / "discovery.log"));

    RunConfig e = c;
    e.out = (dir.path / "eval").string();
    CHECK(cmd_eval(e, (dir.path / "disc" / "discovered.graph").string(), (dir.path / "sim" / "truth.graph").string(),
                   log) == kExitOk);
    CHECK(slurp(dir.path / "eval" / "score.json").find("\"f1\"") != std::string::npos);
}

TEST_CASE("oracle discovery reports unresolved residue through the exit code")
{
    TempDir dir("hawkrank_oracle_test");
    const std::string truth = (dir.path / "t.graph").string();
    save_graph(truth, sample_constants(named_topology(NamedGraph::IntermediatePairMinusL3), 0.5, 0.9, 3));
    RunConfig c;
    c.out = dir.path.string();
    std::ostringstream log;
    CHECK(cmd_discover(c, "", truth, log) == kExitUnresolved);
    save_graph(truth, paper_case(1, 2));
    CHECK(cmd_discover(c, "", truth, log) == kExitOk);
}

TEST_CASE("discrete generators write a panel")
{
    TempDir dir("hawkrank_inar_test");
    RunConfig c;
    c.mode = DataMode::Inar;
    c.bins = 2000;
    c.out = dir.path.string();
    std::ostringstream log;
    CHECK(cmd_simulate(c, log) == kExitOk);
    CHECK(read_binned((dir.path / "panel.csv").string()).rows() == 2000);
}

TEST_CASE("sweep writes per-seed rows and cell summaries")
{
    TempDir dir("hawkrank_sweep_test");
    RunConfig c;
    c.bins = 5000;
    c.seeds = {0, 1};
    c.sweep_tau = {0.1, 0.2};
    c.out = dir.path.string();
    std::ostringstream log;
    CHECK(cmd_sweep(c, log) == kExitOk);
    std::istringstream csv(slurp(dir.path / "sweep.csv"));
    std::string line;
    int rows = 0, summaries = 0;
    std::getline(csv, line);
    CHECK(line == "case,samples,delta,tau,seed,precision,recall,f1,unresolved,m,seconds,status");
    while (std::getline(csv, line)) {
        ++rows;
        summaries += line.find(",mean,") != std::string::npos || line.find(",sd,") != std::string::npos;
    }
    CHECK(rows == 8);
    CHECK(summaries == 4);

    RunConfig empty = c;
    empty.sweep_tau.clear();
    CHECK_THROWS_AS(cmd_sweep(empty, log), ConfigError);
}
