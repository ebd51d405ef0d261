#include "hawkrank/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hawkrank;

TEST_CASE("defaults")
{
    const RunConfig c;
    CHECK(c.bins == 80000);
    CHECK(c.delta == 0.1);
    CHECK(c.tau == 0.1);
    CHECK(c.m == 0);
    CHECK(c.discovery().empty_candidate);
    for (const auto& k : RunConfig::keys())
        CHECK_FALSE(RunConfig::help(k).empty());
}

TEST_CASE("key = value lines with comments")
{
    RunConfig c;
    std::istringstream is("# header\ncase = 3\n tau=0.05   # inline\n\nseeds = 0-2, 7\nrank_rule = bartlett\n"
                          "mode = inar\nsweep_delta = 0.1,0.3\nannotate_intermediates = yes\n");
    apply_config(c, is);
    CHECK(c.case_id == 3);
    CHECK(c.tau == 0.05);
    CHECK(c.seeds == std::vector<int>{0, 1, 2, 7});
    CHECK(c.rank_rule == RankRule::Bartlett);
    CHECK(c.mode == DataMode::Inar);
    CHECK(c.sweep_delta == std::vector<double>{0.1, 0.3});
    CHECK(c.annotate_intermediates);
}

TEST_CASE("errors carry the origin and line")
{
    RunConfig c;
    std::istringstream unknown("case = 2\nbogus = 1\n");
    CHECK_THROWS_WITH_AS(apply_config(c, unknown, "x.cfg"), doctest::Contains("x.cfg:2"), ConfigError);
    std::istringstream bad_number("tau = abc\n");
    CHECK_THROWS_AS(apply_config(c, bad_number), ConfigError);
    std::istringstream no_eq("tau 0.1\n");
    CHECK_THROWS_AS(apply_config(c, no_eq), ConfigError);
    std::istringstream bad_enum("mode = spline\n");
    CHECK_THROWS_AS(apply_config(c, bad_enum), ConfigError);
    std::istringstream bad_range("seeds = 5-2\n");
    CHECK_THROWS_AS(apply_config(c, bad_range), ConfigError);
}

TEST_CASE("includes resolve relative to the including file and later lines win")
{
    const auto dir = std::filesystem::temp_directory_path() / "hawkrank_config_test";
    std::filesystem::create_directories(dir / "sub");
    std::ofstream(dir / "sub" / "base.cfg") << "tau = 0.2\nbins = 1000\n";
    std::ofstream(dir / "top.cfg") << "include = sub/base.cfg\ntau = 0.01\n";
    std::ofstream(dir / "loop.cfg") << "include = loop.cfg\n";
    const RunConfig c = load_config((dir / "top.cfg").string());
    CHECK(c.tau == 0.01);
    CHECK(c.bins == 1000);
    CHECK_THROWS_AS(load_config((dir / "loop.cfg").string()), ConfigError);
    CHECK_THROWS_AS(load_config((dir / "missing.cfg").string()), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("written configs read back identically")
{
    RunConfig c;
    c.set("case", "5");
    c.set("delta", "0.3");
    c.set("exclude", "4,9");
    c.set("latent_rule", "target-row");
    std::stringstream ss;
    write_config(ss, c);
    RunConfig back;
    apply_config(back, ss);
    for (const auto& k : RunConfig::keys())
        CHECK(back.get(k) == c.get(k));
}
