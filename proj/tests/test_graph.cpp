#include "hawkrank/synthesis.hpp"

#include <doctest.h>

#include <sstream>

using namespace hawkrank;

TEST_CASE("graph text format round-trips")
{
    SummaryGraph g = paper_case(3, 42);
    g.set_mu(5, 0.25);
    std::stringstream ss;
    write_graph(ss, g);
    const SummaryGraph back = read_graph(ss);
    CHECK(back == g);
    CHECK(back.num_observed() == 5);
    CHECK(back.num_latent() == 1);
}

TEST_CASE("malformed graph text is rejected")
{
    std::stringstream bad("decay exp beta=1\nnode 0 observed mu=0.1\n0 7 0.5\n");
    CHECK_THROWS_AS(read_graph(bad), InputError);
}

TEST_CASE("edges are validated")
{
    SummaryGraph g(2, 0);
    CHECK_THROWS(g.add_edge(0, 5, 0.1));
    CHECK_THROWS(g.add_edge(0, 1, -0.1));
    g.add_edge(0, 1, 0.3);
    CHECK(g.has_edge(0, 1));
    CHECK(g.parents(1) == std::vector<int>{0});
    g.remove_edge(0, 1);
    CHECK_FALSE(g.has_edge(0, 1));
}

TEST_CASE("stationarity is the spectral radius of the integrated influence")
{
    SummaryGraph g(2, 0, 2.0);
    g.add_edge(0, 0, 1.5);
    CHECK(spectral_radius(integrated_influence(g)) == doctest::Approx(0.75));
    CHECK(assert_stationary(g));
    g.add_edge(0, 1, 1.0);
    g.add_edge(1, 0, 1.0);
    CHECK_FALSE(assert_stationary(g));
}

TEST_CASE("window expansion connects lags within the kernel reach")
{
    SummaryGraph g(2, 0);
    g.add_edge(0, 1, 0.5);
    const WindowGraph w = expand_window(g, 3, 2);
    CHECK(w.has_edge({0, 1}, {1, 0}));
    CHECK(w.has_edge({0, 2}, {1, 0}));
    CHECK_FALSE(w.has_edge({0, 3}, {1, 0}));
    CHECK_FALSE(w.has_edge({0, 0}, {1, 0}));
    // lags 1..3 of the target each take up to two parents
    CHECK(w.num_edges() == 2 + 2 + 1);
    CHECK(w.topological_order().size() == 8u);
}

TEST_CASE("d-separation on a lagged chain")
{
    SummaryGraph g(3, 0);
    g.add_edge(0, 1, 0.5);
    g.add_edge(1, 2, 0.5);
    const WindowGraph w = expand_window(g, 2, 1);
    CHECK_FALSE(d_separated(w, {{0, 2}}, {{2, 0}}, {}));
    CHECK(d_separated(w, {{0, 2}}, {{2, 0}}, {{1, 1}}));
    CHECK(d_separated(w, {{0, 0}}, {{2, 0}}, {}));
}

TEST_CASE("symmetric path situation")
{
    const SummaryGraph c2 = case_topology(2);
    const auto ok = check_path_situation(c2, 4, {0, 1});
    CHECK(ok.holds);
    CHECK(ok.path_length == 0);

    const SummaryGraph pair = named_topology(NamedGraph::IntermediatePair);
    const auto sym = check_path_situation(pair, 4, {0, 1});
    CHECK(sym.holds);
    CHECK(sym.path_length == 1);

    const SummaryGraph minus = named_topology(NamedGraph::IntermediatePairMinusL3);
    const auto bad = check_path_situation(minus, 4, {0, 1});
    CHECK_FALSE(bad.holds);
    CHECK(bad.path_length == -1);

    SummaryGraph loop = named_topology(NamedGraph::IntermediatePair);
    loop.add_edge(5, 5, 0.2);
    CHECK_FALSE(check_path_situation(loop, 4, {0, 1}).holds);
}
