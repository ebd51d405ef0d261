#include "hawkrank/rank.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hawkrank;

TEST_CASE("split seeds are deterministic and distinct")
{
    CHECK(split_seed(1, 0) == split_seed(1, 0));
    CHECK(split_seed(1, 0) != split_seed(1, 1));
    CHECK(split_seed(1, 0) != split_seed(2, 0));
}

TEST_CASE("benchmark cases are stationary and reproducible")
{
    for (int c = 1; c <= 6; ++c) {
        const SummaryGraph a = paper_case(c, 9);
        CHECK(assert_stationary(a));
        CHECK(a == paper_case(c, 9));
        CHECK(a.edges().size() == case_topology(c).edges().size());
        const CaseSpec spec = default_case_spec(c);
        for (auto [e, v] : a.edges()) {
            CHECK(v >= spec.alpha_lo);
            CHECK(v <= spec.alpha_hi);
        }
    }
    CHECK_THROWS_AS(default_case_spec(7), ConfigError);
}

TEST_CASE("faithfulness violation ties exactly two constants")
{
    const SummaryGraph g = paper_case(1, 4);
    const SummaryGraph t = apply_faithfulness_violation(g, 8);
    int changed = 0;
    for (auto [e, v] : g.edges())
        changed += t.excite(e.first, e.second) != v;
    CHECK(changed == 1);
}

TEST_CASE("Hawkes event rate matches the stationary intensity")
{
    SummaryGraph g(1, 0, 1.0, 0.5);
    g.add_edge(0, 0, 0.5);
    const double horizon = 40000.0;
    const EventData e = simulate_hawkes(g, horizon, 17);
    const double rate = e.times[0].size() / horizon;
    CHECK(rate == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::is_sorted(e.times[0].begin(), e.times[0].end()));
    CHECK(e.times[0].back() <= horizon);
}

TEST_CASE("events file round-trips")
{
    EventData e;
    e.horizon = 5.0;
    e.times = {{0.5, 1.25}, {}, {3.0}};
    std::stringstream ss;
    write_events(ss, e);
    const EventData back = read_events(ss, 3, 5.0);
    CHECK(back.times == e.times);
    std::stringstream bad("subprocess_id,timestamp\n0,abc\n");
    CHECK_THROWS_AS(read_events(bad), InputError);
}

TEST_CASE("INAR without edges is i.i.d. Poisson")
{
    SummaryGraph g(2, 0, 1.0, 1.0);
    const int T = 50000;
    const DiscretePanel d = generate_inar(g, 0.1, T, 3, 5);
    for (int c = 0; c < 2; ++c) {
        const double mean = d.values.col(c).mean();
        CHECK(std::abs(mean - 0.1) < 3 * std::sqrt(0.1 / T));
    }
    CHECK((d.values.array() >= 0).all());
    CHECK((d.values.array() == d.values.array().round()).all());
}

TEST_CASE("INAR self-loop mean reaches the geometric fixed point")
{
    SummaryGraph g(1, 0, 1.0, 1.0);
    g.add_edge(0, 0, 0.6);
    const double delta = 0.5;
    const int k = default_k_max(g, delta);
    const ThetaCoeffs th = theta_coeffs(g, delta, k);
    const double target = th.theta0(0) / (1.0 - th.total()(0, 0));
    const DiscretePanel d = generate_inar(g, delta, 200000, k, 6);
    CHECK(d.values.col(0).mean() == doctest::Approx(target).epsilon(0.03));
}

TEST_CASE("Gaussian white noise has no lag-one autocorrelation")
{
    SummaryGraph g(1, 0);
    const int T = 40000;
    const DiscretePanel d = generate_linear_gaussian(g, 0.1, T, 2, 1.0, 3);
    const Eigen::VectorXd x = d.values.col(0).array() - d.values.col(0).mean();
    const double r1 = x.head(T - 1).dot(x.tail(T - 1)) / x.squaredNorm();
    CHECK(std::abs(r1) < 3.0 / std::sqrt(T));
}

TEST_CASE("Gaussian autocovariance matches the population model")
{
    SummaryGraph g(1, 0, 1.0, 0.2);
    g.add_edge(0, 0, 0.7);
    const double delta = 0.5;
    const int k = default_k_max(g, delta);
    const PopulationModel pm = population_model(g, delta, k, 2, NoiseModel::Gaussian, 1.0);
    const DiscretePanel d = generate_linear_gaussian(g, delta, 100000, k, 1.0, 12);
    const WindowCovariance w = WindowCovariance::from_panel(panel_from_matrix(d.values, delta), 2);
    for (int h = 0; h <= 2; ++h)
        CHECK(w.block({{0, 0}}, {{0, h}})(0, 0) == doctest::Approx(pm.autocov[h](0, 0)).epsilon(0.05));
}

TEST_CASE("default lag count captures the kernel mass")
{
    SummaryGraph g(1, 0, 1.0);
    g.add_edge(0, 0, 0.5);
    const int k = default_k_max(g, 0.1, 1e-6);
    const ThetaCoeffs th = theta_coeffs(g, 0.1, k);
    CHECK(th.total()(0, 0) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(theta_coeffs(g, 0.1, k - 1).total()(0, 0) < 0.5 * (1 - 1e-6));
}
