#include "hawkrank/binning.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace hawkrank;

TEST_CASE("bins are left-open and right-closed")
{
    EventData e;
    e.horizon = 1.0;
    e.times = {{0.05, 0.1, 0.1000001, 0.95}, {0.5}};
    const BinnedPanel p = bin_events(e, 0.1);
    REQUIRE(p.rows() == 10);
    CHECK(p.counts(0, 0) == 2);
    CHECK(p.counts(1, 0) == 1);
    CHECK(p.counts(9, 0) == 1);
    CHECK(p.counts(4, 1) == 1);
    CHECK(p.counts.sum() == 5);
}

TEST_CASE("keep selects and orders columns")
{
    EventData e;
    e.horizon = 1.0;
    e.times = {{0.1}, {0.2, 0.3}, {}};
    const BinnedPanel p = bin_events(e, 0.5, {1, 0});
    CHECK(p.cols() == 2);
    CHECK(p.ids == std::vector<int>{1, 0});
    CHECK(p.counts.col(0).sum() == 2);
}

TEST_CASE("standardize gives zero mean and unit variance")
{
    Eigen::MatrixXd x(5, 2);
    x << 1, 0, 2, 0, 3, 1, 4, 0, 5, 1;
    const BinnedPanel z = standardize(panel_from_matrix(x, 0.1));
    CHECK(z.standardized);
    for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(z.counts.col(c).mean()) < 1e-12);
        const Eigen::VectorXd d = z.counts.col(c).array() - z.counts.col(c).mean();
        CHECK(d.squaredNorm() / 4 == doctest::Approx(1.0));
    }
    Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(5, 1);
    CHECK_THROWS_AS(standardize(panel_from_matrix(flat, 0.1)), InputError);
}

TEST_CASE("noise-limited window")
{
    // sqrt(p (m+1) / n) <= tau / 2  <=>  m + 1 <= n tau^2 / (4 p)
    CHECK(noise_limited_lags(80000, 3, 0.1, 600) == 65);
    CHECK(noise_limited_lags(80000, 3, 0.1, 10) == 10);
    CHECK(noise_limited_lags(100, 3, 0.1, 600) == 1);
    CHECK_THROWS_AS(noise_limited_lags(0, 3, 0.1, 10), ConfigError);
    CHECK_THROWS_AS(noise_limited_lags(100, 3, 0.0, 10), ConfigError);
}

TEST_CASE("effective lags detect a long memory")
{
    const int T = 20000;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(T, 1);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    for (int t = 0; t < T; ++t)
        x(t, 0) = z(rng) + (t >= 5 ? 0.7 * x(t - 5, 0) : 0.0);
    const LagEstimate est = estimate_effective_lags(panel_from_matrix(x, 0.1), 30);
    CHECK(est.k_eff >= 5);
    CHECK_THROWS_AS(estimate_effective_lags(panel_from_matrix(x.topRows(100), 0.1), 30), ConfigError);
}

TEST_CASE("panel files round-trip")
{
    const auto dir = std::filesystem::temp_directory_path() / "hawkrank_binning_test";
    std::filesystem::create_directories(dir);
    Eigen::MatrixXd x(3, 2);
    x << 0, 1, 2, 3, 4, 5;
    const BinnedPanel p = panel_from_matrix(x, 0.25, {3, 7});
    const std::string csv = (dir / "p.csv").string(), meta = (dir / "p.meta").string();
    write_binned(csv, meta, p);
    const BinnedPanel back = read_binned(csv, meta);
    CHECK(back.counts == p.counts);
    CHECK(back.ids == p.ids);
    CHECK(back.delta == 0.25);
    std::filesystem::remove_all(dir);
}
