#include "hawkrank/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace hawkrank {

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::size_t EventData::total() const
{
    std::size_t n = 0;
    for (const auto& t : times)
        n += t.size();
    return n;
}

void write_events(std::ostream& os, const EventData& e)
{
    // merged by time so the file reads as one stream
    std::vector<std::pair<double, int>> all;
    all.reserve(e.total());
    for (int i = 0; i < e.dims(); ++i)
        for (double t : e.times[i])
            all.push_back({t, i});
    std::sort(all.begin(), all.end());
    os << "subprocess_id,timestamp\n" << std::setprecision(17);
    for (const auto& [t, i] : all)
        os << i << "," << t << "\n";
}

EventData read_events(std::istream& is, int dims, double horizon)
{
    EventData e;
    std::string line;
    int ln = 0;
    double last = 0.0;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty() || line.rfind("subprocess_id", 0) == 0)
            continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw InputError("events line " + std::to_string(ln) + ": expected subprocess_id,timestamp");
        int id = 0;
        double t = 0.0;
        try {
            id = std::stoi(line.substr(0, comma));
            t = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw InputError("events line " + std::to_string(ln) + ": cannot parse '" + line + "'");
        }
        if (id < 0 || !std::isfinite(t) || t < 0.0)
            throw InputError("events line " + std::to_string(ln) + ": invalid id or timestamp");
        if (id >= static_cast<int>(e.times.size()))
            e.times.resize(id + 1);
        e.times[id].push_back(t);
        last = std::max(last, t);
    }
    if (dims >= 0) {
        if (static_cast<int>(e.times.size()) > dims)
            throw InputError("events reference more subprocesses than declared");
        e.times.resize(dims);
    }
    for (auto& t : e.times)
        std::sort(t.begin(), t.end());
    e.horizon = horizon > 0.0 ? horizon : last;
    return e;
}

EventData simulate_hawkes(const SummaryGraph& g, double horizon, std::uint64_t seed)
{
    if (!(horizon > 0.0))
        throw ConfigError("horizon must be positive");
    if (!assert_stationary(g))
        throw ConfigError("graph is not stationary");
    const int l = g.size();
    const double beta = g.decay().beta;

    // a(i, j): influence of j on i
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(l, l);
    for (const auto& [key, v] : g.edges())
        a(key.second, key.first) = v;
    Eigen::VectorXd mu(l);
    for (int i = 0; i < l; ++i)
        mu(i) = g.mu(i);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    EventData out;
    out.horizon = horizon;
    out.times.assign(l, {});

    // state(j) = sum over past j-events of exp(-beta (t - t_k)), stored at `last`
    Eigen::VectorXd state = Eigen::VectorXd::Zero(l);
    Eigen::VectorXd lambda = mu;
    double t = 0.0;
    double last = 0.0;
    for (;;) {
        const double bound = lambda.sum();
        if (!(bound > 0.0))
            break;
        t += -std::log1p(-unif(rng)) / bound;
        if (t > horizon)
            break;
        state *= std::exp(-beta * (t - last));
        last = t;
        lambda = mu + a * state;
        const double total = lambda.sum();
        const double u = unif(rng) * bound;
        if (u > total)
            continue;
        // pick the subprocess whose cumulative intensity covers u
        double acc = 0.0;
        int hit = l - 1;
        for (int i = 0; i < l; ++i) {
            acc += lambda(i);
            if (u <= acc) {
                hit = i;
                break;
            }
        }
        out.times[hit].push_back(t);
        state(hit) += 1.0;
        lambda += a.col(hit);
    }
    return out;
}

Eigen::MatrixXd ThetaCoeffs::total() const
{
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dims(), dims());
    for (const auto& th : theta)
        s += th;
    return s;
}

ThetaCoeffs theta_coeffs(const SummaryGraph& g, double delta, int k_max)
{
    if (!(delta > 0.0) || k_max < 1)
        throw ConfigError("theta_coeffs needs delta > 0 and k_max >= 1");
    const int l = g.size();
    ThetaCoeffs out;
    out.theta0.resize(l);
    for (int i = 0; i < l; ++i)
        out.theta0(i) = delta * g.mu(i);
    out.theta.assign(k_max, Eigen::MatrixXd::Zero(l, l));
    for (int k = 1; k <= k_max; ++k) {
        const double w = g.decay().mass((k - 1) * delta, k * delta);
        for (const auto& [key, a] : g.edges())
            out.theta[k - 1](key.second, key.first) = a * w;
    }
    return out;
}

int default_k_max(const SummaryGraph& g, double delta, double rel_tail)
{
    // tail beyond k bins is exp(-beta k delta) of the integrated mass
    return std::max(1, static_cast<int>(std::ceil(-std::log(rel_tail) / (g.decay().beta * delta))));
}

int burn_in_bins(int k_max) { return std::max(5 * k_max, 1000); }

namespace {

template <typename Draw>
DiscretePanel run_var(const ThetaCoeffs& th, int T, Draw&& draw)
{
    if (T < 1)
        throw ConfigError("panel length must be at least one bin");
    const int l = th.dims();
    const int K = th.k_max();
    if (spectral_radius(th.total()) >= 1.0)
        throw ConfigError("coefficients are not subcritical");
    const int burn = burn_in_bins(K);
    const int total = burn + T;
    // ring buffer of the last K rows; X^(0) = 0
    Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(l, K);
    DiscretePanel out;
    out.values.resize(T, l);
    Eigen::VectorXd mean(l);
    for (int n = 0; n < total; ++n) {
        mean = th.theta0;
        for (int k = 1; k <= K; ++k) {
            int slot = ((n - k) % K + K) % K;
            mean.noalias() += th.theta[k - 1] * hist.col(slot);
        }
        Eigen::VectorXd x = draw(mean);
        hist.col(n % K) = x;
        if (n >= burn)
            out.values.row(n - burn) = x.transpose();
    }
    return out;
}

}  // namespace

DiscretePanel generate_inar(const ThetaCoeffs& th, double delta, int T, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto draw = [&](const Eigen::VectorXd& mean) {
        Eigen::VectorXd x(mean.size());
        for (int i = 0; i < mean.size(); ++i) {
            // a sum of independent Poisson thinnings is Poisson in the summed rate
            x(i) = mean(i) > 0.0 ? static_cast<double>(std::poisson_distribution<long>(mean(i))(rng)) : 0.0;
        }
        return x;
    };
    DiscretePanel p = run_var(th, T, draw);
    p.delta = delta;
    p.noise = NoiseModel::PoissonINAR;
    return p;
}

DiscretePanel generate_inar(const SummaryGraph& g, double delta, int T, int k_max, std::uint64_t seed)
{
    if (!assert_stationary(g))
        throw ConfigError("graph is not stationary");
    return generate_inar(theta_coeffs(g, delta, k_max), delta, T, seed);
}

DiscretePanel generate_linear_gaussian(const ThetaCoeffs& th, double delta, int T, double sigma,
                                       std::uint64_t seed)
{
    if (!(sigma > 0.0))
        throw ConfigError("sigma must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    auto draw = [&](const Eigen::VectorXd& mean) {
        Eigen::VectorXd x(mean.size());
        for (int i = 0; i < mean.size(); ++i)
            x(i) = mean(i) + gauss(rng);
        return x;
    };
    DiscretePanel p = run_var(th, T, draw);
    p.delta = delta;
    p.noise = NoiseModel::Gaussian;
    p.sigma = sigma;
    return p;
}

DiscretePanel generate_linear_gaussian(const SummaryGraph& g, double delta, int T, int k_max, double sigma,
                                       std::uint64_t seed)
{
    if (!assert_stationary(g))
        throw ConfigError("graph is not stationary");
    return generate_linear_gaussian(theta_coeffs(g, delta, k_max), delta, T, sigma, seed);
}

void write_panel(std::ostream& os, const Eigen::MatrixXd& values, const std::vector<std::string>& header)
{
    for (std::size_t c = 0; c < header.size(); ++c)
        os << (c ? "," : "") << header[c];
    os << "\n" << std::setprecision(17);
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c)
            os << (c ? "," : "") << values(r, c);
        os << "\n";
    }
}

CaseSpec default_case_spec(int case_id)
{
    if (case_id < 1 || case_id > 6)
        throw ConfigError("case id must be in 1..6");
    CaseSpec s;
    s.case_id = case_id;
    if (case_id == 1) {
        s.alpha_lo = 0.4;
        s.alpha_hi = 0.8;
    } else {
        s.alpha_lo = 0.8;
        s.alpha_hi = 0.99;
    }
    SummaryGraph g = case_topology(case_id);
    for (int i = g.num_observed(); i < g.size(); ++i)
        s.hidden.push_back(i);
    return s;
}

SummaryGraph case_topology(int case_id)
{
    switch (case_id) {
    case 1: {
        // N1 <- N2 <-> N3, self-excitation everywhere
        SummaryGraph g(3, 0);
        g.add_edge(1, 0, 1);
        g.add_edge(1, 2, 1);
        g.add_edge(2, 1, 1);
        for (int i = 0; i < 3; ++i)
            g.add_edge(i, i, 1);
        return g;
    }
    case 2: {
        // O1 <- L1 -> O2, O1 -> O3, O2 -> O4
        SummaryGraph g(4, 1);
        const int L1 = 4;
        g.add_edge(L1, 0, 1);
        g.add_edge(L1, 1, 1);
        g.add_edge(0, 2, 1);
        g.add_edge(1, 3, 1);
        g.add_edge(2, 2, 1);
        g.add_edge(3, 3, 1);
        return g;
    }
    case 3: {
        // case 2 plus O5 -> L1
        SummaryGraph g(5, 1);
        const int L1 = 5;
        g.add_edge(L1, 0, 1);
        g.add_edge(L1, 1, 1);
        g.add_edge(0, 2, 1);
        g.add_edge(1, 3, 1);
        g.add_edge(2, 2, 1);
        g.add_edge(3, 3, 1);
        g.add_edge(4, L1, 1);
        g.add_edge(4, 4, 1);
        return g;
    }
    case 4: {
        // L1 -> {O1, O2, O4}, O3 -> O4
        SummaryGraph g(4, 1);
        const int L1 = 4;
        g.add_edge(L1, 0, 1);
        g.add_edge(L1, 1, 1);
        g.add_edge(L1, 3, 1);
        g.add_edge(2, 3, 1);
        g.add_edge(2, 2, 1);
        return g;
    }
    case 5: {
        // L1 -> {O1, O2}, L1 -> L2, L2 -> {O3, O4}
        SummaryGraph g(4, 2);
        const int L1 = 4, L2 = 5;
        g.add_edge(L1, 0, 1);
        g.add_edge(L1, 1, 1);
        g.add_edge(L1, L2, 1);
        g.add_edge(L2, 2, 1);
        g.add_edge(L2, 3, 1);
        return g;
    }
    case 6: {
        // L1 -> {L2, L3}, L2 -> {O1, O2}, L3 -> {O3, O4}
        SummaryGraph g(4, 3);
        const int L1 = 4, L2 = 5, L3 = 6;
        g.add_edge(L1, L2, 1);
        g.add_edge(L1, L3, 1);
        g.add_edge(L2, 0, 1);
        g.add_edge(L2, 1, 1);
        g.add_edge(L3, 2, 1);
        g.add_edge(L3, 3, 1);
        return g;
    }
    default:
        throw ConfigError("case id must be in 1..6");
    }
}

SummaryGraph named_topology(NamedGraph which)
{
    switch (which) {
    case NamedGraph::IntermediatePair: {
        SummaryGraph g(4, 3);
        const int L1 = 4, L2 = 5, L3 = 6;
        g.add_edge(L1, L2, 1);
        g.add_edge(L1, L3, 1);
        g.add_edge(L2, 0, 1);
        g.add_edge(L3, 1, 1);
        g.add_edge(0, 2, 1);
        g.add_edge(1, 3, 1);
        g.add_edge(2, 2, 1);
        g.add_edge(3, 3, 1);
        return g;
    }
    case NamedGraph::IntermediatePairMinusL3: {
        SummaryGraph g(4, 2);
        const int L1 = 4, L2 = 5;
        g.add_edge(L1, L2, 1);
        g.add_edge(L2, 0, 1);
        g.add_edge(L1, 1, 1);
        g.add_edge(0, 2, 1);
        g.add_edge(1, 3, 1);
        g.add_edge(2, 2, 1);
        g.add_edge(3, 3, 1);
        return g;
    }
    case NamedGraph::RelayChain:
        return relay_chain(1);
    }
    throw ConfigError("unknown named graph");
}

SummaryGraph relay_chain(int h)
{
    if (h < 0)
        throw ConfigError("relay chain length must be non-negative");
    SummaryGraph g(2, h);
    g.add_edge(1, 1, 1);
    int prev = 1;
    for (int k = 0; k < h; ++k) {
        g.add_edge(prev, 2 + k, 1);
        prev = 2 + k;
    }
    g.add_edge(prev, 0, 1);
    return g;
}

SummaryGraph sample_constants(const SummaryGraph& topology, double lo, double hi, std::uint64_t seed,
                              int max_attempts)
{
    if (!(lo > 0.0) || hi < lo)
        throw ConfigError("invalid constant range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, hi);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        SummaryGraph g = topology;
        for (const auto& [key, a] : topology.edges())
            g.set_excite(key.first, key.second, unif(rng));
        if (assert_stationary(g))
            return g;
    }
    throw ConfigError("no stationary draw after " + std::to_string(max_attempts) + " attempts");
}

SummaryGraph paper_case(const CaseSpec& spec, std::uint64_t seed)
{
    SummaryGraph topo = case_topology(spec.case_id);
    topo.set_decay({spec.beta});
    for (int i = 0; i < topo.size(); ++i)
        topo.set_mu(i, spec.mu);
    // about 4% of uniform case 1 draws are stationary, so allow many redraws
    return sample_constants(topo, spec.alpha_lo, spec.alpha_hi, seed, 10000);
}

SummaryGraph paper_case(int case_id, std::uint64_t seed, CaseSpec* spec_out)
{
    CaseSpec spec = default_case_spec(case_id);
    if (spec_out)
        *spec_out = spec;
    return paper_case(spec, seed);
}

SummaryGraph apply_faithfulness_violation(const SummaryGraph& g, std::uint64_t seed)
{
    const auto& edges = g.edges();
    if (edges.size() < 2)
        throw ConfigError("need at least two edges to tie constants");
    std::vector<SummaryGraph::EdgeKey> keys;
    for (const auto& [key, a] : edges)
        keys.push_back(key);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
    std::size_t first = pick(rng);
    std::size_t second = first;
    while (second == first)
        second = pick(rng);
    SummaryGraph out = g;
    out.set_excite(keys[second].first, keys[second].second, g.excite(keys[first].first, keys[first].second));
    return out;
}

}  // namespace hawkrank
