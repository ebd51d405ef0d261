#include "hawkrank/binning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace hawkrank {

namespace {

// two-sided standard normal quantile via bisection on erfc
double normal_upper_quantile(double p)
{
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double tail = 0.5 * std::erfc(mid / std::sqrt(2.0));
        if (tail > p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

BinnedPanel bin_events(const EventData& e, double delta, const std::vector<int>& keep)
{
    if (!(delta > 0.0))
        throw ConfigError("bin width must be positive");
    std::vector<int> cols = keep;
    if (cols.empty())
        for (int i = 0; i < e.dims(); ++i)
            cols.push_back(i);
    const auto T = static_cast<Eigen::Index>(std::floor(e.horizon / delta + 1e-9));
    BinnedPanel p;
    p.delta = delta;
    p.ids = cols;
    p.counts = Eigen::MatrixXd::Zero(T, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c] < 0 || cols[c] >= e.dims())
            throw InputError("no subprocess " + std::to_string(cols[c]) + " in events");
        for (double t : e.times[cols[c]]) {
            // bin n covers ((n-1) delta, n delta]; stored at row n-1
            auto n = static_cast<Eigen::Index>(std::ceil(t / delta - 1e-12));
            if (n < 1)
                n = 1;
            if (n <= T)
                p.counts(n - 1, static_cast<Eigen::Index>(c)) += 1.0;
        }
    }
    return p;
}

BinnedPanel panel_from_matrix(const Eigen::MatrixXd& values, double delta, const std::vector<int>& ids)
{
    BinnedPanel p;
    p.counts = values;
    p.delta = delta;
    p.ids = ids;
    if (p.ids.empty())
        for (int i = 0; i < values.cols(); ++i)
            p.ids.push_back(i);
    if (static_cast<Eigen::Index>(p.ids.size()) != values.cols())
        throw ConfigError("column id count does not match panel width");
    return p;
}

BinnedPanel standardize(const BinnedPanel& p)
{
    BinnedPanel out = p;
    const auto n = static_cast<double>(p.rows());
    if (p.rows() < 2)
        throw InputError("need at least two rows to standardize");
    out.means = p.counts.colwise().mean().transpose();
    out.sds.resize(p.cols());
    for (int c = 0; c < p.cols(); ++c) {
        double var = (p.counts.col(c).array() - out.means(c)).square().sum() / (n - 1.0);
        if (!(var > 0.0))
            throw InputError("subprocess " + std::to_string(p.ids[c]) + " has zero variance");
        out.sds(c) = std::sqrt(var);
        out.counts.col(c) = (p.counts.col(c).array() - out.means(c)) / out.sds(c);
    }
    out.standardized = true;
    return out;
}

int noise_limited_lags(long n, int p, double tau, int cap)
{
    if (n < 1 || p < 1 || !(tau > 0.0) || cap < 1)
        throw ConfigError("noise_limited_lags needs n, p, tau and cap positive");
    const double budget = static_cast<double>(n) * tau * tau / 4.0 / p;
    const int m = static_cast<int>(std::floor(budget)) - 1;
    return std::clamp(m, 1, cap);
}

LagEstimate estimate_effective_lags(const BinnedPanel& p, int k_cap, double alpha_sig)
{
    const int T = p.rows();
    const int d = p.cols();
    if (k_cap < 1 || k_cap * 10 >= T)
        throw ConfigError("k_cap must satisfy 1 <= k_cap < T/10");
    Eigen::MatrixXd x = p.counts.rowwise() - p.counts.colwise().mean();
    LagEstimate est;
    est.max_abs_corr = Eigen::VectorXd::Zero(k_cap);
    const double z = normal_upper_quantile(alpha_sig / (2.0 * d * d));
    int best = 1;
    for (int k = 1; k <= k_cap; ++k) {
        const int n = T - k;
        // Fisher z: atanh(r) ~ N(0, 1/(n-3)) under independence
        const double rcrit = std::tanh(z / std::sqrt(static_cast<double>(n - 3)));
        if (k == 1)
            est.threshold = rcrit;
        auto cur = x.bottomRows(n);
        auto past = x.topRows(n);
        double mx = 0.0;
        for (int i = 0; i < d; ++i) {
            Eigen::ArrayXd ci = cur.col(i).array() - cur.col(i).mean();
            double si = std::sqrt(ci.square().sum());
            for (int j = 0; j < d; ++j) {
                Eigen::ArrayXd cj = past.col(j).array() - past.col(j).mean();
                double sj = std::sqrt(cj.square().sum());
                if (si > 0.0 && sj > 0.0)
                    mx = std::max(mx, std::abs((ci * cj).sum()) / (si * sj));
            }
        }
        est.max_abs_corr(k - 1) = mx;
        if (mx > rcrit)
            best = k;
    }
    est.k_eff = best;
    return est;
}

Eigen::MatrixXd lag_matrix(const BinnedPanel& p, const VarSet& spec, int m)
{
    const int T = p.rows();
    if (m < 0 || T <= m)
        throw ConfigError("lag budget must satisfy 0 <= m < T");
    Eigen::MatrixXd out(T - m, static_cast<Eigen::Index>(spec.size()));
    for (std::size_t c = 0; c < spec.size(); ++c) {
        const Var& v = spec[c];
        if (v.lag < 0 || v.lag > m)
            throw ConfigError("lag " + std::to_string(v.lag) + " outside budget " + std::to_string(m));
        if (v.node < 0 || v.node >= p.cols())
            throw ConfigError("column " + std::to_string(v.node) + " not in panel");
        out.col(static_cast<Eigen::Index>(c)) = p.counts.col(v.node).segment(m - v.lag, T - m);
    }
    return out;
}

void write_binned(const std::string& csv_path, const std::string& meta_path, const BinnedPanel& p)
{
    std::ofstream os(csv_path);
    if (!os)
        throw InputError("cannot write " + csv_path);
    std::vector<std::string> header;
    for (int id : p.ids)
        header.push_back(std::to_string(id));
    write_panel(os, p.counts, header);

    std::ofstream ms(meta_path);
    if (!ms)
        throw InputError("cannot write " + meta_path);
    ms << std::setprecision(17);
    ms << "delta=" << p.delta << "\n";
    ms << "rows=" << p.rows() << "\n";
    ms << "standardized=" << (p.standardized ? 1 : 0) << "\n";
    if (p.standardized) {
        for (int c = 0; c < p.cols(); ++c) {
            ms << "mean." << p.ids[c] << "=" << p.means(c) << "\n";
            ms << "sd." << p.ids[c] << "=" << p.sds(c) << "\n";
        }
    }
}

BinnedPanel read_binned(const std::string& csv_path, const std::string& meta_path)
{
    std::ifstream is(csv_path);
    if (!is)
        throw InputError("cannot read " + csv_path);
    std::string line;
    if (!std::getline(is, line))
        throw InputError(csv_path + ": empty panel");
    BinnedPanel p;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ','))
            try {
                p.ids.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw InputError(csv_path + ": header must list integer subprocess ids");
            }
    }
    std::vector<double> vals;
    int rows = 0, ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string tok;
        std::size_t n = 0;
        while (std::getline(ss, tok, ',')) {
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw InputError(csv_path + " line " + std::to_string(ln) + ": bad value '" + tok + "'");
            }
            ++n;
        }
        if (n != p.ids.size())
            throw InputError(csv_path + " line " + std::to_string(ln) + ": wrong column count");
        ++rows;
    }
    p.counts = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        vals.data(), rows, static_cast<Eigen::Index>(p.ids.size()));
    if (!meta_path.empty()) {
        std::ifstream ms(meta_path);
        if (!ms)
            throw InputError("cannot read " + meta_path);
        std::map<std::string, std::string> kv;
        while (std::getline(ms, line)) {
            auto eq = line.find('=');
            if (eq != std::string::npos)
                kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
        if (kv.count("delta"))
            p.delta = std::stod(kv["delta"]);
        p.standardized = kv.count("standardized") && kv["standardized"] == "1";
    }
    return p;
}

}  // namespace hawkrank
