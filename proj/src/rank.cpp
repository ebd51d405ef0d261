#include "hawkrank/rank.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hawkrank {

Eigen::VectorXd inar_noise_variance(const ThetaCoeffs& th)
{
    const int l = th.dims();
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(l, l) - th.total();
    Eigen::VectorXd mean = lhs.partialPivLu().solve(th.theta0);
    return mean.cwiseMax(0.0);
}

PopulationModel population_model(const ThetaCoeffs& th, const Eigen::VectorXd& noise_var, int m)
{
    const int l = th.dims();
    const int K = th.k_max();
    if (m < 0)
        throw ConfigError("lag budget must be non-negative");
    if (noise_var.size() != l)
        throw ConfigError("noise variance length mismatch");

    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(l * K, l * K);
    for (int k = 0; k < K; ++k)
        f.block(0, k * l, l, l) = th.theta[k];
    if (K > 1)
        f.block(l, 0, l * (K - 1), l * (K - 1)).setIdentity();
    if (spectral_radius(f) >= 1.0)
        throw NumericalError("companion matrix is not stable");
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(l * K, l * K);
    q.topLeftCorner(l, l) = noise_var.asDiagonal();

    Eigen::MatrixXd s;
    try {
        s = stationary_covariance(f, q);
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }

    PopulationModel out;
    out.theta = th;
    out.noise_var = noise_var;
    out.m = m;
    out.autocov.resize(m + 1);
    for (int h = 0; h <= m; ++h) {
        if (h < K) {
            out.autocov[h] = s.block(0, h * l, l, l);
        } else {
            Eigen::MatrixXd g = Eigen::MatrixXd::Zero(l, l);
            for (int k = 1; k <= K; ++k)
                g += th.theta[k - 1] * out.autocov[h - k];
            out.autocov[h] = g;
        }
    }
    return out;
}

PopulationModel population_model(const SummaryGraph& g, double delta, int k_max, int m, NoiseModel noise,
                                 double sigma)
{
    ThetaCoeffs th = theta_coeffs(g, delta, k_max);
    Eigen::VectorXd nv = noise == NoiseModel::PoissonINAR ? inar_noise_variance(th)
                                                          : Eigen::VectorXd::Constant(g.size(), sigma * sigma);
    return population_model(th, nv, m);
}

bool WindowCovariance::covers(const Var& v) const
{
    return pos_.count(v.node) && v.lag >= 0 && v.lag <= m_;
}

int WindowCovariance::index(const Var& v) const
{
    auto it = pos_.find(v.node);
    if (it == pos_.end() || v.lag < 0 || v.lag > m_)
        throw ConfigError("variable (" + std::to_string(v.node) + "," + std::to_string(v.lag) +
                          ") outside the covariance window");
    return it->second * (m_ + 1) + v.lag;
}

VarSet WindowCovariance::vars(const std::vector<int>& nodes, int lo, int hi) const
{
    VarSet out;
    for (int n : nodes)
        for (int k = lo; k <= hi; ++k)
            out.push_back({n, k});
    return out;
}

Eigen::MatrixXd WindowCovariance::block(const VarSet& a, const VarSet& b) const
{
    std::vector<int> ia, ib;
    for (const auto& v : a)
        ia.push_back(index(v));
    for (const auto& v : b)
        ib.push_back(index(v));
    return sigma_(ia, ib);
}

const Eigen::MatrixXd& WindowCovariance::precision() const
{
    if (!precision_) {
        auto llt = regularized_llt(sigma_);
        auto p = std::make_shared<Eigen::MatrixXd>(llt.solve(Eigen::MatrixXd::Identity(sigma_.rows(), sigma_.cols())));
        precision_ = p;
    }
    return *precision_;
}

WindowCovariance WindowCovariance::from_population(const PopulationModel& model, const std::vector<int>& nodes)
{
    WindowCovariance w;
    w.nodes_ = nodes;
    w.m_ = model.m;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] < 0 || nodes[i] >= model.dims())
            throw ConfigError("node outside population model");
        w.pos_[nodes[i]] = static_cast<int>(i);
    }
    const int step = w.m_ + 1;
    const int n = static_cast<int>(nodes.size()) * step;
    w.sigma_.resize(n, n);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int a = 0; a <= w.m_; ++a)
            for (std::size_t j = 0; j < nodes.size(); ++j)
                for (int b = 0; b <= w.m_; ++b)
                    w.sigma_(static_cast<int>(i) * step + a, static_cast<int>(j) * step + b) =
                        model.cov(nodes[i], a, nodes[j], b);
    w.sigma_ = 0.5 * (w.sigma_ + w.sigma_.transpose()).eval();
    return w;
}

WindowCovariance WindowCovariance::from_panel(const BinnedPanel& panel, int m)
{
    const int T = panel.rows();
    const int p = panel.cols();
    if (m < 0 || T - m < 2)
        throw ConfigError("panel too short for lag budget " + std::to_string(m));
    WindowCovariance w;
    w.nodes_ = panel.ids;
    w.m_ = m;
    for (int c = 0; c < p; ++c)
        w.pos_[panel.ids[c]] = c;
    const int step = m + 1;
    const long n = T - m;
    w.n_samples_ = n;
    w.sigma_.resize(p * step, p * step);

    // center globally first to keep the raw cross sums well conditioned
    Eigen::MatrixXd x = panel.counts.rowwise() - panel.counts.colwise().mean();

    // prefix sums give the aligned mean of column c at lag a: rows m-a .. T-1-a
    Eigen::MatrixXd csum(T + 1, p);
    csum.row(0).setZero();
    for (int t = 0; t < T; ++t)
        csum.row(t + 1) = csum.row(t) + x.row(t);
    Eigen::MatrixXd mean(p, step);
    for (int c = 0; c < p; ++c)
        for (int a = 0; a <= m; ++a)
            mean(c, a) = (csum(T - a, c) - csum(m - a, c)) / static_cast<double>(n);

    std::vector<double> prefix(T + 1);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            for (int d = -m; d <= m; ++d) {
                // y[s] = x_i[s] x_j[s - d]; entry (i,a),(j,a+d) sums s over [m-a, T-1-a]
                prefix[0] = 0.0;
                for (int s = 0; s < T; ++s) {
                    const int u = s - d;
                    const double y = (u >= 0 && u < T) ? x(s, i) * x(u, j) : 0.0;
                    prefix[s + 1] = prefix[s] + y;
                }
                const int a_lo = std::max(0, -d);
                const int a_hi = std::min(m, m - d);
                for (int a = a_lo; a <= a_hi; ++a) {
                    const int b = a + d;
                    const double raw = prefix[T - a] - prefix[m - a];
                    const double c = (raw - static_cast<double>(n) * mean(i, a) * mean(j, b)) /
                                     static_cast<double>(n - 1);
                    w.sigma_(i * step + a, j * step + b) = c;
                }
            }
        }
    }
    w.sigma_ = 0.5 * (w.sigma_ + w.sigma_.transpose()).eval();
    return w;
}

Eigen::MatrixXd sample_cross_cov(const BinnedPanel& p, const VarSet& a, const VarSet& b, int m)
{
    Eigen::MatrixXd xa = lag_matrix(p, a, m);
    Eigen::MatrixXd xb = lag_matrix(p, b, m);
    if (xa.rows() < static_cast<Eigen::Index>(a.size() + b.size() + 1))
        throw InputError("too few usable rows for the requested blocks");
    xa = xa.rowwise() - xa.colwise().mean();
    xb = xb.rowwise() - xb.colwise().mean();
    return xa.transpose() * xb / static_cast<double>(xa.rows() - 1);
}

Eigen::MatrixXd population_cross_cov(const PopulationModel& model, const VarSet& a, const VarSet& b)
{
    Eigen::MatrixXd out(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (a[i].lag > model.m || b[j].lag > model.m)
                throw ConfigError("lag beyond model budget");
            out(i, j) = model.cov(a[i].node, a[i].lag, b[j].node, b[j].lag);
        }
    return out;
}

namespace {

VarSet dedupe(const VarSet& v)
{
    VarSet out;
    std::set<Var> seen;
    for (const auto& x : v)
        if (seen.insert(x).second)
            out.push_back(x);
    return out;
}

// Cov(a | s) for disjoint a and s, picking the cheaper of a direct solve on
// the s block or the universe precision restricted to the complement of s.
Eigen::MatrixXd conditional_cov(const WindowCovariance& src, const VarSet& a, const VarSet& s)
{
    Eigen::MatrixXd saa = src.block(a, a);
    if (s.empty())
        return saa;
    const int u = src.universe_size();
    if (static_cast<int>(s.size()) <= u - static_cast<int>(s.size())) {
        Eigen::MatrixXd sas = src.block(a, s);
        auto llt = regularized_llt(src.block(s, s));
        return saa - sas * llt.solve(sas.transpose());
    }
    std::vector<char> in_s(u, 0);
    for (const auto& v : s)
        in_s[src.index(v)] = 1;
    std::vector<int> rest;
    for (int i = 0; i < u; ++i)
        if (!in_s[i])
            rest.push_back(i);
    std::vector<int> pick;
    for (const auto& v : a) {
        auto it = std::find(rest.begin(), rest.end(), src.index(v));
        pick.push_back(static_cast<int>(it - rest.begin()));
    }
    const Eigen::MatrixXd& omega = src.precision();
    Eigen::MatrixXd orr = omega(rest, rest);
    auto llt = regularized_llt(orr);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(rest.size(), pick.size());
    for (std::size_t k = 0; k < pick.size(); ++k)
        e(pick[k], static_cast<Eigen::Index>(k)) = 1.0;
    Eigen::MatrixXd cols = llt.solve(e);
    return cols(pick, Eigen::all);
}

}  // namespace

Eigen::VectorXd canonical_correlations(const WindowCovariance& src, const VarSet& a_in, const VarSet& b_in)
{
    const VarSet a = dedupe(a_in);
    const VarSet b = dedupe(b_in);
    const std::size_t k_total = std::min(a.size(), b.size());
    if (k_total == 0)
        return Eigen::VectorXd();

    if (src.population() || a.size() + b.size() <= 300) {
        return canonical_correlations(src.block(a, a), src.block(b, b), src.block(a, b));
    }

    std::set<Var> in_b(b.begin(), b.end());
    std::set<Var> in_a(a.begin(), a.end());
    VarSet shared, only_a, only_b;
    for (const auto& v : a)
        (in_b.count(v) ? shared : only_a).push_back(v);
    for (const auto& v : b)
        if (!in_a.count(v))
            only_b.push_back(v);

    Eigen::VectorXd rho = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k_total));
    rho.head(static_cast<Eigen::Index>(shared.size())).setOnes();
    const std::size_t k_partial = std::min(only_a.size(), only_b.size());
    if (k_partial == 0)
        return rho;

    // Cov(a|shared) - Cov(a|B) = Cov(a, b|shared) Cov(b|shared)^{-1} Cov(b, a|shared)
    Eigen::MatrixXd given_shared = conditional_cov(src, only_a, shared);
    Eigen::MatrixXd given_b = conditional_cov(src, only_a, b);
    Eigen::MatrixXd explained = given_shared - given_b;
    explained = 0.5 * (explained + explained.transpose()).eval();
    auto llt = regularized_llt(given_shared);
    Eigen::MatrixXd lhs = llt.matrixL().solve(explained);
    lhs = llt.matrixL().solve(lhs.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (lhs + lhs.transpose()), Eigen::EigenvaluesOnly);
    Eigen::VectorXd lam = es.eigenvalues().reverse();
    for (std::size_t k = 0; k < k_partial; ++k)
        rho(static_cast<Eigen::Index>(shared.size() + k)) = std::sqrt(std::clamp(lam(static_cast<Eigen::Index>(k)), 0.0, 1.0));
    return rho;
}

namespace {

// Regularized upper incomplete gamma Q(a, x): series below a + 1, continued
// fraction above.
double upper_gamma_q(double a, double x)
{
    if (x <= 0.0)
        return 1.0;
    const double log_front = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term;
        for (int k = 1; k < 100000; ++k) {
            term *= x / (a + k);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15)
                break;
        }
        return std::max(0.0, 1.0 - sum * std::exp(log_front));
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int k = 1; k < 100000; ++k) {
        const double an = -k * (k - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15)
            break;
    }
    return std::exp(log_front) * h;
}

int shared_count(const VarSet& a, const VarSet& b)
{
    std::set<Var> sa(a.begin(), a.end());
    std::set<Var> sb(b.begin(), b.end());
    int n = 0;
    for (const auto& v : sa)
        n += static_cast<int>(sb.count(v));
    return n;
}

// Smallest k >= shared whose Bartlett statistic on the partial problem is not
// rejected at level alpha.
int bartlett_rank(const Eigen::VectorXd& rho, int p, int q, int shared, long n, double alpha)
{
    const int len = static_cast<int>(rho.size());
    const int pp = p - shared, qq = q - shared;
    const double scale = static_cast<double>(n - shared) - 1.0 - 0.5 * (pp + qq + 1);
    for (int k = shared; k < len; ++k) {
        double stat = 0.0;
        for (int i = k; i < len; ++i)
            stat -= std::log(std::max(1e-300, 1.0 - rho(i) * rho(i)));
        stat *= std::max(scale, 1.0);
        const double df = static_cast<double>(pp - (k - shared)) * (qq - (k - shared));
        if (chi_square_sf(stat, df) >= alpha)
            return k;
    }
    return len;
}

}  // namespace

double chi_square_sf(double x, double df)
{
    if (df <= 0.0)
        throw ConfigError("chi-square degrees of freedom must be positive");
    return upper_gamma_q(0.5 * df, 0.5 * x);
}

RankTestResult rank_test(const WindowCovariance& src, const VarSet& a, const VarSet& b, int r, RankCriterion crit)
{
    if (a.empty() || b.empty())
        throw ConfigError("rank test needs non-empty blocks");
    RankTestResult res;
    res.rho = canonical_correlations(src, a, b);
    res.tau = src.population() ? kPopulationTol : crit.tau;
    res.n_samples = src.n_samples();
    res.hypothesis = r;
    const int len = static_cast<int>(res.rho.size());
    if (!src.population() && crit.rule == RankRule::Bartlett) {
        const VarSet da = dedupe(a), db = dedupe(b);
        res.estimated_rank = bartlett_rank(res.rho, static_cast<int>(da.size()), static_cast<int>(db.size()),
                                           shared_count(da, db), src.n_samples(), crit.tau);
        res.at_most = res.estimated_rank <= r;
        res.exact = res.estimated_rank == r;
        return res;
    }
    const double t = res.tau;
    for (Eigen::Index k = 0; k < res.rho.size(); ++k)
        if (res.rho(k) >= t)
            ++res.estimated_rank;
    res.at_most = res.estimated_rank <= r;
    bool upper = (r >= len) || res.rho(r) < t;
    bool lower = (r == 0) || (r <= len && res.rho(r - 1) >= t);
    res.exact = r <= len && upper && lower;
    return res;
}

void SurrogateRegistry::set(int latent, int surrogate, const std::set<int>& siblings)
{
    if (!is_observed(surrogate))
        throw ConfigError("surrogate must be observed");
    if (siblings.empty())
        throw ConfigError("a latent needs at least two observed effects");
    for (int s : siblings)
        if (!is_observed(s) || s == surrogate)
            throw ConfigError("siblings must be observed and distinct from the surrogate");
    surrogate_[latent] = surrogate;
    siblings_[latent] = siblings;
}

int SurrogateRegistry::surrogate(int node) const
{
    if (is_observed(node))
        return node;
    auto it = surrogate_.find(node);
    if (it == surrogate_.end())
        throw ConfigError("no surrogate registered for latent " + std::to_string(node));
    return it->second;
}

std::set<int> SurrogateRegistry::siblings_of(int node) const
{
    if (is_observed(node))
        return {};
    auto it = siblings_.find(node);
    if (it == siblings_.end())
        throw ConfigError("no siblings registered for latent " + std::to_string(node));
    return it->second;
}

std::set<int> SurrogateRegistry::effects(int node) const
{
    std::set<int> out = siblings_of(node);
    out.insert(surrogate(node));
    return out;
}

namespace {

VarSet observed_minus(const WindowCovariance& src, const std::vector<int>& observed, const std::set<Var>& drop)
{
    VarSet out;
    for (const auto& v : src.vars(observed, 0, src.m()))
        if (!drop.count(v))
            out.push_back(v);
    return out;
}

void append(VarSet& dst, const VarSet& src)
{
    for (const auto& v : src)
        if (std::find(dst.begin(), dst.end(), v) == dst.end())
            dst.push_back(v);
}

IdentTest finish(const WindowCovariance& src, VarSet a, VarSet b, int r, RankCriterion crit)
{
    IdentTest t;
    t.a = std::move(a);
    t.b = std::move(b);
    t.r = r;
    t.result = rank_test(src, t.a, t.b, r, crit);
    t.pass = t.result.exact;
    return t;
}

}  // namespace

IdentTest test_parent_cause_observed(const WindowCovariance& src, const std::vector<int>& candidate, int target,
                                     const std::vector<int>& observed, RankCriterion crit)
{
    const int m = src.m();
    VarSet a{{target, 0}};
    for (int j : candidate)
        append(a, src.vars({j}, 1, m));
    VarSet b = observed_minus(src, observed, {{target, 0}});
    return finish(src, a, b, static_cast<int>(a.size()) - 1, crit);
}

IdentTest test_latent_confounder_pair(const WindowCovariance& src, int n1, int n2, const SurrogateRegistry& reg,
                                      const std::vector<int>& observed, RankCriterion crit)
{
    const int m = src.m();
    const int d1 = reg.surrogate(n1);
    const int d2 = reg.surrogate(n2);
    if (d1 == d2) {
        IdentTest t;
        t.pass = false;
        return t;
    }
    VarSet a = src.vars({d1, d2}, 0, m);
    std::set<int> sib = reg.siblings_of(n1);
    for (int s : reg.siblings_of(n2))
        sib.insert(s);
    for (int s : sib)
        append(a, src.vars({s}, 0, m));
    VarSet b = observed_minus(src, observed, {{d1, 0}, {d2, 0}});
    return finish(src, a, b, static_cast<int>(a.size()) - 1, crit);
}

IdentTest test_parent_cause_latent(const WindowCovariance& src, const std::vector<int>& candidate, int target,
                                   const SurrogateRegistry& reg, const std::vector<int>& observed, RankCriterion crit,
                                   LatentRule rule)
{
    const int m = src.m();
    const int dt = reg.surrogate(target);
    VarSet a = src.vars({dt}, 0, m);
    std::set<Var> currents{{dt, 0}};
    std::set<int> sib = reg.siblings_of(target);
    for (int c : candidate) {
        if (reg.is_observed(c)) {
            append(a, src.vars({c}, 1, m));
        } else {
            const int dc = reg.surrogate(c);
            append(a, src.vars({dc}, 0, m));
            currents.insert({dc, 0});
            for (int s : reg.siblings_of(c))
                sib.insert(s);
        }
    }
    for (int s : sib)
        append(a, src.vars({s}, 0, m));
    VarSet b = observed_minus(src, observed, currents);
    IdentTest t = finish(src, a, b, static_cast<int>(a.size()) - 1, crit);
    if (rule == LatentRule::TargetRow && currents.size() > 1) {
        // the target current must add nothing beyond the other currents
        VarSet rest;
        for (const auto& v : t.a)
            if (!(v == Var{dt, 0}))
                rest.push_back(v);
        RankTestResult without = rank_test(src, rest, t.b, static_cast<int>(rest.size()) - 1, crit);
        t.pass = t.result.estimated_rank == without.estimated_rank && t.result.estimated_rank <= t.r;
    }
    return t;
}

int count_intermediate_latents(const WindowCovariance& src, int target, int parent,
                               const std::vector<int>& parent_set, const std::vector<int>& observed, RankCriterion crit)
{
    const int m = src.m();
    if (std::find(parent_set.begin(), parent_set.end(), parent) == parent_set.end())
        throw ConfigError("parent must belong to the inferred parent set");
    VarSet b = observed_minus(src, observed, {{target, 0}});
    int best = 0;
    for (int h = 1; h < m; ++h) {
        VarSet a{{target, 0}};
        for (int j : parent_set)
            for (int k = 1; k <= m; ++k)
                if (!(j == parent && k <= h))
                    append(a, {{j, k}});
        RankTestResult res = rank_test(src, a, b, static_cast<int>(a.size()) - 1, crit);
        if (!res.exact)
            break;
        best = h;
    }
    return best;
}

std::string describe(const VarSet& v)
{
    // FNV-1a over (node, lag) pairs, plus the size
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& x : v) {
        for (int val : {x.node, x.lag}) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(val));
            h *= 1099511628211ULL;
        }
    }
    std::ostringstream os;
    os << v.size() << ":" << std::hex << h;
    return os.str();
}

}  // namespace hawkrank
