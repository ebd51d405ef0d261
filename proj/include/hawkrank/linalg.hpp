#ifndef HAWKRANK_LINALG_HPP
#define HAWKRANK_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hawkrank {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Cholesky factor of a covariance block. A ridge of eps_rel * trace / dim is
// added only when the plain factorization fails or the pivots collapse.
template <typename Derived>
Eigen::LLT<Mat<typename Derived::Scalar>> regularized_llt(const Eigen::MatrixBase<Derived>& s,
                                                          typename Derived::Scalar eps_rel = 1e-8,
                                                          bool* ridged = nullptr)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = s.rows();
    Mat<Scalar> a = s;
    Eigen::LLT<Mat<Scalar>> llt(a);
    bool ok = llt.info() == Eigen::Success;
    if (ok && n > 0) {
        auto d = llt.matrixLLT().diagonal().cwiseAbs();
        ok = d.minCoeff() > Scalar(1e-7) * d.maxCoeff();
    }
    if (ridged)
        *ridged = !ok;
    if (!ok) {
        const Scalar ridge = eps_rel * std::max(a.trace() / Scalar(std::max<Eigen::Index>(n, 1)), Scalar(1e-300));
        a.diagonal().array() += ridge;
        llt.compute(a);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("covariance block is not positive definite after ridge repair");
    }
    return llt;
}

// Canonical correlations of two blocks given their covariances, descending.
// Whitens each block with its Cholesky factor and takes the singular values
// of the whitened cross block.
template <typename DA, typename DB, typename DC>
Vec<typename DA::Scalar> canonical_correlations(const Eigen::MatrixBase<DA>& saa, const Eigen::MatrixBase<DB>& sbb,
                                                const Eigen::MatrixBase<DC>& sab)
{
    using Scalar = typename DA::Scalar;
    if (saa.rows() == 0 || sbb.rows() == 0)
        return Vec<Scalar>();
    auto la = regularized_llt(saa);
    auto lb = regularized_llt(sbb);
    Mat<Scalar> w = la.matrixL().solve(sab);
    w = lb.matrixL().solve(w.transpose()).transpose();
    Eigen::JacobiSVD<Mat<Scalar>> svd(w);
    Vec<Scalar> rho = svd.singularValues().cwiseMin(Scalar(1)).cwiseMax(Scalar(0));
    return rho;
}

// Stationary covariance S = F S F^T + Q by squared (doubling) fixed-point
// iteration; each sweep doubles the number of accumulated terms.
template <typename DF, typename DQ>
Mat<typename DF::Scalar> stationary_covariance(const Eigen::MatrixBase<DF>& f, const Eigen::MatrixBase<DQ>& q,
                                               typename DF::Scalar tol = 1e-12, int max_iter = 1000000)
{
    using Scalar = typename DF::Scalar;
    Mat<Scalar> s = q;
    Mat<Scalar> a = f;
    for (int it = 0; it < max_iter; ++it) {
        Mat<Scalar> inc = a * s * a.transpose();
        s += inc;
        const Scalar scale = std::max(s.cwiseAbs().maxCoeff(), Scalar(1e-300));
        if (inc.cwiseAbs().maxCoeff() <= tol * scale)
            return Scalar(0.5) * (s + s.transpose());
        a = a * a;
        if (!a.allFinite())
            break;
    }
    throw std::runtime_error("stationary covariance iteration did not converge");
}

// Spectral radius by power iteration on |M| when it has a Perron root; used
// as an independent cross-check of dense eigenvalue routines.
template <typename Derived>
typename Derived::Scalar power_iteration_radius(const Eigen::MatrixBase<Derived>& m, int iters = 20000)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = m.rows();
    if (n == 0)
        return Scalar(0);
    Vec<Scalar> v = Vec<Scalar>::Ones(n) / std::sqrt(Scalar(n));
    Scalar lambda = 0;
    for (int it = 0; it < iters; ++it) {
        Vec<Scalar> w = m * v;
        Scalar nrm = w.norm();
        if (nrm == Scalar(0))
            return Scalar(0);
        Scalar next = v.dot(w);
        v = w / nrm;
        if (it > 10 && std::abs(next - lambda) < Scalar(1e-15) * std::max(Scalar(1), std::abs(next)))
            return std::abs(next);
        lambda = next;
    }
    return std::abs(lambda);
}

}  // namespace hawkrank

#endif
