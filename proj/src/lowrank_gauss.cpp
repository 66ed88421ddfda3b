#include "lrcp/lowrank_gauss.hpp"

#include <cmath>

namespace lrcp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

void LowRankGaussian::validate() const {
    const Eigen::Index n = mu.size();
    if (d.size() != n || v.rows() != n)
        throw DataError("LowRankGaussian: inconsistent dimensions");
    if (v.cols() < 1)
        throw DataError("LowRankGaussian: rank must be >= 1");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(d[i] > 0.0))
            throw NumericalError("LowRankGaussian: d[" + std::to_string(i) +
                                 "] is not strictly positive");
}

Matrix cholesky_lower(const Matrix& a) {
    const Eigen::Index n = a.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > 0.0))
            throw CholeskyError(
                "Cholesky breakdown: pivot " + std::to_string(j) +
                    " is non-positive (" + std::to_string(pivot) + ")",
                static_cast<int>(j));
        l(j, j) = std::sqrt(pivot);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        }
    }
    return l;
}

CapacitanceFactor capacitance(const LowRankGaussian& g) {
    const Eigen::Index r = g.rank();
    // C = I + V^T D^{-1} V, O(N r^2)
    Matrix vd = g.v.array().colwise() / g.d.array();  // D^{-1} V
    Matrix c = Matrix::Identity(r, r) + g.v.transpose() * vd;
    CapacitanceFactor cf;
    cf.l_c = cholesky_lower(c);
    cf.log_det_c = 2.0 * cf.l_c.diagonal().array().log().sum();
    return cf;
}

double logdet_lowrank(const LowRankGaussian& g, const CapacitanceFactor& cf) {
    return cf.log_det_c + g.d.array().log().sum();
}

double mahalanobis_lowrank(const LowRankGaussian& g, const CapacitanceFactor& cf,
                           const Vector& x) {
    if (x.size() != g.dim())
        throw DataError("mahalanobis_lowrank: x has length " +
                        std::to_string(x.size()) + ", expected " +
                        std::to_string(g.dim()));
    Vector e = x - g.mu;
    Vector ed = e.array() / g.d.array();
    double q = e.dot(ed);
    Vector y = g.v.transpose() * ed;
    Vector w = cf.l_c.triangularView<Eigen::Lower>().solve(y);
    return q - w.squaredNorm();
}

double logpdf_lowrank(const LowRankGaussian& g, const Vector& x) {
    CapacitanceFactor cf = capacitance(g);
    double n = static_cast<double>(g.dim());
    return -0.5 * (n * kLog2Pi + logdet_lowrank(g, cf) +
                   mahalanobis_lowrank(g, cf, x));
}

LowRankLogpdfGrad logpdf_lowrank_grad(const LowRankGaussian& g, const Vector& x) {
    const Eigen::Index n = g.dim();
    CapacitanceFactor cf = capacitance(g);

    Vector e = x - g.mu;
    Vector ed = e.array() / g.d.array();
    Matrix p = g.v.array().colwise() / g.d.array();  // D^{-1} V, N x r

    // a = Sigma^{-1} (x - mu) by Woodbury
    Vector y = g.v.transpose() * ed;
    Vector z = cf.l_c.triangularView<Eigen::Lower>().solve(y);
    double maha = e.dot(ed) - z.squaredNorm();
    cf.l_c.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    Vector a = ed - p * z;

    // Sigma^{-1} V = P - P C^{-1} (V^T P)
    Matrix m = g.v.transpose() * p;  // r x r
    Matrix cm = cf.l_c.triangularView<Eigen::Lower>().solve(m);
    cf.l_c.transpose().triangularView<Eigen::Upper>().solveInPlace(cm);
    Matrix sinv_v = p - p * cm;

    // diag(Sigma^{-1}) = 1/d - rowwise ||L_C^{-1} V^T D^{-1}||^2
    Matrix w = cf.l_c.triangularView<Eigen::Lower>().solve(p.transpose());  // r x N
    Vector diag_sinv = g.d.cwiseInverse() - w.colwise().squaredNorm().transpose();

    LowRankLogpdfGrad out;
    out.logpdf = -0.5 * (static_cast<double>(n) * kLog2Pi +
                         logdet_lowrank(g, cf) + maha);
    out.d_mu = a;
    out.d_d = 0.5 * (a.array().square() - diag_sinv.array());
    out.d_v = a * (a.transpose() * g.v) - sinv_v;
    return out;
}

Matrix sample_lowrank(const LowRankGaussian& g, Rng& rng, int count) {
    if (count < 1) throw DataError("sample_lowrank: count must be >= 1");
    const Eigen::Index n = g.dim();
    const Eigen::Index r = g.rank();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector sd = g.d.array().sqrt();
    Matrix out(count, n);
    Vector eps2(r);
    for (int s = 0; s < count; ++s) {
        for (Eigen::Index j = 0; j < r; ++j) eps2[j] = gauss(rng);
        Vector row = g.mu + g.v * eps2;
        for (Eigen::Index i = 0; i < n; ++i) row[i] += sd[i] * gauss(rng);
        out.row(s) = row.transpose();
    }
    return out;
}

double dense_oracle_logpdf(const LowRankGaussian& g, const Vector& x) {
    const Eigen::Index n = g.dim();
    if (x.size() != n) throw DataError("dense_oracle_logpdf: length mismatch");
    Matrix sigma = g.v * g.v.transpose();
    sigma.diagonal() += g.d;
    Matrix l = cholesky_lower(sigma);
    Vector w = l.triangularView<Eigen::Lower>().solve(x - g.mu);
    double logdet = 2.0 * l.diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(n) * kLog2Pi + logdet + w.squaredNorm());
}

}  // namespace lrcp
