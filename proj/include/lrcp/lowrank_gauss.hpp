#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "lrcp/errors.hpp"

namespace lrcp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

// Multivariate normal with covariance D + V V^T, D = diag(d).
// V is stored row-major in the mathematical sense: row i is the factor
// loading of dimension i.
struct LowRankGaussian {
    Vector mu;   // length N
    Vector d;    // length N, strictly positive
    Matrix v;    // N x r

    Eigen::Index dim() const { return mu.size(); }
    Eigen::Index rank() const { return v.cols(); }
    void validate() const;
};

// Cholesky factor of the capacitance matrix C = I_r + V^T D^{-1} V.
struct CapacitanceFactor {
    Matrix l_c;        // r x r lower triangular, positive diagonal
    double log_det_c;  // 2 * sum(log diag(l_c))
};

// In-house lower Cholesky so a breakdown can name the failing pivot.
// Overwrites nothing; returns the factor of the symmetric matrix a.
Matrix cholesky_lower(const Matrix& a);

CapacitanceFactor capacitance(const LowRankGaussian& g);

// log|D + V V^T| via the matrix determinant lemma, O(N + r) given cf.
double logdet_lowrank(const LowRankGaussian& g, const CapacitanceFactor& cf);

// (x - mu)^T Sigma^{-1} (x - mu) via the Woodbury identity, O(Nr + r^2).
double mahalanobis_lowrank(const LowRankGaussian& g, const CapacitanceFactor& cf,
                           const Vector& x);

double logpdf_lowrank(const LowRankGaussian& g, const Vector& x);

// Gradient of logpdf_lowrank with respect to mu, d and V, all computed
// through the same capacitance factorization in O(Nr^2).
struct LowRankLogpdfGrad {
    double logpdf;
    Vector d_mu;
    Vector d_d;
    Matrix d_v;
};
LowRankLogpdfGrad logpdf_lowrank_grad(const LowRankGaussian& g, const Vector& x);

// Rows are i.i.d. draws of mu + sqrt(d) .* eps1 + V eps2.
Matrix sample_lowrank(const LowRankGaussian& g, Rng& rng, int count);

// O(N^3) reference path: materializes Sigma and goes through a dense
// Cholesky. Small-N test oracle and dense baseline for timing.
double dense_oracle_logpdf(const LowRankGaussian& g, const Vector& x);

}  // namespace lrcp
