#pragma once

#include "lrcp/data_io.hpp"
#include "lrcp/lowrank_gauss.hpp"

namespace lrcp {

// Rank-2 artificial dataset: z_t ~ N(rho_t u, U S_t U^T) with
// rho_t = sin(t * dt) oscillating the mean and the factor correlation.
struct SyntheticSpec {
    int num_series = 4;
    int num_steps = 24000;
    double sigma1 = 0.1;
    double sigma2 = 0.1;
    double a = -0.5;  // uniform lower bound for u and U entries
    double b = 0.5;
    double dt = 0.01;  // phase advance per step
    std::uint64_t seed = 0;
};

struct SyntheticTruth {
    Vector u;   // N
    Matrix big_u;  // N x 2
    std::vector<Vector> mean;   // per step, N
    std::vector<Matrix> cov;    // per step, N x N, rank <= 2
};

// Closed-form mean and covariance at phase index t.
void true_cov(const SyntheticSpec& spec, const Vector& u, const Matrix& big_u,
              int t, Vector& mean, Matrix& cov);

struct SyntheticData {
    TimeSeriesPanel panel;
    SyntheticTruth truth;
};

SyntheticData generate(const SyntheticSpec& spec, Rng& rng);

// Panel CSV plus a truth file (t, mu entries, lower-triangle Sigma entries).
void write_truth(const SyntheticTruth& truth, const std::string& path);

}  // namespace lrcp
