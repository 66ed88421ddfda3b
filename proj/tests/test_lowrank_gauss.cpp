#include <doctest.h>

#include <cmath>

#include "lrcp/lowrank_gauss.hpp"

using namespace lrcp;

namespace {

LowRankGaussian random_instance(int n, int r, Rng& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.1, 2.0);
    LowRankGaussian g;
    g.mu = Vector(n);
    g.d = Vector(n);
    g.v = Matrix(n, r);
    for (int i = 0; i < n; ++i) {
        g.mu[i] = unif(rng);
        g.d[i] = pos(rng);
        for (int j = 0; j < r; ++j) g.v(i, j) = unif(rng);
    }
    return g;
}

Vector random_point(int n, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = gauss(rng);
    return x;
}

}  // namespace

TEST_CASE("capacitance identity case") {
    LowRankGaussian g{Vector::Zero(2), Vector::Ones(2), Matrix::Zero(2, 1)};
    auto cf = capacitance(g);
    CHECK(cf.l_c(0, 0) == doctest::Approx(1.0));
    CHECK(cf.log_det_c == doctest::Approx(0.0));
}

TEST_CASE("capacitance ones factor") {
    LowRankGaussian g{Vector::Zero(2), Vector::Ones(2), Matrix::Ones(2, 1)};
    auto cf = capacitance(g);
    // Sigma = [[2,1],[1,2]], det = 3 = det(C) * det(D)
    CHECK(cf.l_c(0, 0) == doctest::Approx(std::sqrt(3.0)));
    CHECK(cf.log_det_c == doctest::Approx(std::log(3.0)));
}

TEST_CASE("logdet matches dense oracle on random instances") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = random_instance(10, 3, rng);
        auto cf = capacitance(g);
        Matrix sigma = g.v * g.v.transpose();
        sigma.diagonal() += g.d;
        Matrix l = cholesky_lower(sigma);
        double dense = 2.0 * l.diagonal().array().log().sum();
        CHECK(logdet_lowrank(g, cf) ==
              doctest::Approx(dense).epsilon(1e-10));
    }
}

TEST_CASE("logdet trivial cases") {
    LowRankGaussian g{Vector::Zero(2), Vector::Constant(2, 2.0), Matrix::Zero(2, 1)};
    CHECK(logdet_lowrank(g, capacitance(g)) == doctest::Approx(2.0 * std::log(2.0)));
    LowRankGaussian id{Vector::Zero(5), Vector::Ones(5), Matrix::Zero(5, 2)};
    CHECK(logdet_lowrank(id, capacitance(id)) == doctest::Approx(0.0));
}

TEST_CASE("mahalanobis identity and dense oracle") {
    LowRankGaussian id{Vector::Zero(2), Vector::Ones(2), Matrix::Zero(2, 1)};
    Vector x(2); x << 3.0, 4.0;
    CHECK(mahalanobis_lowrank(id, capacitance(id), x) == doctest::Approx(25.0));

    LowRankGaussian g{Vector::Zero(2), Vector::Ones(2), Matrix::Ones(2, 1)};
    Vector e1(2); e1 << 1.0, 0.0;
    CHECK(mahalanobis_lowrank(g, capacitance(g), e1) ==
          doctest::Approx(2.0 / 3.0));

    Rng rng(11);
    auto big = random_instance(50, 5, rng);
    Vector p = random_point(50, rng);
    Matrix sigma = big.v * big.v.transpose();
    sigma.diagonal() += big.d;
    Vector solved = sigma.llt().solve(p - big.mu);
    double dense = (p - big.mu).dot(solved);
    CHECK(mahalanobis_lowrank(big, capacitance(big), p) ==
          doctest::Approx(dense).epsilon(1e-9));
}

TEST_CASE("mahalanobis nonnegative, zero iff at the mean") {
    Rng rng(3);
    auto g = random_instance(8, 2, rng);
    auto cf = capacitance(g);
    CHECK(mahalanobis_lowrank(g, cf, g.mu) == doctest::Approx(0.0));
    for (int trial = 0; trial < 50; ++trial) {
        Vector x = random_point(8, rng);
        CHECK(mahalanobis_lowrank(g, cf, x) >= 0.0);
    }
}

TEST_CASE("logpdf scalar and diagonal cases") {
    LowRankGaussian g1{Vector::Zero(1), Vector::Ones(1), Matrix::Zero(1, 1)};
    CHECK(logpdf_lowrank(g1, Vector::Zero(1)) ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
    LowRankGaussian g2{Vector::Zero(2), Vector::Ones(2), Matrix::Zero(2, 1)};
    CHECK(logpdf_lowrank(g2, Vector::Zero(2)) ==
          doctest::Approx(-std::log(2.0 * M_PI)));
}

TEST_CASE("logpdf equals dense oracle over 100 random instances") {
    Rng rng(42);
    std::uniform_int_distribution<int> npick(1, 50);
    std::uniform_int_distribution<int> rpick(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        int n = npick(rng), r = rpick(rng);
        auto g = random_instance(n, r, rng);
        Vector x = random_point(n, rng);
        double fast = logpdf_lowrank(g, x);
        double dense = dense_oracle_logpdf(g, x);
        CHECK(std::abs(fast - dense) <= 1e-8 * (1.0 + std::abs(dense)));
    }
}

TEST_CASE("dense oracle sanity at the mean") {
    LowRankGaussian g{Vector::Zero(4), Vector::Ones(4), Matrix::Zero(4, 2)};
    CHECK(dense_oracle_logpdf(g, g.mu) ==
          doctest::Approx(-2.0 * std::log(2.0 * M_PI)));
}

TEST_CASE("cholesky failure names the pivot") {
    Matrix bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
    CHECK_THROWS_AS(cholesky_lower(bad), CholeskyError);
    try {
        cholesky_lower(bad);
    } catch (const CholeskyError& e) {
        CHECK(e.pivot_index == 1);
    }
}

TEST_CASE("invalid d rejected") {
    LowRankGaussian g{Vector::Zero(2), Vector::Zero(2), Matrix::Zero(2, 1)};
    CHECK_THROWS_AS(g.validate(), NumericalError);
}

TEST_CASE("sampling is deterministic given the seed") {
    Rng a(123), b(123);
    LowRankGaussian g{Vector::Zero(3), Vector::Ones(3), Matrix::Ones(3, 2)};
    CHECK(sample_lowrank(g, a, 10) == sample_lowrank(g, b, 10));
}

TEST_CASE("sampling moments") {
    Rng rng(5);
    LowRankGaussian g{Vector::Zero(2), Vector::Ones(2), Matrix::Zero(2, 1)};
    g.mu << 1.0, 2.0;
    Matrix draws = sample_lowrank(g, rng, 100000);
    CHECK(std::abs(draws.col(0).mean() - 1.0) < 0.02);
    CHECK(std::abs(draws.col(1).mean() - 2.0) < 0.02);

    LowRankGaussian gv{Vector::Zero(1), Vector::Constant(1, 4.0), Matrix::Zero(1, 1)};
    Matrix dv = sample_lowrank(gv, rng, 100000);
    double var = (dv.col(0).array() - dv.col(0).mean()).square().mean();
    CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("sample covariance matches D + VV^T") {
    Rng rng(17);
    auto g = random_instance(6, 2, rng);
    g.mu.setZero();
    Matrix draws = sample_lowrank(g, rng, 100000);
    Matrix centered = draws.rowwise() - draws.colwise().mean();
    Matrix emp = centered.transpose() * centered / (draws.rows() - 1.0);
    Matrix truth = g.v * g.v.transpose();
    truth.diagonal() += g.d;
    CHECK((emp - truth).norm() <= 0.05 * truth.norm());
}

TEST_CASE("logpdf gradients match finite differences") {
    Rng rng(23);
    auto g = random_instance(6, 2, rng);
    Vector x = random_point(6, rng);
    auto an = logpdf_lowrank_grad(g, x);
    CHECK(an.logpdf == doctest::Approx(logpdf_lowrank(g, x)));
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
        auto gp = g; gp.mu[i] += h;
        auto gm = g; gm.mu[i] -= h;
        double fd = (logpdf_lowrank(gp, x) - logpdf_lowrank(gm, x)) / (2 * h);
        CHECK(an.d_mu[i] == doctest::Approx(fd).epsilon(1e-5));
        gp = g; gp.d[i] += h;
        gm = g; gm.d[i] -= h;
        fd = (logpdf_lowrank(gp, x) - logpdf_lowrank(gm, x)) / (2 * h);
        CHECK(an.d_d[i] == doctest::Approx(fd).epsilon(1e-5));
        for (int j = 0; j < 2; ++j) {
            gp = g; gp.v(i, j) += h;
            gm = g; gm.v(i, j) -= h;
            fd = (logpdf_lowrank(gp, x) - logpdf_lowrank(gm, x)) / (2 * h);
            CHECK(an.d_v(i, j) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}
