#include "lrcp/synthetic.hpp"

#include <cmath>
#include <fstream>

namespace lrcp {

void true_cov(const SyntheticSpec& spec, const Vector& u, const Matrix& big_u,
              int t, Vector& mean, Matrix& cov) {
    double rho = std::sin(t * spec.dt);
    mean = rho * u;
    Matrix s(2, 2);
    s << spec.sigma1 * spec.sigma1, rho * spec.sigma1 * spec.sigma2,
        rho * spec.sigma1 * spec.sigma2, spec.sigma2 * spec.sigma2;
    cov = big_u * s * big_u.transpose();
}

SyntheticData generate(const SyntheticSpec& spec, Rng& rng) {
    if (spec.b <= spec.a) throw ConfigError("synthetic: need b > a");
    if (spec.sigma1 <= 0.0 || spec.sigma2 <= 0.0)
        throw ConfigError("synthetic: sigmas must be positive");
    const int n = spec.num_series;
    const int t_total = spec.num_steps;
    std::uniform_real_distribution<double> unif(spec.a, spec.b);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SyntheticData out;
    out.truth.u = Vector(n);
    out.truth.big_u = Matrix(n, 2);
    for (int i = 0; i < n; ++i) out.truth.u[i] = unif(rng);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) out.truth.big_u(i, j) = unif(rng);

    out.panel.values = Matrix(n, t_total);
    out.panel.frequency = Frequency::Integer;
    out.panel.domain.assign(n, Domain::Real);
    for (int i = 0; i < n; ++i)
        out.panel.series_ids.push_back("s" + std::to_string(i));
    out.panel.timestamps.resize(t_total);

    out.truth.mean.resize(t_total);
    out.truth.cov.resize(t_total);
    for (int t = 0; t < t_total; ++t) {
        out.panel.timestamps[t] = t;
        true_cov(spec, out.truth.u, out.truth.big_u, t, out.truth.mean[t],
                 out.truth.cov[t]);
        // Draw the two latent factors from S_t via its 2x2 Cholesky with a
        // tiny ridge; S_t is singular when rho hits +/-1.
        double rho = std::sin(t * spec.dt);
        double l11 = std::sqrt(spec.sigma1 * spec.sigma1 + 1e-12);
        double l21 = rho * spec.sigma1 * spec.sigma2 / l11;
        double l22 = std::sqrt(
            std::max(spec.sigma2 * spec.sigma2 + 1e-12 - l21 * l21, 0.0));
        double e1 = gauss(rng), e2 = gauss(rng);
        double f1 = l11 * e1;
        double f2 = l21 * e1 + l22 * e2;
        out.panel.values.col(t) = out.truth.mean[t] + out.truth.big_u.col(0) * f1 +
                                  out.truth.big_u.col(1) * f2;
    }
    return out;
}

void write_truth(const SyntheticTruth& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write truth file: " + path);
    const int n = static_cast<int>(truth.u.size());
    out << "t";
    for (int i = 0; i < n; ++i) out << ",mu" << i;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) out << ",cov" << i << "_" << j;
    out << "\n";
    out.precision(17);
    for (size_t t = 0; t < truth.mean.size(); ++t) {
        out << t;
        for (int i = 0; i < n; ++i) out << "," << truth.mean[t][i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) out << "," << truth.cov[t](i, j);
        out << "\n";
    }
}

}  // namespace lrcp
