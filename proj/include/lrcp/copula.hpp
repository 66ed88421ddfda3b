#pragma once

#include <vector>

#include "lrcp/errors.hpp"
#include "lrcp/lowrank_gauss.hpp"

namespace lrcp {

// Standard normal CDF and quantile. The quantile is a rational
// approximation polished with one Newton step; accurate to ~1e-12.
double std_normal_cdf(double x);
double std_normal_quantile(double u);
double std_normal_logpdf(double x);

// Linearly interpolated empirical CDF of the last m observations of a
// series, truncated to [delta, 1 - delta]. The interpolation knots put
// the k-th order statistic at level (k - 1/2) / m, which makes the
// interpolated CDF symmetric around the empirical median.
struct EmpiricalCdf {
    std::vector<double> sorted_values;  // ascending, length m
    int m = 0;
    double delta = 0.0;        // truncation bound
    double jitter_scale = 0.0;

    double min() const { return sorted_values.front(); }
    double max() const { return sorted_values.back(); }
};

// delta_m = 1 / (4 m^{1/4} sqrt(pi log m))
double ecdf_delta(int m);

// Fits on the most recent m entries of values. When jitter_scale > 0,
// uniform noise in [0, jitter_scale) is added before sorting to break
// ties in count data.
EmpiricalCdf fit_ecdf(const std::vector<double>& values, int m,
                      double jitter_scale, Rng& rng);

double ecdf_eval(const EmpiricalCdf& cdf, double v);     // in [delta, 1-delta]
double ecdf_inverse(const EmpiricalCdf& cdf, double u);  // u in (0,1)
double ecdf_density(const EmpiricalCdf& cdf, double v);  // slope, 0 off-support

// f = Phi^{-1} o F_hat and its inverse.
struct MarginalTransform {
    EmpiricalCdf cdf;
};

double transform_forward(const MarginalTransform& t, double z);
double transform_inverse(const MarginalTransform& t, double x);

// Change-of-variables terms -log phi(Phi^{-1}(F(z))) + log F'(z), so the
// total copula log-density is the Gaussian logpdf of the transformed
// vector plus the sum of these per-dimension corrections.
double copula_log_correction(const MarginalTransform& t, double z);

}  // namespace lrcp
