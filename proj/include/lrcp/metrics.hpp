#pragma once

#include <vector>

#include "lrcp/lowrank_gauss.hpp"

namespace lrcp {

// S x N x horizon tensor of joint predictive samples in original scale,
// stored as one S x N matrix per horizon step.
struct ForecastSamples {
    std::vector<Matrix> steps;  // horizon entries, each S x N
    long long start_time = 0;
    int num_samples() const { return static_cast<int>(steps.front().rows()); }
    int num_series() const { return static_cast<int>(steps.front().cols()); }
    int horizon() const { return static_cast<int>(steps.size()); }
};

// Pinball (quantile) loss (alpha - 1[y<q])(y - q), always >= 0.
double pinball(double alpha, double q, double y);

// Sample CRPS with 10 midpoint quantile levels (j - 0.5)/10. The
// midpoint rule makes CRPS of a point mass exactly |y - q|.
double crps_from_samples(std::vector<double> samples, double y);

double crps_marginal(const ForecastSamples& fc, const Matrix& actuals);
double crps_sum(const ForecastSamples& fc, const Matrix& actuals);
double mse(const ForecastSamples& fc, const Matrix& actuals);
double mse_sum(const ForecastSamples& fc, const Matrix& actuals);

struct MetricsReport {
    double crps;
    double crps_sum;
    double mse;
    double mse_sum;
    int num_samples;
    int horizon;
    int windows;
};
MetricsReport evaluate_forecast(const ForecastSamples& fc, const Matrix& actuals);

}  // namespace lrcp
