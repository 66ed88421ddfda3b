#include "lrcp/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lrcp {

double pinball(double alpha, double q, double y) {
    double indicator = (y < q) ? 1.0 : 0.0;
    return (alpha - indicator) * (y - q);
}

namespace {

constexpr int kNumLevels = 10;

// Nearest-rank quantile of a sorted sample at level alpha: index ceil(aS)-1.
double sorted_quantile(const std::vector<double>& sorted, double alpha) {
    int s = static_cast<int>(sorted.size());
    int idx = static_cast<int>(std::ceil(alpha * s)) - 1;
    idx = std::clamp(idx, 0, s - 1);
    return sorted[idx];
}

double crps_sorted(const std::vector<double>& sorted, double y) {
    // Degenerate forecast: the midpoint quantile levels make the CRPS of a
    // point mass at q exactly |y - q|, so return the closed form rather than
    // accumulating ten rounded terms.
    if (sorted.front() == sorted.back()) return std::abs(y - sorted.front());
    double acc = 0.0;
    for (int j = 1; j <= kNumLevels; ++j) {
        double alpha = (j - 0.5) / kNumLevels;
        acc += 2.0 * pinball(alpha, sorted_quantile(sorted, alpha), y);
    }
    return acc / kNumLevels;
}

}  // namespace

double crps_from_samples(std::vector<double> samples, double y) {
    if (samples.empty()) throw DataError("crps_from_samples: empty sample set");
    std::sort(samples.begin(), samples.end());
    return crps_sorted(samples, y);
}

double crps_marginal(const ForecastSamples& fc, const Matrix& actuals) {
    double acc = 0.0;
    int cells = 0;
    std::vector<double> col(fc.num_samples());
    for (int t = 0; t < fc.horizon(); ++t) {
        for (int i = 0; i < fc.num_series(); ++i) {
            for (int s = 0; s < fc.num_samples(); ++s) col[s] = fc.steps[t](s, i);
            std::sort(col.begin(), col.end());
            acc += crps_sorted(col, actuals(i, t));
            ++cells;
        }
    }
    return acc / cells;
}

double crps_sum(const ForecastSamples& fc, const Matrix& actuals) {
    double acc = 0.0;
    std::vector<double> sums(fc.num_samples());
    for (int t = 0; t < fc.horizon(); ++t) {
        for (int s = 0; s < fc.num_samples(); ++s) sums[s] = fc.steps[t].row(s).sum();
        std::sort(sums.begin(), sums.end());
        acc += crps_sorted(sums, actuals.col(t).sum());
    }
    return acc / fc.horizon();
}

double mse(const ForecastSamples& fc, const Matrix& actuals) {
    double acc = 0.0;
    int cells = 0;
    for (int t = 0; t < fc.horizon(); ++t) {
        for (int i = 0; i < fc.num_series(); ++i) {
            double mean = fc.steps[t].col(i).mean();
            double err = actuals(i, t) - mean;
            acc += err * err;
            ++cells;
        }
    }
    return acc / cells;
}

double mse_sum(const ForecastSamples& fc, const Matrix& actuals) {
    double acc = 0.0;
    for (int t = 0; t < fc.horizon(); ++t) {
        double mean = 0.0;
        for (int s = 0; s < fc.num_samples(); ++s) mean += fc.steps[t].row(s).sum();
        mean /= fc.num_samples();
        double err = actuals.col(t).sum() - mean;
        acc += err * err;
    }
    return acc / fc.horizon();
}

MetricsReport evaluate_forecast(const ForecastSamples& fc, const Matrix& actuals) {
    MetricsReport r;
    r.crps = crps_marginal(fc, actuals);
    r.crps_sum = crps_sum(fc, actuals);
    r.mse = mse(fc, actuals);
    r.mse_sum = mse_sum(fc, actuals);
    r.num_samples = fc.num_samples();
    r.horizon = fc.horizon();
    r.windows = 1;
    return r;
}

}  // namespace lrcp
