#include "lrcp/features.hpp"

#include <algorithm>

namespace lrcp {

FeaturePlan make_feature_plan(const std::vector<long long>& timestamps,
                              Frequency frequency, int extend_steps) {
    FeaturePlan plan;
    plan.frequency = frequency;
    plan.lags = lag_set(frequency);
    plan.max_lag = *std::max_element(plan.lags.begin(), plan.lags.end());
    std::vector<long long> ext = timestamps;
    long long step = frequency_step_seconds(frequency);
    for (int j = 0; j < extend_steps; ++j) ext.push_back(ext.back() + step);
    plan.time_features = build_covariates(ext, frequency);
    return plan;
}

Vector build_input(const FeaturePlan& plan, const History& hist, int series,
                   int t) {
    const int nf = static_cast<int>(plan.time_features.cols());
    Vector input(plan.input_width());
    input[0] = hist.value_at(series, t - 1);
    for (int j = 0; j < nf; ++j) input[1 + j] = plan.time_features(t, j);
    for (size_t j = 0; j < plan.lags.size(); ++j)
        input[1 + nf + j] = hist.value_at(series, t - plan.lags[j]);
    return input;
}

}  // namespace lrcp
