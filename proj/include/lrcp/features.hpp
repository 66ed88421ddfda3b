#pragma once

#include <vector>

#include "lrcp/data_io.hpp"

namespace lrcp {

// Step inputs are [previous value, time features, lag values], all in the
// transformed scale. Time features are functions of the timestamp alone,
// so they can be extended past the end of the panel for forecasting.
struct FeaturePlan {
    Frequency frequency = Frequency::Integer;
    std::vector<int> lags;
    Matrix time_features;  // T_ext x F
    int max_lag = 1;

    int input_width() const {
        return 1 + static_cast<int>(time_features.cols()) +
               static_cast<int>(lags.size());
    }
};

// extend_steps extra timestamps are appended at the declared frequency.
FeaturePlan make_feature_plan(const std::vector<long long>& timestamps,
                              Frequency frequency, int extend_steps);

// Transformed-value history; column j holds absolute time base + j.
struct History {
    Matrix x;       // N x L
    int base = 0;

    double value_at(int series, int t) const {
        int col = t - base;
        if (col < 0) return 0.0;  // zero-padded before the panel start
        return x(series, col);
    }
};

// Input vector for series i at absolute time t (the step that emits z_t).
Vector build_input(const FeaturePlan& plan, const History& hist, int series,
                   int t);

}  // namespace lrcp
