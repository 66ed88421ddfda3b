#pragma once

#include <string>

#include "lrcp/metrics.hpp"
#include "lrcp/training.hpp"

namespace lrcp {

// LSTM states at the forecast origin plus the transformed history the
// rollout needs for previous-value and lag inputs.
struct ConditionedState {
    std::vector<NetworkState> states;  // one per series
    History history;                   // last max_lag columns
    int origin = 0;                    // absolute index of the first forecast step
};

// Unrolls only the last T' = model.context_length observed steps before
// origin; earlier observations affect the rollout solely through lag
// features.
ConditionedState condition(const Model& model, const TransformedPanel& tp,
                           const FeaturePlan& plan, int origin);

// Monte Carlo rollout of num_samples joint paths over the horizon. Each
// path owns an RNG stream derived from seed and the path index, so the
// sample axis is reproducible and order-independent.
ForecastSamples rollout(const Model& model, const ConditionedState& cond,
                        const FeaturePlan& plan, int horizon, int num_samples,
                        std::uint64_t seed);

// One-step-ahead emission parameters over [t_begin, t_end), teacher-forced
// on the observed panel: mu_t and Sigma_t = D_t + V_t V_t^T for all series.
struct CovarianceTrace {
    std::vector<int> t;
    std::vector<Vector> mu;
    std::vector<Matrix> cov;
};
CovarianceTrace covariance_trace(const Model& model, const TransformedPanel& tp,
                                 const FeaturePlan& plan, int t_begin,
                                 int t_end);

void write_samples_csv(const ForecastSamples& fc,
                       const std::vector<std::string>& series_ids,
                       const std::string& path);
void write_quantiles_csv(const ForecastSamples& fc,
                         const std::vector<std::string>& series_ids,
                         const std::string& path);
void write_covariance_csv(const CovarianceTrace& trace, const std::string& path);

}  // namespace lrcp
