#pragma once

#include <vector>

#include "lrcp/copula.hpp"
#include "lrcp/data_io.hpp"
#include "lrcp/features.hpp"
#include "lrcp/net.hpp"

namespace lrcp {

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 16;
    int total_updates = 10000;
    double clip_norm = 10.0;
    double l2 = 1e-8;
    int decay_patience = 500;
    double decay_factor = 2.0;
    int smooth_window = 50;

    int rank = 10;
    int dim_batch = 20;        // B, series per training instance
    int ecdf_window = 100;     // m
    int num_eval_samples = 400;
    int horizon = 24;          // tau; context length T' == tau
    int hidden = 40;           // LSTM cells
    int num_layers = 2;
    int embed_dim = 4;
    double dropout = 0.01;
    double jitter_count = 1.0;  // jitter scale for count-domain series
    double jitter_real = 0.0;
    bool use_copula = true;     // identity marginals when false
    std::uint64_t seed = 0;

    int slice_length() const { return 2 * horizon; }
    void validate() const;
};

struct TrainingInstance {
    std::vector<int> series_indices;  // B distinct
    int offset = 0;                   // slice start, length 2*horizon
};

TrainingInstance sample_training_instance(const TimeSeriesPanel& panel,
                                          const TrainConfig& cfg, Rng& rng);

// Everything needed to forecast: weights, frozen marginals, feature plan
// inputs.
struct Model {
    NetworkParams params;
    std::vector<MarginalTransform> transforms;  // empty <=> identity marginals
    Frequency frequency = Frequency::Integer;
    std::vector<std::string> series_ids;
    int context_length = 24;  // T'

    bool identity_marginals() const { return transforms.empty(); }
    double forward(int series, double z) const;
    double inverse(int series, double x) const;
};

// Per-series forward transform of a whole panel; also returns the summed
// copula corrections per cell (0 where the ECDF density vanishes, which
// happens on slices outside the fitted window).
struct TransformedPanel {
    Matrix x;            // N x T
    Matrix corrections;  // N x T
};
TransformedPanel transform_panel(const TimeSeriesPanel& panel, const Model& model);

std::vector<MarginalTransform> fit_transforms(const TimeSeriesPanel& panel,
                                              const TrainConfig& cfg, Rng& rng);

NetBatch make_batch(const TrainingInstance& inst, const TransformedPanel& tp,
                    const FeaturePlan& plan, int slice_len);

// --- optimizer ---
struct AdamState {
    NetworkParams m;
    NetworkParams v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};
AdamState make_adam_state(const NetworkParams& params);

// Global-norm clipping, then L2, then a bias-corrected Adam update.
void adam_step(NetworkParams& params, NetworkParams& grads, AdamState& state,
               double learning_rate, const TrainConfig& cfg);

double global_grad_norm(NetworkParams& grads);

// --- training loop ---
struct TraceRow {
    int update;
    double loss;  // average NLL per timestep per dimension
    double learning_rate;
};

struct FitResult {
    Model model;
    std::vector<TraceRow> trace;
};

FitResult fit(const TimeSeriesPanel& panel, const TrainConfig& cfg, Rng& rng);

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

// --- gradient verification ---
struct GradCheckEntry {
    std::string tensor;
    double max_rel_error;
};
struct GradCheckReport {
    std::vector<GradCheckEntry> tensors;
    double worst = 0.0;
};

// Central finite differences against the analytic gradients; dropout is
// disabled so the loss is deterministic. corrupt_tensor, when non-empty,
// perturbs that analytic gradient tensor first (test hook).
GradCheckReport gradcheck(const NetworkParams& params, const NetBatch& batch,
                          double fd_step = 1e-5,
                          const std::string& corrupt_tensor = "");

}  // namespace lrcp
