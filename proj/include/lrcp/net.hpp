#pragma once

#include <string>
#include <vector>

#include "lrcp/copula.hpp"
#include "lrcp/lowrank_gauss.hpp"

namespace lrcp {

// One stacked-LSTM layer; gate order in the fused matrices is
// input, forget, candidate, output.
struct LstmLayer {
    Matrix w_in;   // 4k x input_width
    Matrix w_rec;  // 4k x k
    Vector bias;   // 4k
};

// Shared LSTM + projection heads + per-series embeddings. Projections
// read y = [h_top; e_i] of width p = k + E; only the embedding table
// scales with the number of series.
struct NetworkParams {
    std::vector<LstmLayer> lstm;
    Vector w_mu;        // p
    Vector w_d;         // p
    Matrix w_v;         // r x p
    Matrix embeddings;  // N x E
    double dropout_rate = 0.0;

    int hidden() const { return static_cast<int>(lstm.front().w_rec.cols()); }
    int input_width() const { return static_cast<int>(lstm.front().w_in.cols()); }
    int embed_dim() const { return static_cast<int>(embeddings.cols()); }
    int rank() const { return static_cast<int>(w_v.rows()); }
    int num_series() const { return static_cast<int>(embeddings.rows()); }
    int num_layers() const { return static_cast<int>(lstm.size()); }
};

// Named flat view over every parameter tensor; shared by the optimizer,
// the checkpoint writer and the gradient checker.
struct TensorView {
    std::string name;
    double* data;
    long size;
};
std::vector<TensorView> tensor_views(NetworkParams& p);
NetworkParams zeros_like(const NetworkParams& p);

NetworkParams init_params(int num_series, int input_width, int hidden,
                          int embed_dim, int rank, int num_layers,
                          double dropout_rate, Rng& rng);

// Hidden/cell pair per layer for one series.
struct NetworkState {
    std::vector<Vector> h;
    std::vector<Vector> c;
};
NetworkState zero_state(const NetworkParams& p);

// One inference-mode step (no dropout).
NetworkState lstm_step(const NetworkParams& p, const NetworkState& state,
                       const Vector& input);

struct Projection {
    double mu;
    double d;   // softplus, > 0
    Vector v;   // r
};
Projection project(const NetworkParams& p, const Vector& h, int series_index);

// GP-view covariance of two feature points: 1{y==y2} s(w_d.y) + (Wv y).(Wv y2).
double kernel_eval(const NetworkParams& p, const Vector& y, const Vector& y2);

double softplus(double x);

// A training slice already mapped to the transformed scale.
struct NetBatch {
    std::vector<int> series_indices;  // B, distinct, index the embedding table
    std::vector<Matrix> inputs;       // B entries, each input_width x L
    Matrix targets;                   // B x L
    double correction_sum = 0.0;      // copula terms, constant w.r.t. params
};

struct LossGrads {
    double loss;           // total negative log-density over the slice
    double gaussian_nll;   // loss without the copula corrections
    NetworkParams grads;
};

// Forward + one reverse pass over the whole slice. Dropout masks are
// drawn from rng when training && dropout_rate > 0; pass training=false
// for a deterministic loss (gradient checking, evaluation).
LossGrads loss_and_grads(const NetworkParams& params, const NetBatch& batch,
                         Rng& rng, bool training = true);

}  // namespace lrcp
