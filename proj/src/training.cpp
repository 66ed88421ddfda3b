#include "lrcp/training.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>

namespace lrcp {

void TrainConfig::validate() const {
    if (learning_rate <= 0 || batch_size < 1 || total_updates < 0 ||
        clip_norm <= 0 || l2 < 0 || decay_patience < 1 || rank < 1 ||
        dim_batch < 1 || ecdf_window < 2 || num_eval_samples < 1 ||
        horizon < 1 || hidden < 1 || num_layers < 1 || embed_dim < 1)
        throw ConfigError("TrainConfig: non-positive hyperparameter");
    if (decay_factor <= 1.0)
        throw ConfigError("TrainConfig: decay_factor must be > 1");
    if (dropout < 0.0 || dropout >= 1.0)
        throw ConfigError("TrainConfig: dropout must lie in [0, 1)");
}

double Model::forward(int series, double z) const {
    if (identity_marginals()) return z;
    return transform_forward(transforms[series], z);
}

double Model::inverse(int series, double x) const {
    if (identity_marginals()) return x;
    return transform_inverse(transforms[series], x);
}

std::vector<MarginalTransform> fit_transforms(const TimeSeriesPanel& panel,
                                              const TrainConfig& cfg, Rng& rng) {
    std::vector<MarginalTransform> transforms;
    if (!cfg.use_copula) return transforms;
    if (panel.num_steps() < cfg.ecdf_window)
        throw DataError("panel shorter than the ECDF window m");
    for (int i = 0; i < panel.num_series(); ++i) {
        std::vector<double> values(panel.values.row(i).begin(),
                                   panel.values.row(i).end());
        double jitter = (panel.domain[i] == Domain::Count) ? cfg.jitter_count
                                                           : cfg.jitter_real;
        transforms.push_back({fit_ecdf(values, cfg.ecdf_window, jitter, rng)});
    }
    return transforms;
}

TransformedPanel transform_panel(const TimeSeriesPanel& panel,
                                 const Model& model) {
    TransformedPanel tp;
    const int n = panel.num_series();
    const int t_total = panel.num_steps();
    tp.x = Matrix(n, t_total);
    tp.corrections = Matrix::Zero(n, t_total);
    if (model.identity_marginals()) {
        tp.x = panel.values;
        return tp;
    }
    for (int i = 0; i < n; ++i) {
        const MarginalTransform& mt = model.transforms[i];
        for (int t = 0; t < t_total; ++t) {
            double z = panel.values(i, t);
            tp.x(i, t) = transform_forward(mt, z);
            // The correction is constant w.r.t. parameters; cells outside
            // the fitted ECDF support (zero density) contribute nothing.
            double density = ecdf_density(mt.cdf, z);
            if (density > 0.0)
                tp.corrections(i, t) =
                    -std_normal_logpdf(tp.x(i, t)) + std::log(density);
        }
    }
    return tp;
}

TrainingInstance sample_training_instance(const TimeSeriesPanel& panel,
                                          const TrainConfig& cfg, Rng& rng) {
    const int slice = cfg.slice_length();
    const int t_total = panel.num_steps();
    if (t_total < slice)
        throw DataError("panel too short: need at least " +
                        std::to_string(slice) + " steps, have " +
                        std::to_string(t_total));
    TrainingInstance inst;
    std::uniform_int_distribution<int> offset_dist(0, t_total - slice);
    inst.offset = offset_dist(rng);
    const int n = panel.num_series();
    const int b = std::min(cfg.dim_batch, n);
    std::vector<int> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    for (int j = 0; j < b; ++j) {
        std::uniform_int_distribution<int> pick(j, n - 1);
        std::swap(indices[j], indices[pick(rng)]);
    }
    inst.series_indices.assign(indices.begin(), indices.begin() + b);
    return inst;
}

NetBatch make_batch(const TrainingInstance& inst, const TransformedPanel& tp,
                    const FeaturePlan& plan, int slice_len) {
    NetBatch batch;
    batch.series_indices = inst.series_indices;
    const int b = static_cast<int>(inst.series_indices.size());
    History hist{tp.x, 0};
    batch.targets = Matrix(b, slice_len);
    for (int j = 0; j < b; ++j) {
        int i = inst.series_indices[j];
        Matrix inputs(plan.input_width(), slice_len);
        for (int t = 0; t < slice_len; ++t) {
            int abs_t = inst.offset + t;
            inputs.col(t) = build_input(plan, hist, i, abs_t);
            batch.targets(j, t) = tp.x(i, abs_t);
            batch.correction_sum += tp.corrections(i, abs_t);
        }
        batch.inputs.push_back(std::move(inputs));
    }
    return batch;
}

AdamState make_adam_state(const NetworkParams& params) {
    AdamState s;
    s.m = zeros_like(params);
    s.v = zeros_like(params);
    return s;
}

double global_grad_norm(NetworkParams& grads) {
    double sq = 0.0;
    for (const auto& view : tensor_views(grads))
        for (long i = 0; i < view.size; ++i) sq += view.data[i] * view.data[i];
    return std::sqrt(sq);
}

void adam_step(NetworkParams& params, NetworkParams& grads, AdamState& state,
               double learning_rate, const TrainConfig& cfg) {
    double norm = global_grad_norm(grads);
    if (!std::isfinite(norm)) throw NumericalError("non-finite gradients");
    double scale = (norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;

    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto pv = tensor_views(params);
    auto gv = tensor_views(grads);
    auto mv = tensor_views(state.m);
    auto vv = tensor_views(state.v);
    for (size_t k = 0; k < pv.size(); ++k) {
        for (long i = 0; i < pv[k].size; ++i) {
            double g = gv[k].data[i] * scale + cfg.l2 * pv[k].data[i];
            double& m = mv[k].data[i];
            double& v = vv[k].data[i];
            m = state.beta1 * m + (1.0 - state.beta1) * g;
            v = state.beta2 * v + (1.0 - state.beta2) * g * g;
            pv[k].data[i] -=
                learning_rate * (m / bc1) / (std::sqrt(v / bc2) + state.eps);
        }
    }
}

FitResult fit(const TimeSeriesPanel& panel, const TrainConfig& cfg, Rng& rng) {
    cfg.validate();
    const int slice_len = cfg.slice_length();
    if (panel.num_steps() < slice_len)
        throw DataError("panel shorter than T' + tau = " +
                        std::to_string(slice_len));

    FitResult result;
    Model& model = result.model;
    model.frequency = panel.frequency;
    model.series_ids = panel.series_ids;
    model.context_length = cfg.horizon;
    model.transforms = fit_transforms(panel, cfg, rng);

    FeaturePlan plan = make_feature_plan(panel.timestamps, panel.frequency, 0);
    TransformedPanel tp = transform_panel(panel, model);

    model.params = init_params(panel.num_series(), plan.input_width(),
                               cfg.hidden, cfg.embed_dim, cfg.rank,
                               cfg.num_layers, cfg.dropout, rng);

    AdamState adam = make_adam_state(model.params);
    double lr = cfg.learning_rate;
    double best_smoothed = std::numeric_limits<double>::infinity();
    int stale = 0;
    std::deque<double> window;
    double window_sum = 0.0;
    const int b_eff = std::min(cfg.dim_batch, panel.num_series());
    const double per_cell = 1.0 / (static_cast<double>(slice_len) * b_eff);

    for (int update = 0; update < cfg.total_updates; ++update) {
        NetworkParams grads = zeros_like(model.params);
        double loss_sum = 0.0;
        try {
            for (int j = 0; j < cfg.batch_size; ++j) {
                TrainingInstance inst = sample_training_instance(panel, cfg, rng);
                NetBatch batch = make_batch(inst, tp, plan, slice_len);
                LossGrads lg = loss_and_grads(model.params, batch, rng, true);
                loss_sum += lg.loss;
                // optimize the mean NLL per observation, so the clipping
                // threshold and learning rate are independent of the slice
                // and batch geometry
                auto gv = tensor_views(grads);
                auto lv = tensor_views(lg.grads);
                for (size_t k = 0; k < gv.size(); ++k)
                    for (long i = 0; i < gv[k].size; ++i)
                        gv[k].data[i] +=
                            lv[k].data[i] * per_cell / cfg.batch_size;
            }
            adam_step(model.params, grads, adam, lr, cfg);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (update " +
                                 std::to_string(update) + ")");
        }

        double loss = loss_sum / cfg.batch_size * per_cell;
        if (!std::isfinite(loss))
            throw NumericalError("divergent loss at update " +
                                 std::to_string(update));
        result.trace.push_back({update, loss, lr});

        // LR decay on the smoothed loss: halve after decay_patience
        // consecutive updates without a new best.
        window.push_back(loss);
        window_sum += loss;
        if (static_cast<int>(window.size()) > cfg.smooth_window) {
            window_sum -= window.front();
            window.pop_front();
        }
        double smoothed = window_sum / window.size();
        if (smoothed < best_smoothed) {
            best_smoothed = smoothed;
            stale = 0;
        } else if (++stale >= cfg.decay_patience) {
            lr /= cfg.decay_factor;
            stale = 0;
        }
    }
    return result;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write trace file: " + path);
    out << "update_index,loss,learning_rate\n";
    out.precision(17);
    for (const auto& row : trace)
        out << row.update << "," << row.loss << "," << row.learning_rate << "\n";
}

GradCheckReport gradcheck(const NetworkParams& params, const NetBatch& batch,
                          double fd_step, const std::string& corrupt_tensor) {
    Rng dummy(0);
    NetworkParams work = params;
    LossGrads analytic = loss_and_grads(work, batch, dummy, /*training=*/false);
    if (!corrupt_tensor.empty()) {
        for (auto& view : tensor_views(analytic.grads))
            if (view.name == corrupt_tensor) view.data[0] += 1e-2;
    }

    GradCheckReport report;
    auto pv = tensor_views(work);
    auto av = tensor_views(analytic.grads);
    for (size_t k = 0; k < pv.size(); ++k) {
        double worst = 0.0;
        for (long i = 0; i < pv[k].size; ++i) {
            double saved = pv[k].data[i];
            pv[k].data[i] = saved + fd_step;
            double up = loss_and_grads(work, batch, dummy, false).loss;
            pv[k].data[i] = saved - fd_step;
            double down = loss_and_grads(work, batch, dummy, false).loss;
            pv[k].data[i] = saved;
            double fd = (up - down) / (2.0 * fd_step);
            double a = av[k].data[i];
            double rel = std::abs(a - fd) /
                         (std::max(std::abs(a), std::abs(fd)) + 1e-4);
            worst = std::max(worst, rel);
        }
        report.tensors.push_back({pv[k].name, worst});
        report.worst = std::max(report.worst, worst);
    }
    return report;
}

}  // namespace lrcp
