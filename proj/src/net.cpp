#include "lrcp/net.hpp"

#include <cmath>

namespace lrcp {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vector sigmoid_v(const Vector& x) {
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

void check_finite(const Vector& v, const std::string& where) {
    if (!v.allFinite()) throw NumericalError("non-finite activation in " + where);
}

}  // namespace

double softplus(double x) {
    // stable log(1 + exp(x))
    if (x > 30.0) return x;
    return std::log1p(std::exp(x));
}

std::vector<TensorView> tensor_views(NetworkParams& p) {
    std::vector<TensorView> views;
    for (size_t l = 0; l < p.lstm.size(); ++l) {
        std::string tag = "lstm" + std::to_string(l);
        views.push_back({tag + ".w_in", p.lstm[l].w_in.data(), p.lstm[l].w_in.size()});
        views.push_back({tag + ".w_rec", p.lstm[l].w_rec.data(), p.lstm[l].w_rec.size()});
        views.push_back({tag + ".bias", p.lstm[l].bias.data(), p.lstm[l].bias.size()});
    }
    views.push_back({"w_mu", p.w_mu.data(), p.w_mu.size()});
    views.push_back({"w_d", p.w_d.data(), p.w_d.size()});
    views.push_back({"w_v", p.w_v.data(), p.w_v.size()});
    views.push_back({"embeddings", p.embeddings.data(), p.embeddings.size()});
    return views;
}

NetworkParams zeros_like(const NetworkParams& p) {
    NetworkParams z = p;
    for (auto& layer : z.lstm) {
        layer.w_in.setZero();
        layer.w_rec.setZero();
        layer.bias.setZero();
    }
    z.w_mu.setZero();
    z.w_d.setZero();
    z.w_v.setZero();
    z.embeddings.setZero();
    return z;
}

NetworkParams init_params(int num_series, int input_width, int hidden,
                          int embed_dim, int rank, int num_layers,
                          double dropout_rate, Rng& rng) {
    NetworkParams p;
    p.dropout_rate = dropout_rate;
    auto uniform_fill = [&rng](auto& m, int fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (long i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    };
    for (int l = 0; l < num_layers; ++l) {
        int in = (l == 0) ? input_width : hidden;
        LstmLayer layer;
        layer.w_in = Matrix(4 * hidden, in);
        layer.w_rec = Matrix(4 * hidden, hidden);
        layer.bias = Vector(4 * hidden);
        uniform_fill(layer.w_in, in);
        uniform_fill(layer.w_rec, hidden);
        uniform_fill(layer.bias, hidden);
        p.lstm.push_back(std::move(layer));
    }
    int proj_in = hidden + embed_dim;
    p.w_mu = Vector(proj_in);
    p.w_d = Vector(proj_in);
    p.w_v = Matrix(rank, proj_in);
    uniform_fill(p.w_mu, proj_in);
    uniform_fill(p.w_d, proj_in);
    uniform_fill(p.w_v, proj_in);
    p.embeddings = Matrix(num_series, embed_dim);
    std::normal_distribution<double> emb_dist(0.0, 0.1);
    for (long i = 0; i < p.embeddings.size(); ++i)
        p.embeddings.data()[i] = emb_dist(rng);
    return p;
}

NetworkState zero_state(const NetworkParams& p) {
    NetworkState s;
    int k = p.hidden();
    for (int l = 0; l < p.num_layers(); ++l) {
        s.h.emplace_back(Vector::Zero(k));
        s.c.emplace_back(Vector::Zero(k));
    }
    return s;
}

NetworkState lstm_step(const NetworkParams& p, const NetworkState& state,
                       const Vector& input) {
    if (input.size() != p.input_width())
        throw DataError("lstm_step: input width mismatch");
    const int k = p.hidden();
    NetworkState next = state;
    Vector x = input;
    for (int l = 0; l < p.num_layers(); ++l) {
        const LstmLayer& layer = p.lstm[l];
        Vector gates = layer.w_in * x + layer.w_rec * state.h[l] + layer.bias;
        Vector gi = sigmoid_v(gates.segment(0, k));
        Vector gf = sigmoid_v(gates.segment(k, k));
        Vector gg = gates.segment(2 * k, k).array().tanh();
        Vector go = sigmoid_v(gates.segment(3 * k, k));
        next.c[l] = gf.cwiseProduct(state.c[l]) + gi.cwiseProduct(gg);
        next.h[l] = go.cwiseProduct(next.c[l].array().tanh().matrix());
        check_finite(next.h[l], "lstm_step layer " + std::to_string(l));
        x = next.h[l];
    }
    return next;
}

Projection project(const NetworkParams& p, const Vector& h, int series_index) {
    if (series_index < 0 || series_index >= p.num_series())
        throw DataError("project: series index out of range");
    Vector y(h.size() + p.embed_dim());
    y << h, p.embeddings.row(series_index).transpose();
    Projection out;
    out.mu = p.w_mu.dot(y);
    out.d = softplus(p.w_d.dot(y));
    out.v = p.w_v * y;
    return out;
}

double kernel_eval(const NetworkParams& p, const Vector& y, const Vector& y2) {
    double cov = (p.w_v * y).dot(p.w_v * y2);
    if (y == y2) cov += softplus(p.w_d.dot(y));
    return cov;
}

namespace {

// Per-step, per-layer activations recorded by the forward pass.
struct StepCache {
    Vector x;        // layer input (after dropout of the layer below)
    Vector h_prev, c_prev;
    Vector gi, gf, gg, go;
    Vector c, tanh_c;
    Vector mask;     // dropout multiplier on this layer's output
};

}  // namespace

LossGrads loss_and_grads(const NetworkParams& params, const NetBatch& batch,
                         Rng& rng, bool training) {
    const int num_batch = static_cast<int>(batch.series_indices.size());
    const int seq_len = static_cast<int>(batch.targets.cols());
    const int k = params.hidden();
    const int num_layers = params.num_layers();
    const int embed_dim = params.embed_dim();
    const int rank = params.rank();
    const int proj_in = k + embed_dim;

    const bool use_dropout = training && params.dropout_rate > 0.0;
    std::bernoulli_distribution keep(1.0 - params.dropout_rate);
    const double keep_scale = 1.0 / (1.0 - params.dropout_rate);

    // ---- forward: unroll each series separately with tied weights ----
    std::vector<std::vector<std::vector<StepCache>>> cache(num_batch);
    std::vector<std::vector<Vector>> y_cache(num_batch);   // projection inputs
    std::vector<std::vector<double>> sd_cache(num_batch);  // w_d . y pre-softplus
    Matrix mus(num_batch, seq_len), ds(num_batch, seq_len);
    std::vector<Matrix> vs(seq_len, Matrix(num_batch, rank));

    for (int b = 0; b < num_batch; ++b) {
        int series = batch.series_indices[b];
        cache[b].resize(seq_len);
        y_cache[b].resize(seq_len);
        sd_cache[b].resize(seq_len);
        std::vector<Vector> h(num_layers, Vector::Zero(k));
        std::vector<Vector> c(num_layers, Vector::Zero(k));
        for (int t = 0; t < seq_len; ++t) {
            cache[b][t].resize(num_layers);
            Vector x = batch.inputs[b].col(t);
            for (int l = 0; l < num_layers; ++l) {
                StepCache& sc = cache[b][t][l];
                const LstmLayer& layer = params.lstm[l];
                sc.x = x;
                sc.h_prev = h[l];
                sc.c_prev = c[l];
                Vector gates = layer.w_in * x + layer.w_rec * h[l] + layer.bias;
                sc.gi = sigmoid_v(gates.segment(0, k));
                sc.gf = sigmoid_v(gates.segment(k, k));
                sc.gg = gates.segment(2 * k, k).array().tanh();
                sc.go = sigmoid_v(gates.segment(3 * k, k));
                sc.c = sc.gf.cwiseProduct(c[l]) + sc.gi.cwiseProduct(sc.gg);
                sc.tanh_c = sc.c.array().tanh();
                h[l] = sc.go.cwiseProduct(sc.tanh_c);
                c[l] = sc.c;
                if (!h[l].allFinite())
                    throw NumericalError("non-finite LSTM state, series " +
                                         std::to_string(series) + " step " +
                                         std::to_string(t));
                sc.mask = Vector::Constant(k, 1.0);
                if (use_dropout)
                    for (int j = 0; j < k; ++j)
                        sc.mask[j] = keep(rng) ? keep_scale : 0.0;
                x = h[l].cwiseProduct(sc.mask);
            }
            Vector y(proj_in);
            y << x, params.embeddings.row(series).transpose();
            y_cache[b][t] = y;
            double s_d = params.w_d.dot(y);
            sd_cache[b][t] = s_d;
            mus(b, t) = params.w_mu.dot(y);
            ds(b, t) = softplus(s_d);
            vs[t].row(b) = (params.w_v * y).transpose();
        }
    }

    // ---- emission loss and its gradient w.r.t. (mu, d, V) per step ----
    NetworkParams grads = zeros_like(params);
    std::vector<Matrix> dh_top(num_batch, Matrix::Zero(k, seq_len));

    double gaussian_nll = 0.0;
    for (int t = 0; t < seq_len; ++t) {
        LowRankGaussian g{mus.col(t), ds.col(t), vs[t]};
        LowRankLogpdfGrad lg;
        try {
            lg = logpdf_lowrank_grad(g, batch.targets.col(t));
        } catch (const CholeskyError& e) {
            throw NumericalError(std::string(e.what()) + " at slice step " +
                                 std::to_string(t));
        }
        gaussian_nll -= lg.logpdf;
        for (int b = 0; b < num_batch; ++b) {
            int series = batch.series_indices[b];
            // d loss / d (mu, s_d, v) for this series at this step
            double g_mu = -lg.d_mu[b];
            double g_sd = -lg.d_d[b] * sigmoid(sd_cache[b][t]);
            Vector g_v = -lg.d_v.row(b).transpose();

            const Vector& y = y_cache[b][t];
            grads.w_mu += g_mu * y;
            grads.w_d += g_sd * y;
            grads.w_v += g_v * y.transpose();
            Vector g_y = g_mu * params.w_mu + g_sd * params.w_d +
                         params.w_v.transpose() * g_v;
            grads.embeddings.row(series) += g_y.tail(embed_dim).transpose();
            dh_top[b].col(t) += g_y.head(k);
        }
    }

    // ---- backward through time, per series ----
    for (int b = 0; b < num_batch; ++b) {
        std::vector<Vector> dh_carry(num_layers, Vector::Zero(k));
        std::vector<Vector> dc_carry(num_layers, Vector::Zero(k));
        for (int t = seq_len - 1; t >= 0; --t) {
            std::vector<Vector> incoming(num_layers, Vector::Zero(k));
            incoming[num_layers - 1] =
                dh_top[b].col(t).cwiseProduct(cache[b][t][num_layers - 1].mask);
            for (int l = num_layers - 1; l >= 0; --l) {
                const StepCache& sc = cache[b][t][l];
                LstmLayer& glayer = grads.lstm[l];
                const LstmLayer& layer = params.lstm[l];
                Vector dh = incoming[l] + dh_carry[l];
                Vector d_go = dh.cwiseProduct(sc.tanh_c);
                Vector dc = dc_carry[l] +
                            dh.cwiseProduct(sc.go).cwiseProduct(
                                (1.0 - sc.tanh_c.array().square()).matrix());
                Vector d_gi = dc.cwiseProduct(sc.gg);
                Vector d_gg = dc.cwiseProduct(sc.gi);
                Vector d_gf = dc.cwiseProduct(sc.c_prev);
                dc_carry[l] = dc.cwiseProduct(sc.gf);

                Vector dgates(4 * k);
                dgates.segment(0, k) =
                    d_gi.array() * sc.gi.array() * (1.0 - sc.gi.array());
                dgates.segment(k, k) =
                    d_gf.array() * sc.gf.array() * (1.0 - sc.gf.array());
                dgates.segment(2 * k, k) =
                    d_gg.array() * (1.0 - sc.gg.array().square());
                dgates.segment(3 * k, k) =
                    d_go.array() * sc.go.array() * (1.0 - sc.go.array());

                glayer.w_in += dgates * sc.x.transpose();
                glayer.w_rec += dgates * sc.h_prev.transpose();
                glayer.bias += dgates;
                dh_carry[l] = layer.w_rec.transpose() * dgates;
                if (l > 0) {
                    Vector dx = layer.w_in.transpose() * dgates;
                    incoming[l - 1] += dx.cwiseProduct(cache[b][t][l - 1].mask);
                }
            }
        }
    }

    LossGrads out;
    out.gaussian_nll = gaussian_nll;
    out.loss = gaussian_nll - batch.correction_sum;
    out.grads = std::move(grads);
    if (!std::isfinite(out.loss)) throw NumericalError("non-finite training loss");
    return out;
}

}  // namespace lrcp
