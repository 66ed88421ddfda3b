#include "lrcp/forecasting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace lrcp {

ConditionedState condition(const Model& model, const TransformedPanel& tp,
                           const FeaturePlan& plan, int origin) {
    const int n = static_cast<int>(tp.x.rows());
    const int context = model.context_length;
    if (origin < context)
        throw DataError("condition: need at least T' = " +
                        std::to_string(context) + " observed steps");
    if (origin > tp.x.cols())
        throw DataError("condition: origin beyond the observed panel");

    ConditionedState cond;
    cond.origin = origin;
    History full{tp.x, 0};
    for (int i = 0; i < n; ++i) {
        NetworkState state = zero_state(model.params);
        for (int t = origin - context; t < origin; ++t)
            state = lstm_step(model.params, state, build_input(plan, full, i, t));
        cond.states.push_back(std::move(state));
    }
    int keep = std::min(plan.max_lag, origin);
    cond.history.base = origin - keep;
    cond.history.x = tp.x.middleCols(origin - keep, keep);
    return cond;
}

ForecastSamples rollout(const Model& model, const ConditionedState& cond,
                        const FeaturePlan& plan, int horizon, int num_samples,
                        std::uint64_t seed) {
    if (num_samples < 1) throw DataError("rollout: need at least one sample");
    const int n = static_cast<int>(cond.states.size());
    ForecastSamples fc;
    fc.start_time = cond.origin;
    fc.steps.assign(horizon, Matrix(num_samples, n));

    for (int path = 0; path < num_samples; ++path) {
        std::seed_seq seq{static_cast<std::uint64_t>(seed),
                          static_cast<std::uint64_t>(path)};
        Rng rng(seq);
        std::vector<NetworkState> states = cond.states;
        History hist = cond.history;
        hist.x.conservativeResize(n, hist.x.cols() + horizon);

        for (int j = 0; j < horizon; ++j) {
            int t = cond.origin + j;
            LowRankGaussian g;
            g.mu = Vector(n);
            g.d = Vector(n);
            g.v = Matrix(n, model.params.rank());
            for (int i = 0; i < n; ++i) {
                states[i] = lstm_step(model.params, states[i],
                                      build_input(plan, hist, i, t));
                Projection proj =
                    project(model.params, states[i].h.back(), i);
                g.mu[i] = proj.mu;
                g.d[i] = proj.d;
                g.v.row(i) = proj.v.transpose();
            }
            Matrix draw = sample_lowrank(g, rng, 1);
            for (int i = 0; i < n; ++i) {
                double x = draw(0, i);
                if (!std::isfinite(x))
                    throw NumericalError("non-finite forecast sample");
                hist.x(i, t - hist.base) = x;
                fc.steps[j](path, i) = model.inverse(i, x);
            }
        }
    }
    return fc;
}

CovarianceTrace covariance_trace(const Model& model, const TransformedPanel& tp,
                                 const FeaturePlan& plan, int t_begin,
                                 int t_end) {
    const int n = static_cast<int>(tp.x.rows());
    if (t_begin < 0 || t_end > tp.x.cols() || t_begin >= t_end)
        throw DataError("covariance_trace: bad range");
    CovarianceTrace trace;
    History full{tp.x, 0};
    std::vector<NetworkState> states(n, zero_state(model.params));
    for (int t = 0; t < t_end; ++t) {
        LowRankGaussian g;
        g.mu = Vector(n);
        g.d = Vector(n);
        g.v = Matrix(n, model.params.rank());
        for (int i = 0; i < n; ++i) {
            states[i] = lstm_step(model.params, states[i],
                                  build_input(plan, full, i, t));
            if (t < t_begin) continue;
            Projection proj = project(model.params, states[i].h.back(), i);
            g.mu[i] = proj.mu;
            g.d[i] = proj.d;
            g.v.row(i) = proj.v.transpose();
        }
        if (t < t_begin) continue;
        trace.t.push_back(t);
        trace.mu.push_back(g.mu);
        Matrix cov = g.v * g.v.transpose();
        cov.diagonal() += g.d;
        trace.cov.push_back(std::move(cov));
    }
    return trace;
}

void write_samples_csv(const ForecastSamples& fc,
                       const std::vector<std::string>& series_ids,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write samples file: " + path);
    out << "sample_id,series_id,step,value\n";
    out.precision(17);
    for (int s = 0; s < fc.num_samples(); ++s)
        for (int i = 0; i < fc.num_series(); ++i)
            for (int t = 0; t < fc.horizon(); ++t)
                out << s << "," << series_ids[i] << "," << t << ","
                    << fc.steps[t](s, i) << "\n";
}

void write_quantiles_csv(const ForecastSamples& fc,
                         const std::vector<std::string>& series_ids,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write quantiles file: " + path);
    out << "series_id,step";
    for (int q = 1; q <= 9; ++q) out << ",q" << q * 10;
    out << "\n";
    out.precision(17);
    std::vector<double> col(fc.num_samples());
    for (int i = 0; i < fc.num_series(); ++i) {
        for (int t = 0; t < fc.horizon(); ++t) {
            for (int s = 0; s < fc.num_samples(); ++s) col[s] = fc.steps[t](s, i);
            std::sort(col.begin(), col.end());
            out << series_ids[i] << "," << t;
            for (int q = 1; q <= 9; ++q) {
                int idx = static_cast<int>(std::ceil(0.1 * q * col.size())) - 1;
                idx = std::clamp(idx, 0, static_cast<int>(col.size()) - 1);
                out << "," << col[idx];
            }
            out << "\n";
        }
    }
}

void write_covariance_csv(const CovarianceTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write covariance file: " + path);
    const int n = trace.mu.empty() ? 0 : static_cast<int>(trace.mu.front().size());
    out << "t";
    for (int i = 0; i < n; ++i) out << ",mu" << i;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) out << ",cov" << i << "_" << j;
    out << "\n";
    out.precision(17);
    for (size_t row = 0; row < trace.t.size(); ++row) {
        out << trace.t[row];
        for (int i = 0; i < n; ++i) out << "," << trace.mu[row][i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) out << "," << trace.cov[row](i, j);
        out << "\n";
    }
}

}  // namespace lrcp
