#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "lrcp/checkpoint.hpp"
#include "lrcp/forecasting.hpp"
#include "lrcp/synthetic.hpp"
#include "lrcp/training.hpp"

using nlohmann::json;
using namespace lrcp;

namespace {

// Everything a command can need: training hyperparameters, synthetic-data
// controls, file paths and evaluation options, overridable from a JSON
// config file and per-key command line flags.
struct RunConfig {
    TrainConfig train;
    SyntheticSpec synth;

    std::string data_path;
    std::string frequency = "integer";
    std::string checkpoint_path = "model.json";
    std::string trace_path = "trace.csv";
    std::string samples_path = "samples.csv";
    std::string quantiles_path = "quantiles.csv";
    std::string covariance_path;  // empty: skip the covariance trace
    std::string truth_path = "truth.csv";
    std::string metrics_path = "metrics.json";

    int origin = -1;  // forecast origin; -1 means the panel end
    int windows = 1;
    int stride = 0;  // 0 means stride = horizon
};

template <typename T>
void pick(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }

    static const std::set<std::string> known{
        "learning_rate", "batch_size", "total_updates", "clip_norm", "l2",
        "decay_patience", "decay_factor", "smooth_window", "rank", "dim_batch",
        "ecdf_window", "num_eval_samples", "horizon", "hidden", "num_layers",
        "embed_dim", "dropout", "jitter_count", "jitter_real", "use_copula",
        "seed", "num_series", "num_steps", "sigma1", "sigma2", "a", "b", "dt",
        "data_path", "frequency", "checkpoint_path", "trace_path",
        "samples_path", "quantiles_path", "covariance_path", "truth_path",
        "metrics_path", "origin", "windows", "stride"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown config key: " + it.key());

    try {
        pick(j, "learning_rate", cfg.train.learning_rate);
        pick(j, "batch_size", cfg.train.batch_size);
        pick(j, "total_updates", cfg.train.total_updates);
        pick(j, "clip_norm", cfg.train.clip_norm);
        pick(j, "l2", cfg.train.l2);
        pick(j, "decay_patience", cfg.train.decay_patience);
        pick(j, "decay_factor", cfg.train.decay_factor);
        pick(j, "smooth_window", cfg.train.smooth_window);
        pick(j, "rank", cfg.train.rank);
        pick(j, "dim_batch", cfg.train.dim_batch);
        pick(j, "ecdf_window", cfg.train.ecdf_window);
        pick(j, "num_eval_samples", cfg.train.num_eval_samples);
        pick(j, "horizon", cfg.train.horizon);
        pick(j, "hidden", cfg.train.hidden);
        pick(j, "num_layers", cfg.train.num_layers);
        pick(j, "embed_dim", cfg.train.embed_dim);
        pick(j, "dropout", cfg.train.dropout);
        pick(j, "jitter_count", cfg.train.jitter_count);
        pick(j, "jitter_real", cfg.train.jitter_real);
        pick(j, "use_copula", cfg.train.use_copula);
        pick(j, "seed", cfg.train.seed);
        pick(j, "num_series", cfg.synth.num_series);
        pick(j, "num_steps", cfg.synth.num_steps);
        pick(j, "sigma1", cfg.synth.sigma1);
        pick(j, "sigma2", cfg.synth.sigma2);
        pick(j, "a", cfg.synth.a);
        pick(j, "b", cfg.synth.b);
        pick(j, "dt", cfg.synth.dt);
        pick(j, "data_path", cfg.data_path);
        pick(j, "frequency", cfg.frequency);
        pick(j, "checkpoint_path", cfg.checkpoint_path);
        pick(j, "trace_path", cfg.trace_path);
        pick(j, "samples_path", cfg.samples_path);
        pick(j, "quantiles_path", cfg.quantiles_path);
        pick(j, "covariance_path", cfg.covariance_path);
        pick(j, "truth_path", cfg.truth_path);
        pick(j, "metrics_path", cfg.metrics_path);
        pick(j, "origin", cfg.origin);
        pick(j, "windows", cfg.windows);
        pick(j, "stride", cfg.stride);
    } catch (const json::exception& e) {
        throw ConfigError("config value error: " + std::string(e.what()));
    }
    cfg.synth.seed = cfg.train.seed;
    return cfg;
}

int cmd_synth(const RunConfig& cfg) {
    SyntheticSpec spec = cfg.synth;
    spec.seed = cfg.train.seed;
    Rng rng(spec.seed);
    auto data = generate(spec, rng);
    std::string panel_path = cfg.data_path.empty() ? "synthetic.csv" : cfg.data_path;
    write_panel(data.panel, panel_path);
    write_truth(data.truth, cfg.truth_path);
    std::cout << "wrote " << panel_path << " (" << data.panel.num_series()
              << " series x " << data.panel.num_steps() << " steps) and "
              << cfg.truth_path << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw ConfigError("train: data_path is required");
    auto panel = read_panel(cfg.data_path, frequency_from_string(cfg.frequency));
    Rng rng(cfg.train.seed);
    auto result = fit(panel, cfg.train, rng);
    save_model(result.model, cfg.checkpoint_path);
    write_trace_csv(result.trace, cfg.trace_path);
    double last = result.trace.empty() ? std::nan("") : result.trace.back().loss;
    std::cout << "trained " << cfg.train.total_updates << " updates, final loss "
              << last << "; wrote " << cfg.checkpoint_path << " and "
              << cfg.trace_path << "\n";
    return 0;
}

int cmd_forecast(const RunConfig& cfg) {
    if (cfg.data_path.empty())
        throw ConfigError("forecast: data_path is required");
    Model model = load_model(cfg.checkpoint_path);
    auto panel = read_panel(cfg.data_path, model.frequency);
    int horizon = cfg.train.horizon;
    int origin = cfg.origin < 0 ? panel.num_steps() : cfg.origin;
    auto plan = make_feature_plan(
        panel.timestamps, panel.frequency,
        std::max(0, origin + horizon - panel.num_steps()));
    auto tp = transform_panel(panel, model);
    auto cond = condition(model, tp, plan, origin);
    auto fc = rollout(model, cond, plan, horizon, cfg.train.num_eval_samples,
                      cfg.train.seed);
    write_samples_csv(fc, model.series_ids, cfg.samples_path);
    write_quantiles_csv(fc, model.series_ids, cfg.quantiles_path);
    if (!cfg.covariance_path.empty()) {
        auto trace = covariance_trace(model, tp, plan,
                                      std::max(0, origin - horizon), origin);
        write_covariance_csv(trace, cfg.covariance_path);
    }
    std::cout << "forecast origin " << origin << ", horizon " << horizon << ", "
              << fc.num_samples() << " samples; wrote " << cfg.samples_path
              << " and " << cfg.quantiles_path << "\n";
    return 0;
}

ForecastSamples read_samples_csv(const std::string& path,
                                 const std::vector<std::string>& series_ids) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open samples file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "sample_id,series_id,step,value")
        throw DataError("bad samples header in " + path);
    std::map<std::string, int> id_index;
    for (size_t i = 0; i < series_ids.size(); ++i)
        id_index[series_ids[i]] = static_cast<int>(i);
    int max_sample = -1, max_step = -1;
    struct Row {
        int s, i, t;
        double v;
    };
    std::vector<Row> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string sample, id, step, value;
        if (!std::getline(ls, sample, ',') || !std::getline(ls, id, ',') ||
            !std::getline(ls, step, ',') || !std::getline(ls, value))
            throw DataError("bad samples row " + std::to_string(lineno));
        auto it = id_index.find(id);
        if (it == id_index.end())
            throw DataError("unknown series id '" + id + "' in " + path);
        try {
            Row r{std::stoi(sample), it->second, std::stoi(step),
                  std::stod(value)};
            rows.push_back(r);
            max_sample = std::max(max_sample, r.s);
            max_step = std::max(max_step, r.t);
        } catch (const std::exception&) {
            throw DataError("bad samples row " + std::to_string(lineno));
        }
    }
    if (rows.empty()) throw DataError("empty samples file: " + path);
    ForecastSamples fc;
    fc.steps.assign(max_step + 1,
                    Matrix::Zero(max_sample + 1, series_ids.size()));
    for (const auto& r : rows) fc.steps[r.t](r.s, r.i) = r.v;
    return fc;
}

int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& sample_files,
                 std::vector<int> origins) {
    if (cfg.data_path.empty())
        throw ConfigError("evaluate: data_path is required");
    if (sample_files.empty())
        throw ConfigError("evaluate: at least one --samples file is required");
    auto panel = read_panel(cfg.data_path, frequency_from_string(cfg.frequency));
    int horizon = cfg.train.horizon;
    if (origins.empty()) {
        // default: equally spaced windows ending at the panel end
        int stride = cfg.stride > 0 ? cfg.stride : horizon;
        auto ws = rolling_windows(panel, horizon, int(sample_files.size()), stride);
        for (const auto& w : ws) origins.push_back(w.train_end);
    }
    if (origins.size() != sample_files.size())
        throw ConfigError("evaluate: need one --origin per --samples file");

    json out;
    out["windows"] = json::array();
    double crps = 0, crps_s = 0, mse_v = 0, mse_s = 0;
    for (size_t w = 0; w < sample_files.size(); ++w) {
        auto fc = read_samples_csv(sample_files[w], panel.series_ids);
        int begin = origins[w];
        if (begin + fc.horizon() > panel.num_steps())
            throw DataError("evaluate: window past the end of the panel");
        Matrix actuals = panel.values.middleCols(begin, fc.horizon());
        auto r = evaluate_forecast(fc, actuals);
        json jw{{"origin", begin},       {"crps", r.crps},
                {"crps_sum", r.crps_sum}, {"mse", r.mse},
                {"mse_sum", r.mse_sum},   {"num_samples", r.num_samples},
                {"horizon", r.horizon}};
        out["windows"].push_back(jw);
        crps += r.crps;
        crps_s += r.crps_sum;
        mse_v += r.mse;
        mse_s += r.mse_sum;
    }
    double k = double(sample_files.size());
    out["crps"] = crps / k;
    out["crps_sum"] = crps_s / k;
    out["mse"] = mse_v / k;
    out["mse_sum"] = mse_s / k;
    out["num_windows"] = sample_files.size();
    atomic_write_text(cfg.metrics_path, out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
    // tiny fixed model: 3 series, batch of 2, 4 cells, rank 2, embedding 2,
    // 2 layers, 5 steps
    Rng rng(cfg.train.seed);
    const int input_width = 4, steps = 5;
    auto params = init_params(3, input_width, 4, 2, 2, 2, 0.0, rng);
    NetBatch batch;
    batch.series_indices = {0, 2};
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int b = 0; b < 2; ++b) {
        Matrix in(input_width, steps);
        for (long i = 0; i < in.size(); ++i) in.data()[i] = gauss(rng);
        batch.inputs.push_back(in);
    }
    batch.targets = Matrix(2, steps);
    for (long i = 0; i < batch.targets.size(); ++i)
        batch.targets.data()[i] = 0.5 * gauss(rng);

    auto report = gradcheck(params, batch);
    for (const auto& t : report.tensors)
        std::cout << t.tensor << " max_rel_error " << t.max_rel_error << "\n";
    bool pass = report.worst <= 1e-4;
    std::cout << (pass ? "PASS" : "FAIL") << " worst " << report.worst << "\n";
    return pass ? 0 : 4;
}

int cmd_bench(const RunConfig& cfg) {
    using clock = std::chrono::steady_clock;
    auto time_best_of = [](int reps, const std::function<void()>& f) {
        double best = 1e300;
        for (int k = 0; k < reps; ++k) {
            auto t0 = clock::now();
            f();
            auto t1 = clock::now();
            best = std::min(best,
                            std::chrono::duration<double>(t1 - t0).count());
        }
        return best;
    };

    Rng rng(cfg.train.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::cout << "logpdf scaling at r=10\n";
    std::cout << "N,seconds,ratio_vs_prev\n";
    double prev = 0.0;
    volatile double sink = 0.0;
    for (int n : {1024, 2048, 4096}) {
        LowRankGaussian g;
        g.mu = Vector::Zero(n);
        g.d = Vector::Constant(n, 1.0);
        g.v = Matrix(n, 10);
        for (long i = 0; i < g.v.size(); ++i) g.v.data()[i] = 0.1 * gauss(rng);
        Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = gauss(rng);
        double secs = time_best_of(
            20, [&] { sink = sink + logpdf_lowrank(g, x); });
        std::cout << n << "," << secs << ","
                  << (prev > 0 ? secs / prev : 0.0) << "\n";
        prev = secs;
    }

    std::cout << "\nrollout scaling with sample count\n";
    std::cout << "S,seconds,ratio_vs_prev\n";
    SyntheticSpec spec = cfg.synth;
    spec.num_steps = 200;
    auto data = generate(spec, rng);
    Model model;
    auto plan = make_feature_plan(data.panel.timestamps, data.panel.frequency,
                                  cfg.train.horizon);
    model.params =
        init_params(data.panel.num_series(), plan.input_width(), cfg.train.hidden,
                    cfg.train.embed_dim, cfg.train.rank, cfg.train.num_layers,
                    0.0, rng);
    model.context_length = cfg.train.horizon;
    model.series_ids = data.panel.series_ids;
    auto tp = transform_panel(data.panel, model);
    auto cond = condition(model, tp, plan, data.panel.num_steps());
    prev = 0.0;
    for (int s : {100, 200, 400}) {
        double secs = time_best_of(3, [&] {
            auto fc = rollout(model, cond, plan, cfg.train.horizon, s, 1);
            sink = sink + fc.steps[0](0, 0);
        });
        std::cout << s << "," << secs << ","
                  << (prev > 0 ? secs / prev : 0.0) << "\n";
        prev = secs;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Low-rank Gaussian-copula process forecaster.\n"
        "Defaults: lr 1e-3, batch 16, clip 10, rank 10, dim batch 20, ECDF "
        "window 100, 400 eval samples, horizon 24, 40 LSTM cells x 2 layers."};
    app.require_subcommand(1);

    std::string config_path;

    // per-key overrides, applied after the config file
    struct Overrides {
        std::optional<int> rank, horizon, windows, num_eval_samples,
            total_updates, origin;
        std::optional<std::uint64_t> seed;
        std::optional<std::string> data, checkpoint, out_prefix, frequency;
    } ov;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--rank", ov.rank, "low-rank factor count r");
        cmd->add_option("--seed", ov.seed, "RNG seed");
        cmd->add_option("--num-eval-samples", ov.num_eval_samples,
                        "Monte Carlo sample count");
        cmd->add_option("--horizon", ov.horizon, "forecast horizon tau");
        cmd->add_option("--windows", ov.windows, "rolling evaluation windows");
        cmd->add_option("--total-updates", ov.total_updates,
                        "gradient updates");
        cmd->add_option("--origin", ov.origin, "forecast origin index");
        cmd->add_option("--data", ov.data, "panel CSV path");
        cmd->add_option("--checkpoint", ov.checkpoint, "checkpoint path");
        cmd->add_option("--frequency", ov.frequency,
                        "integer|30min|hourly|daily");
    };

    auto* synth = app.add_subcommand("synth", "generate the synthetic dataset");
    auto* train = app.add_subcommand("train", "fit a model by maximum likelihood");
    auto* forecast = app.add_subcommand("forecast", "Monte Carlo forecast");
    auto* evaluate = app.add_subcommand("evaluate", "score forecasts (CRPS, MSE)");
    auto* gradcheck_cmd =
        app.add_subcommand("gradcheck", "verify gradients by finite differences");
    auto* bench = app.add_subcommand("bench", "likelihood and rollout timings");
    std::vector<std::string> sample_files;
    std::vector<int> origins;
    for (auto* cmd : {synth, train, forecast, evaluate, gradcheck_cmd, bench})
        add_common(cmd);
    evaluate->add_option("--samples", sample_files,
                         "forecast samples CSV (repeat per window)");
    evaluate->add_option("--origins", origins,
                         "forecast origin per samples file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (ov.rank) cfg.train.rank = *ov.rank;
        if (ov.seed) cfg.train.seed = *ov.seed;
        if (ov.num_eval_samples) cfg.train.num_eval_samples = *ov.num_eval_samples;
        if (ov.horizon) cfg.train.horizon = *ov.horizon;
        if (ov.windows) cfg.windows = *ov.windows;
        if (ov.total_updates) cfg.train.total_updates = *ov.total_updates;
        if (ov.origin) cfg.origin = *ov.origin;
        if (ov.data) cfg.data_path = *ov.data;
        if (ov.checkpoint) cfg.checkpoint_path = *ov.checkpoint;
        if (ov.frequency) cfg.frequency = *ov.frequency;
        cfg.synth.seed = cfg.train.seed;
        cfg.train.validate();

        if (*synth) return cmd_synth(cfg);
        if (*train) return cmd_train(cfg);
        if (*forecast) return cmd_forecast(cfg);
        if (*evaluate) return cmd_evaluate(cfg, sample_files, origins);
        if (*gradcheck_cmd) return cmd_gradcheck(cfg);
        if (*bench) return cmd_bench(cfg);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
