#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lrcp/checkpoint.hpp"
#include "lrcp/forecasting.hpp"
#include "lrcp/metrics.hpp"
#include "lrcp/synthetic.hpp"
#include "lrcp/training.hpp"

namespace py = pybind11;
using namespace lrcp;

namespace {

TimeSeriesPanel panel_from_values(const Matrix& values) {
    TimeSeriesPanel panel;
    panel.values = values;
    panel.frequency = Frequency::Integer;
    panel.domain.assign(values.rows(), Domain::Real);
    for (int i = 0; i < values.rows(); ++i)
        panel.series_ids.push_back("s" + std::to_string(i));
    panel.timestamps.resize(values.cols());
    for (int t = 0; t < values.cols(); ++t) panel.timestamps[t] = t;
    return panel;
}

Model train_values(const Matrix& values, int total_updates, int horizon,
                   int rank, int hidden, int num_layers, int embed_dim,
                   int ecdf_window, double learning_rate, int batch_size,
                   bool use_copula, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.total_updates = total_updates;
    cfg.horizon = horizon;
    cfg.rank = rank;
    cfg.hidden = hidden;
    cfg.num_layers = num_layers;
    cfg.embed_dim = embed_dim;
    cfg.ecdf_window = ecdf_window;
    cfg.learning_rate = learning_rate;
    cfg.batch_size = batch_size;
    cfg.use_copula = use_copula;
    cfg.seed = seed;
    Rng rng(seed);
    return fit(panel_from_values(values), cfg, rng).model;
}

py::array_t<double> forecast_values(const Model& model, const Matrix& values,
                                    int horizon, int num_samples,
                                    std::uint64_t seed) {
    TimeSeriesPanel panel = panel_from_values(values);
    auto plan = make_feature_plan(panel.timestamps, panel.frequency, horizon);
    auto tp = transform_panel(panel, model);
    auto cond = condition(model, tp, plan, panel.num_steps());
    auto fc = rollout(model, cond, plan, horizon, num_samples, seed);
    py::array_t<double> out(
        {fc.horizon(), fc.num_samples(), fc.num_series()});
    auto view = out.mutable_unchecked<3>();
    for (int t = 0; t < fc.horizon(); ++t)
        for (int s = 0; s < fc.num_samples(); ++s)
            for (int i = 0; i < fc.num_series(); ++i)
                view(t, s, i) = fc.steps[t](s, i);
    return out;
}

py::dict evaluate_np(py::array_t<double, py::array::c_style> samples,
                     const Matrix& actuals) {
    auto view = samples.unchecked<3>();  // horizon x S x N
    ForecastSamples fc;
    for (py::ssize_t t = 0; t < view.shape(0); ++t) {
        Matrix step(view.shape(1), view.shape(2));
        for (py::ssize_t s = 0; s < view.shape(1); ++s)
            for (py::ssize_t i = 0; i < view.shape(2); ++i)
                step(s, i) = view(t, s, i);
        fc.steps.push_back(std::move(step));
    }
    auto r = evaluate_forecast(fc, actuals);
    py::dict out;
    out["crps"] = r.crps;
    out["crps_sum"] = r.crps_sum;
    out["mse"] = r.mse;
    out["mse_sum"] = r.mse_sum;
    out["num_samples"] = r.num_samples;
    out["horizon"] = r.horizon;
    return out;
}

}  // namespace

PYBIND11_MODULE(_lrcp, m) {
    m.doc() = "Low-rank Gaussian-copula process forecasting";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError",
                                           PyExc_ArithmeticError);

    py::class_<Model>(m, "Model")
        .def_property_readonly("num_series",
                               [](const Model& mo) {
                                   return mo.params.num_series();
                               })
        .def_property_readonly("rank",
                               [](const Model& mo) { return mo.params.rank(); })
        .def_property_readonly(
            "context_length",
            [](const Model& mo) { return mo.context_length; });

    m.def("logpdf_lowrank",
          [](const Vector& mu, const Vector& d, const Matrix& v,
             const Vector& x) {
              return logpdf_lowrank(LowRankGaussian{mu, d, v}, x);
          },
          py::arg("mu"), py::arg("d"), py::arg("v"), py::arg("x"),
          "log N(x; mu, diag(d) + v v^T) via the Woodbury identity");
    m.def("dense_logpdf",
          [](const Vector& mu, const Vector& d, const Matrix& v,
             const Vector& x) {
              return dense_oracle_logpdf(LowRankGaussian{mu, d, v}, x);
          },
          py::arg("mu"), py::arg("d"), py::arg("v"), py::arg("x"),
          "O(N^3) dense reference implementation");

    m.def("synthetic_panel",
          [](int num_series, int num_steps, std::uint64_t seed) {
              SyntheticSpec spec;
              spec.num_series = num_series;
              spec.num_steps = num_steps;
              spec.seed = seed;
              Rng rng(seed);
              return generate(spec, rng).panel.values;
          },
          py::arg("num_series") = 4, py::arg("num_steps") = 1000,
          py::arg("seed") = 0,
          "rank-2 oscillating synthetic panel, shape (N, T)");

    m.def("train", &train_values, py::arg("values"),
          py::arg("total_updates") = 100, py::arg("horizon") = 8,
          py::arg("rank") = 2, py::arg("hidden") = 10,
          py::arg("num_layers") = 2, py::arg("embed_dim") = 2,
          py::arg("ecdf_window") = 100, py::arg("learning_rate") = 1e-3,
          py::arg("batch_size") = 4, py::arg("use_copula") = true,
          py::arg("seed") = 0, "maximum-likelihood fit on an (N, T) panel");

    m.def("forecast", &forecast_values, py::arg("model"), py::arg("values"),
          py::arg("horizon"), py::arg("num_samples") = 100, py::arg("seed") = 0,
          "Monte Carlo forecast, shape (horizon, num_samples, N)");

    m.def("evaluate", &evaluate_np, py::arg("samples"), py::arg("actuals"),
          "CRPS / CRPS-Sum / MSE metrics from a (horizon, S, N) sample cube");

    m.def("crps_from_samples",
          [](std::vector<double> samples, double y) {
              return crps_from_samples(std::move(samples), y);
          },
          py::arg("samples"), py::arg("y"));

    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));
}
