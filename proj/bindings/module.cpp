#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stockhmm/errors.hpp"
#include "stockhmm/evaluation.hpp"
#include "stockhmm/features.hpp"
#include "stockhmm/fluct_predictor.hpp"
#include "stockhmm/hmm.hpp"
#include "stockhmm/map_predictor.hpp"
#include "stockhmm/market_data.hpp"
#include "stockhmm/serialization.hpp"

namespace py = pybind11;
using namespace stockhmm;

PYBIND11_MODULE(_stockhmm, m) {
  m.doc() = "Gaussian-HMM stock closing-price forecasting";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<StockBar>(m, "StockBar")
      .def(py::init<>())
      .def(py::init([](std::string date, double open, double high, double low, double close,
                       long long volume, std::optional<double> prev_close) {
             return StockBar{std::move(date), open, high, low, close, volume, prev_close};
           }),
           py::arg("date"), py::arg("open"), py::arg("high"), py::arg("low"), py::arg("close"),
           py::arg("volume"), py::arg("prev_close") = std::nullopt)
      .def_readwrite("date", &StockBar::date)
      .def_readwrite("open", &StockBar::open)
      .def_readwrite("high", &StockBar::high)
      .def_readwrite("low", &StockBar::low)
      .def_readwrite("close", &StockBar::close)
      .def_readwrite("volume", &StockBar::volume)
      .def_readwrite("prev_close", &StockBar::prev_close)
      .def("__eq__", [](const StockBar& a, const StockBar& b) { return a == b; })
      .def("__repr__", [](const StockBar& b) {
        return "StockBar(" + b.date + ", o=" + std::to_string(b.open) +
               ", c=" + std::to_string(b.close) + ")";
      });

  py::class_<SymbolSeries>(m, "SymbolSeries")
      .def(py::init<>())
      .def(py::init([](std::string symbol, std::vector<StockBar> bars) {
             return SymbolSeries{std::move(symbol), std::move(bars)};
           }),
           py::arg("symbol"), py::arg("bars"))
      .def_readwrite("symbol", &SymbolSeries::symbol)
      .def_readwrite("bars", &SymbolSeries::bars)
      .def("__len__", &SymbolSeries::size);

  py::class_<SplitSeries>(m, "SplitSeries")
      .def_readonly("train", &SplitSeries::train)
      .def_readonly("test", &SplitSeries::test);

  py::class_<CsvLoadResult>(m, "CsvLoadResult")
      .def_readonly("series", &CsvLoadResult::series)
      .def_readonly("skipped", &CsvLoadResult::skipped);

  py::class_<ArchiveLoadResult>(m, "ArchiveLoadResult")
      .def_readonly("series", &ArchiveLoadResult::series)
      .def_readonly("skipped", &ArchiveLoadResult::skipped);

  m.def("load_json_archive", &load_json_archive, py::arg("path"));
  m.def("load_csv", &load_csv, py::arg("path"), py::arg("symbol"));
  m.def("clean", &clean, py::arg("series"));
  m.def("chronological_split", &chronological_split, py::arg("series"),
        py::arg("train_fraction"));

  py::class_<ObservationVector>(m, "ObservationVector")
      .def(py::init<>())
      .def(py::init([](double change, double high, double low) {
             return ObservationVector{change, high, low};
           }),
           py::arg("frac_change"), py::arg("frac_high"), py::arg("frac_low"))
      .def_readwrite("frac_change", &ObservationVector::frac_change)
      .def_readwrite("frac_high", &ObservationVector::frac_high)
      .def_readwrite("frac_low", &ObservationVector::frac_low)
      .def("__eq__",
           [](const ObservationVector& a, const ObservationVector& b) { return a == b; })
      .def("__repr__", [](const ObservationVector& o) {
        return "ObservationVector(" + std::to_string(o.frac_change) + ", " +
               std::to_string(o.frac_high) + ", " + std::to_string(o.frac_low) + ")";
      });

  py::class_<DeltaObservation>(m, "DeltaObservation")
      .def(py::init<>())
      .def(py::init([](double delta, double volume) { return DeltaObservation{delta, volume}; }),
           py::arg("close_delta"), py::arg("volume"))
      .def_readwrite("close_delta", &DeltaObservation::close_delta)
      .def_readwrite("volume", &DeltaObservation::volume);

  py::class_<FractionalFeatures>(m, "FractionalFeatures")
      .def_readonly("observations", &FractionalFeatures::observations)
      .def_readonly("dropped_indices", &FractionalFeatures::dropped_indices);

  m.def("fractional_features", &fractional_features, py::arg("series"));
  m.def("delta_features", &delta_features, py::arg("series"));
  m.def("to_matrix",
        py::overload_cast<const std::vector<ObservationVector>&>(&to_matrix),
        py::arg("observations"));
  m.def("to_matrix", py::overload_cast<const std::vector<DeltaObservation>&>(&to_matrix),
        py::arg("observations"));

  py::class_<GaussianHmm>(m, "GaussianHmm")
      .def(py::init<>())
      .def_readwrite("n_states", &GaussianHmm::n_states)
      .def_readwrite("dim", &GaussianHmm::dim)
      .def_readwrite("start_prob", &GaussianHmm::start_prob)
      .def_readwrite("transition", &GaussianHmm::transition)
      .def_readwrite("means", &GaussianHmm::means)
      .def_readwrite("covariances", &GaussianHmm::covariances)
      .def("validate", &GaussianHmm::validate);

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init([](int max_iterations, double tolerance, double regularization_floor,
                       std::uint64_t seed) {
             FitConfig config;
             config.max_iterations = max_iterations;
             config.tolerance = tolerance;
             config.regularization_floor = regularization_floor;
             config.seed = seed;
             return config;
           }),
           py::arg("max_iterations") = FitConfig{}.max_iterations,
           py::arg("tolerance") = FitConfig{}.tolerance,
           py::arg("regularization_floor") = FitConfig{}.regularization_floor,
           py::arg("seed") = FitConfig{}.seed)
      .def_readwrite("max_iterations", &FitConfig::max_iterations)
      .def_readwrite("tolerance", &FitConfig::tolerance)
      .def_readwrite("regularization_floor", &FitConfig::regularization_floor)
      .def_readwrite("seed", &FitConfig::seed);

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("iterations_run", &FitReport::iterations_run)
      .def_readonly("log_likelihood_trace", &FitReport::log_likelihood_trace)
      .def_readonly("converged", &FitReport::converged)
      .def_readonly("warnings", &FitReport::warnings);

  py::class_<ForwardResult>(m, "ForwardResult")
      .def_readonly("log_alpha", &ForwardResult::log_alpha)
      .def_readonly("log_likelihood", &ForwardResult::log_likelihood);

  m.def("log_gaussian_density", &log_gaussian_density, py::arg("x"), py::arg("mean"),
        py::arg("covariance"));
  m.def("forward_pass", &forward_pass, py::arg("model"), py::arg("observations"));
  m.def("forward_log_likelihood", &forward_log_likelihood, py::arg("model"),
        py::arg("observations"));
  m.def(
      "fit_baum_welch",
      [](const Eigen::MatrixXd& observations, int n_states, const FitConfig& config,
         const IterationCallback& on_iteration) {
        return fit_baum_welch(observations, n_states, config, on_iteration);
      },
      py::arg("observations"), py::arg("n_states"), py::arg("config") = FitConfig{},
      py::arg("on_iteration") = IterationCallback{});

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("change_min", &GridSpec::change_min)
      .def_readwrite("change_max", &GridSpec::change_max)
      .def_readwrite("change_steps", &GridSpec::change_steps)
      .def_readwrite("high_min", &GridSpec::high_min)
      .def_readwrite("high_max", &GridSpec::high_max)
      .def_readwrite("high_steps", &GridSpec::high_steps)
      .def_readwrite("low_min", &GridSpec::low_min)
      .def_readwrite("low_max", &GridSpec::low_max)
      .def_readwrite("low_steps", &GridSpec::low_steps);

  py::class_<PredictorConfig>(m, "PredictorConfig")
      .def(py::init<>())
      .def_readwrite("latency_days", &PredictorConfig::latency_days)
      .def_readwrite("grid", &PredictorConfig::grid)
      .def_readwrite("jobs", &PredictorConfig::jobs);

  py::class_<Forecast>(m, "Forecast")
      .def_readonly("date", &Forecast::date)
      .def_readonly("open", &Forecast::open)
      .def_readonly("predicted_close", &Forecast::predicted_close)
      .def_readonly("actual_close", &Forecast::actual_close)
      .def_readonly("candidate", &Forecast::candidate)
      .def_readonly("log_likelihood", &Forecast::log_likelihood);

  py::class_<MapChoice>(m, "MapChoice")
      .def_readonly("best", &MapChoice::best)
      .def_readonly("score", &MapChoice::score)
      .def_readonly("index", &MapChoice::index);

  py::class_<IncrementalScorer>(m, "IncrementalScorer")
      .def(py::init<const GaussianHmm&, const std::vector<ObservationVector>&>(),
           py::arg("model"), py::arg("window"))
      .def("score", &IncrementalScorer::score, py::arg("candidate"));

  m.def("build_grid", &build_grid, py::arg("spec") = GridSpec{});
  m.def("map_next_observation", &map_next_observation, py::arg("model"), py::arg("window"),
        py::arg("grid"), py::arg("jobs") = 1);
  m.def("predict_close", &predict_close, py::arg("model"), py::arg("history"), py::arg("date"),
        py::arg("open_price"), py::arg("config") = PredictorConfig{});
  m.def("rolling_forecast", &rolling_forecast, py::arg("model"), py::arg("series"),
        py::arg("start_index"), py::arg("horizon"), py::arg("config") = PredictorConfig{});

  py::class_<FluctModel>(m, "FluctModel")
      .def_readwrite("hmm", &FluctModel::hmm)
      .def_readwrite("last_close", &FluctModel::last_close)
      .def_readwrite("posterior", &FluctModel::posterior);

  m.def(
      "fit_fluct",
      [](const SymbolSeries& series, int n_states, const FitConfig& config) {
        FitReport report;
        FluctModel model = fit_fluct(series, n_states, config, &report);
        return py::make_tuple(std::move(model), std::move(report));
      },
      py::arg("series"), py::arg("n_states"), py::arg("config") = FitConfig{});
  m.def("make_fluct_model", &make_fluct_model, py::arg("hmm"), py::arg("series"));
  m.def("advance_posterior", &advance_posterior, py::arg("model"), py::arg("observation"));
  m.def("predict_next_delta", &predict_next_delta, py::arg("model"));
  m.def("predict_close_fluct", &predict_close_fluct, py::arg("model"), py::arg("prev_close"));
  m.def("rolling_forecast_fluct", &rolling_forecast_fluct, py::arg("model"), py::arg("series"),
        py::arg("start_index"), py::arg("horizon"));

  py::enum_<Method>(m, "Method")
      .value("map_fractional", Method::map_fractional)
      .value("successive_fluctuation", Method::successive_fluctuation);

  m.def("method_name", &method_name, py::arg("method"));
  m.def("parse_method", &parse_method, py::arg("name"));
  m.def("mae", &mae, py::arg("actual"), py::arg("predicted"));
  m.def("rmse", &rmse, py::arg("actual"), py::arg("predicted"));
  m.def("mape", &mape, py::arg("actual"), py::arg("predicted"));

  py::class_<BacktestReport>(m, "BacktestReport")
      .def_readonly("symbol", &BacktestReport::symbol)
      .def_readonly("method", &BacktestReport::method)
      .def_readonly("forecasts", &BacktestReport::forecasts)
      .def_readonly("mae", &BacktestReport::mae)
      .def_readonly("rmse", &BacktestReport::rmse)
      .def_readonly("mape", &BacktestReport::mape)
      .def_readonly("n_days", &BacktestReport::n_days);

  m.def("build_report", &build_report, py::arg("forecasts"), py::arg("symbol"),
        py::arg("method"));
  m.def("format_report_summary", &format_report_summary, py::arg("report"));

  py::class_<ModelDocument>(m, "ModelDocument")
      .def_readonly("model", &ModelDocument::model)
      .def_readonly("config", &ModelDocument::config);

  m.def("serialize_model", &serialize_model, py::arg("model"), py::arg("config") = FitConfig{});
  m.def("deserialize_model", &deserialize_model, py::arg("text"));
  m.def("save_model", &save_model, py::arg("path"), py::arg("model"),
        py::arg("config") = FitConfig{});
  m.def("load_model", &load_model, py::arg("path"));
}
