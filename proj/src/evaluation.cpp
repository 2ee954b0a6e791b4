#include "stockhmm/evaluation.hpp"

#include <cmath>
#include <sstream>

#include "stockhmm/errors.hpp"
#include "stockhmm/util.hpp"

namespace stockhmm {

namespace {

void check_lengths(const std::vector<double>& actual, const std::vector<double>& predicted) {
  if (actual.size() != predicted.size()) {
    throw ArgumentError("metric inputs differ in length: " + std::to_string(actual.size()) +
                        " vs " + std::to_string(predicted.size()));
  }
  if (actual.empty()) throw ArgumentError("metric inputs are empty");
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::map_fractional:
      return "map_fractional";
    case Method::successive_fluctuation:
      return "successive_fluctuation";
  }
  throw ArgumentError("unknown method");
}

Method parse_method(const std::string& name) {
  if (name == "map_fractional") return Method::map_fractional;
  if (name == "successive_fluctuation") return Method::successive_fluctuation;
  throw ArgumentError("unknown method \"" + name +
                      "\" (expected map_fractional or successive_fluctuation)");
}

double mae(const std::vector<double>& actual, const std::vector<double>& predicted) {
  check_lengths(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sum += std::abs(predicted[i] - actual[i]);
  }
  return sum / static_cast<double>(actual.size());
}

double rmse(const std::vector<double>& actual, const std::vector<double>& predicted) {
  check_lengths(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double err = predicted[i] - actual[i];
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double mape(const std::vector<double>& actual, const std::vector<double>& predicted) {
  check_lengths(actual, predicted);
  std::vector<std::size_t> zero_indices;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) zero_indices.push_back(i);
  }
  if (!zero_indices.empty()) {
    std::ostringstream msg;
    msg << "mape is undefined for zero actual values at ";
    msg << (zero_indices.size() == 1 ? "index" : "indices");
    for (std::size_t i = 0; i < zero_indices.size(); ++i) {
      msg << (i == 0 ? " " : ", ") << zero_indices[i];
    }
    throw NumericError(msg.str());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sum += std::abs(predicted[i] - actual[i]) / std::abs(actual[i]);
  }
  return sum / static_cast<double>(actual.size()) * 100.0;
}

BacktestReport build_report(std::vector<Forecast> forecasts, std::string symbol, Method method) {
  std::vector<double> actual;
  std::vector<double> predicted;
  for (const auto& f : forecasts) {
    if (f.actual_close.has_value()) {
      actual.push_back(*f.actual_close);
      predicted.push_back(f.predicted_close);
    }
  }
  if (actual.empty()) throw DataError("no evaluable forecasts");

  BacktestReport report;
  report.symbol = std::move(symbol);
  report.method = method;
  report.mae = mae(actual, predicted);
  report.rmse = rmse(actual, predicted);
  report.mape = mape(actual, predicted);
  report.n_days = actual.size();
  report.forecasts = std::move(forecasts);
  return report;
}

std::string format_report_summary(const BacktestReport& report) {
  std::ostringstream out;
  out << "symbol: " << report.symbol << "\n";
  out << "method: " << method_name(report.method) << "\n";
  out << "days: " << report.n_days << "\n";
  out << "mae: " << format_double(report.mae) << "\n";
  out << "rmse: " << format_double(report.rmse) << "\n";
  out << "mape_percent: " << format_double(report.mape) << "\n";
  return out.str();
}

void write_forecast_csv(std::ostream& out, const std::vector<Forecast>& forecasts,
                        std::optional<Method> method_tag) {
  out << "date,open,actual_close,predicted_close,frac_change,log_likelihood";
  if (method_tag.has_value()) out << ",method";
  out << "\n";
  for (const auto& f : forecasts) {
    out << f.date << "," << format_double(f.open) << ",";
    if (f.actual_close.has_value()) out << format_double(*f.actual_close);
    out << "," << format_double(f.predicted_close) << ",";
    if (f.candidate.has_value()) out << format_double(f.candidate->frac_change);
    out << ",";
    if (f.log_likelihood.has_value()) out << format_double(*f.log_likelihood);
    if (method_tag.has_value()) out << "," << method_name(*method_tag);
    out << "\n";
  }
}

void write_plot_data(std::ostream& out, const std::vector<Forecast>& forecasts) {
  out << "date,actual,predicted\n";
  for (const auto& f : forecasts) {
    out << f.date << ",";
    if (f.actual_close.has_value()) out << format_double(*f.actual_close);
    out << "," << format_double(f.predicted_close) << "\n";
  }
}

}  // namespace stockhmm
