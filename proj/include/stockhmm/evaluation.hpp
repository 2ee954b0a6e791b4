#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stockhmm/map_predictor.hpp"

namespace stockhmm {

enum class Method { map_fractional, successive_fluctuation };

std::string method_name(Method method);
Method parse_method(const std::string& name);  // throws ArgumentError

/// Mean of |predicted - actual|. Requires equal non-zero lengths.
double mae(const std::vector<double>& actual, const std::vector<double>& predicted);

/// sqrt(mean((predicted - actual)^2)). Requires equal non-zero lengths.
double rmse(const std::vector<double>& actual, const std::vector<double>& predicted);

/// Mean of |predicted - actual| / |actual|, in percent. Any zero actual is
/// an error listing the offending indices.
double mape(const std::vector<double>& actual, const std::vector<double>& predicted);

struct BacktestReport {
  std::string symbol;
  Method method = Method::map_fractional;
  std::vector<Forecast> forecasts;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;       // percent
  std::size_t n_days = 0;  // forecasts with an actual close
};

/// Metrics over the (actual_close, predicted_close) pairs. Requires at least
/// one forecast with an actual close.
BacktestReport build_report(std::vector<Forecast> forecasts, std::string symbol, Method method);

std::string format_report_summary(const BacktestReport& report);

/// Columns date,open,actual_close,predicted_close,frac_change,log_likelihood;
/// a trailing method column when method_tag is given. Missing values print
/// as empty cells.
void write_forecast_csv(std::ostream& out, const std::vector<Forecast>& forecasts,
                        std::optional<Method> method_tag = std::nullopt);

/// Columns date,actual,predicted for external plotting tools.
void write_plot_data(std::ostream& out, const std::vector<Forecast>& forecasts);

}  // namespace stockhmm
