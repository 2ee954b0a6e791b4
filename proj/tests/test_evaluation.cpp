#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stockhmm/errors.hpp"
#include "stockhmm/evaluation.hpp"

#include "helpers.hpp"

using namespace stockhmm;

TEST_CASE("metric formulas match hand arithmetic") {
  CHECK(mae({100.0, 200.0}, {100.0, 200.0}) == 0.0);
  CHECK(mae({100.0, 200.0}, {101.0, 198.0}) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(mae({195.5}, {195.0}) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(rmse({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(rmse({0.0, 0.0}, {3.0, 4.0}) ==
        doctest::Approx(3.5355339059327378).epsilon(1e-12));  // sqrt(12.5)
  CHECK(rmse({5.0}, {7.0}) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(mape({50.0, 60.0}, {50.0, 60.0}) == 0.0);
  CHECK(mape({100.0}, {95.0}) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(mape({200.0, 100.0}, {202.0, 99.0}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metrics reject mismatched or empty inputs") {
  CHECK_THROWS_AS(mae({1.0}, {1.0, 2.0}), ArgumentError);
  CHECK_THROWS_AS(rmse({}, {}), ArgumentError);
  CHECK_THROWS_AS(mape({1.0, 2.0}, {1.0}), ArgumentError);
}

TEST_CASE("mape lists every index with a zero actual") {
  CHECK_THROWS_WITH_AS(mape({0.0, 1.0, 0.0}, {1.0, 1.0, 1.0}), doctest::Contains("0, 2"),
                       NumericError);
}

TEST_CASE("rmse dominates mae and both respect joint permutation") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    std::vector<double> actual(n), predicted(n);
    for (int i = 0; i < n; ++i) {
      actual[i] = 50.0 + 100.0 * testutil::unit_double(rng);
      predicted[i] = actual[i] + 10.0 * (testutil::unit_double(rng) - 0.5);
    }
    CHECK(rmse(actual, predicted) >= mae(actual, predicted) - 1e-12);

    std::vector<double> actual_rev(actual.rbegin(), actual.rend());
    std::vector<double> predicted_rev(predicted.rbegin(), predicted.rend());
    CHECK(mae(actual_rev, predicted_rev) == doctest::Approx(mae(actual, predicted)).epsilon(1e-12));
    CHECK(mape(actual_rev, predicted_rev) ==
          doctest::Approx(mape(actual, predicted)).epsilon(1e-12));
  }
}

TEST_CASE("mape is scale-free") {
  const std::vector<double> actual = {120.0, 95.0, 210.0};
  const std::vector<double> predicted = {118.0, 99.0, 205.0};
  std::vector<double> actual_scaled, predicted_scaled;
  for (double a : actual) actual_scaled.push_back(7.3 * a);
  for (double p : predicted) predicted_scaled.push_back(7.3 * p);
  CHECK(mape(actual_scaled, predicted_scaled) ==
        doctest::Approx(mape(actual, predicted)).epsilon(1e-12));
}

namespace {

Forecast make_forecast(const char* date, double open, double predicted,
                       std::optional<double> actual) {
  Forecast f;
  f.date = date;
  f.open = open;
  f.predicted_close = predicted;
  f.actual_close = actual;
  return f;
}

}  // namespace

TEST_CASE("build_report counts only evaluable days") {
  std::vector<Forecast> forecasts;
  forecasts.push_back(make_forecast("2020-01-02", 100.0, 101.0, 100.0));
  forecasts.push_back(make_forecast("2020-01-03", 100.0, 99.0, 101.0));
  forecasts.push_back(make_forecast("2020-01-06", 100.0, 102.0, std::nullopt));

  const BacktestReport report =
      build_report(forecasts, "SYN", Method::map_fractional);
  CHECK(report.n_days == 2);
  CHECK(report.forecasts.size() == 3);
  CHECK(report.mae == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(report.rmse >= report.mae);
  CHECK(report.mape >= 0.0);
  CHECK(report.symbol == "SYN");

  const std::string summary = format_report_summary(report);
  CHECK(summary.find("method: map_fractional") != std::string::npos);
  CHECK(summary.find("days: 2") != std::string::npos);

  CHECK_THROWS_WITH_AS(build_report({make_forecast("2020-01-02", 1, 1, std::nullopt)}, "S",
                                    Method::map_fractional),
                       doctest::Contains("no evaluable forecasts"), DataError);
}

TEST_CASE("perfect forecasts zero every metric") {
  std::vector<Forecast> forecasts;
  forecasts.push_back(make_forecast("2020-01-02", 100.0, 100.5, 100.5));
  forecasts.push_back(make_forecast("2020-01-03", 101.0, 99.25, 99.25));
  const BacktestReport report =
      build_report(forecasts, "SYN", Method::successive_fluctuation);
  CHECK(report.mae == 0.0);
  CHECK(report.rmse == 0.0);
  CHECK(report.mape == 0.0);
}

TEST_CASE("forecast csv includes optional fields only when present") {
  Forecast with_candidate = make_forecast("2020-01-02", 100.0, 105.0, 104.0);
  with_candidate.candidate = ObservationVector{0.05, 0.01, 0.02};
  with_candidate.log_likelihood = -12.5;
  Forecast without = make_forecast("2020-01-03", 105.0, 106.0, std::nullopt);

  std::ostringstream out;
  write_forecast_csv(out, {with_candidate, without}, Method::map_fractional);
  CHECK(out.str() ==
        "date,open,actual_close,predicted_close,frac_change,log_likelihood,method\n"
        "2020-01-02,100,104,105,0.05,-12.5,map_fractional\n"
        "2020-01-03,105,,106,,,map_fractional\n");

  std::ostringstream untagged;
  write_forecast_csv(untagged, {without});
  CHECK(untagged.str() ==
        "date,open,actual_close,predicted_close,frac_change,log_likelihood\n"
        "2020-01-03,105,,106,,\n");
}

TEST_CASE("plot data is a three-column csv") {
  Forecast f = make_forecast("2020-01-02", 100.0, 105.0, 104.0);
  std::ostringstream out;
  write_plot_data(out, {f});
  CHECK(out.str() == "date,actual,predicted\n2020-01-02,104,105\n");
}

TEST_CASE("method names round-trip and reject unknowns") {
  CHECK(method_name(Method::map_fractional) == "map_fractional");
  CHECK(method_name(Method::successive_fluctuation) == "successive_fluctuation");
  CHECK(parse_method("map_fractional") == Method::map_fractional);
  CHECK(parse_method("successive_fluctuation") == Method::successive_fluctuation);
  CHECK_THROWS_AS(parse_method("bayesian"), ArgumentError);
}
