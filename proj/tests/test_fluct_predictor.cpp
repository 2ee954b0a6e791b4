#include <doctest.h>

#include <cmath>

#include "stockhmm/errors.hpp"
#include "stockhmm/fluct_predictor.hpp"

#include "helpers.hpp"

using namespace stockhmm;

namespace {

FluctModel fitted_fluct(std::uint64_t seed, int n_states, FitReport* report = nullptr) {
  const auto series = testutil::random_walk_series("SYN", 150, seed);
  FitConfig config;
  config.max_iterations = 30;
  config.seed = seed;
  return fit_fluct(series, n_states, config, report);
}

}  // namespace

TEST_CASE("a single-state model predicts its mean delta exactly") {
  FluctModel model = fitted_fluct(41, 1);
  // posterior = [1], A = [[1]], so the expectation collapses to the mean.
  CHECK(predict_next_delta(model) == doctest::Approx(model.hmm.means[0](0)).epsilon(1e-15));
  CHECK(predict_close_fluct(model, 100.0) == 100.0 + predict_next_delta(model));
}

TEST_CASE("fit_fluct reports the underlying EM run") {
  FitReport report;
  const FluctModel model = fitted_fluct(42, 3, &report);
  CHECK(model.hmm.dim == 2);
  CHECK(model.hmm.n_states == 3);
  CHECK_FALSE(report.log_likelihood_trace.empty());
  CHECK(model.posterior.size() == 3);
  CHECK(model.posterior.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model.posterior.minCoeff() >= 0.0);
}

TEST_CASE("fit_fluct needs n_states + 1 bars") {
  const auto series = testutil::random_walk_series("S", 4, 5);
  CHECK_THROWS_WITH_AS(fit_fluct(series, 4, FitConfig{}), doctest::Contains("insufficient data"),
                       DataError);
}

TEST_CASE("make_fluct_model rebuilds the same filter state the fit produced") {
  const auto series = testutil::random_walk_series("SYN", 150, 43);
  FitConfig config;
  config.max_iterations = 30;
  config.seed = 43;
  const FluctModel fit = fit_fluct(series, 2, config);
  const FluctModel rebuilt = make_fluct_model(fit.hmm, series);
  CHECK(rebuilt.last_close == fit.last_close);
  CHECK((rebuilt.posterior - fit.posterior).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(44);
  const GaussianHmm wrong_dim = testutil::random_model(rng, 2, 3);
  CHECK_THROWS_AS(make_fluct_model(wrong_dim, series), ArgumentError);
}

TEST_CASE("advance_posterior is one hand-checkable filter step") {
  FluctModel model = fitted_fluct(45, 2);
  const Eigen::VectorXd before = model.posterior;
  const DeltaObservation obs{0.4, 120000.0};

  Eigen::VectorXd x(2);
  x << obs.close_delta, obs.volume;
  Eigen::VectorXd expected(2);
  for (int j = 0; j < 2; ++j) {
    double mass = 0.0;
    for (int i = 0; i < 2; ++i) mass += before(i) * model.hmm.transition(i, j);
    expected(j) =
        mass * std::exp(log_gaussian_density(x, model.hmm.means[j], model.hmm.covariances[j]));
  }
  expected /= expected.sum();

  const double close_before = model.last_close;
  advance_posterior(model, obs);
  CHECK((model.posterior - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(model.posterior.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model.last_close == doctest::Approx(close_before + 0.4).epsilon(1e-15));
}

TEST_CASE("predicted delta is the one-step expectation under the filter") {
  FluctModel model = fitted_fluct(46, 3);
  const Eigen::VectorXd predicted_state = model.hmm.transition.transpose() * model.posterior;
  double expected = 0.0;
  for (int j = 0; j < 3; ++j) expected += predicted_state(j) * model.hmm.means[j](0);
  CHECK(predict_next_delta(model) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("rolling fluctuation forecast stays causal and aligned") {
  const auto series = testutil::random_walk_series("SYN", 120, 47);
  SymbolSeries train;
  train.symbol = series.symbol;
  train.bars.assign(series.bars.begin(), series.bars.begin() + 100);
  FitConfig config;
  config.max_iterations = 30;
  config.seed = 47;
  const FluctModel model = fit_fluct(train, 2, config);

  const auto forecasts = rolling_forecast_fluct(model, series, 100, 20);
  REQUIRE(forecasts.size() == 20);
  for (std::size_t k = 0; k < forecasts.size(); ++k) {
    const StockBar& bar = series.bars[100 + k];
    CHECK(forecasts[k].date == bar.date);
    REQUIRE(forecasts[k].actual_close.has_value());
    CHECK(*forecasts[k].actual_close == bar.close);
    // the prediction is an offset from the previous day's true close
    const double prev_close = series.bars[100 + k - 1].close;
    CHECK(std::isfinite(forecasts[k].predicted_close));
    CHECK(std::abs(forecasts[k].predicted_close - prev_close) < 50.0);
    CHECK_FALSE(forecasts[k].candidate.has_value());
    CHECK_FALSE(forecasts[k].log_likelihood.has_value());
  }

  const auto repeat = rolling_forecast_fluct(model, series, 100, 20);
  for (std::size_t k = 0; k < forecasts.size(); ++k) {
    CHECK(repeat[k].predicted_close == forecasts[k].predicted_close);
  }

  CHECK_THROWS_AS(rolling_forecast_fluct(model, series, 0, 5), ArgumentError);
}
