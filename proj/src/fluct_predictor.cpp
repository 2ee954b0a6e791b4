#include "stockhmm/fluct_predictor.hpp"

#include <cmath>

#include "stockhmm/errors.hpp"

namespace stockhmm {

namespace {

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += std::exp(v(i) - m);
  return m + std::log(sum);
}

Eigen::VectorXd posterior_from_forward_row(const Eigen::VectorXd& log_alpha_row) {
  const double total = log_sum_exp(log_alpha_row);
  Eigen::VectorXd posterior = (log_alpha_row.array() - total).exp();
  posterior /= posterior.sum();
  return posterior;
}

void require_delta_model(const GaussianHmm& hmm) {
  if (hmm.dim != 2) {
    throw ArgumentError("fluctuation prediction needs a dim-2 model, got dim " +
                        std::to_string(hmm.dim));
  }
}

}  // namespace

FluctModel fit_fluct(const SymbolSeries& series, int n_states, const FitConfig& config,
                     FitReport* report) {
  if (series.size() < static_cast<std::size_t>(n_states) + 1) {
    throw DataError("insufficient data: " + std::to_string(series.size()) + " bars in " +
                    series.symbol + " for " + std::to_string(n_states) + " states");
  }
  const auto deltas = delta_features(series);
  auto [hmm, fit_report] = fit_baum_welch(to_matrix(deltas), n_states, config);
  if (report != nullptr) *report = std::move(fit_report);
  return make_fluct_model(std::move(hmm), series);
}

FluctModel make_fluct_model(GaussianHmm hmm, const SymbolSeries& series) {
  require_delta_model(hmm);
  if (series.empty()) {
    throw DataError("insufficient data: cannot initialize the filter from an empty series");
  }

  FluctModel model;
  model.last_close = series.bars.back().close;
  if (series.size() < 2) {
    model.posterior = hmm.start_prob;
  } else {
    const auto deltas = delta_features(series);
    const ForwardResult fwd = forward_pass(hmm, to_matrix(deltas));
    model.posterior =
        posterior_from_forward_row(fwd.log_alpha.row(fwd.log_alpha.rows() - 1).transpose());
  }
  model.hmm = std::move(hmm);
  return model;
}

void advance_posterior(FluctModel& model, const DeltaObservation& observation) {
  require_delta_model(model.hmm);
  const Eigen::Index n = model.hmm.n_states;
  const EmissionModel emission(model.hmm);
  const Eigen::MatrixXd log_trans = model.hmm.transition.array().log();
  const Eigen::VectorXd log_post = model.posterior.array().log();

  Eigen::VectorXd x(2);
  x << observation.close_delta, observation.volume;

  Eigen::VectorXd next_log(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    next_log(j) = log_sum_exp((log_post + log_trans.col(j)).eval()) +
                  emission.log_density(static_cast<int>(j), x);
  }
  model.posterior = posterior_from_forward_row(next_log);
  model.last_close += observation.close_delta;
}

double predict_next_delta(const FluctModel& model) {
  require_delta_model(model.hmm);
  const Eigen::VectorXd predicted_state = model.hmm.transition.transpose() * model.posterior;
  double delta = 0.0;
  for (int j = 0; j < model.hmm.n_states; ++j) {
    delta += predicted_state(j) * model.hmm.means[static_cast<std::size_t>(j)](0);
  }
  return delta;
}

double predict_close_fluct(const FluctModel& model, double prev_close) {
  if (!std::isfinite(prev_close)) throw ArgumentError("previous close must be finite");
  return prev_close + predict_next_delta(model);
}

std::vector<Forecast> rolling_forecast_fluct(FluctModel model, const SymbolSeries& series,
                                             std::size_t start_index, std::size_t horizon) {
  if (start_index > series.size()) {
    throw ArgumentError("start_index is past the end of the series");
  }
  if (start_index < 1) {
    throw ArgumentError("start_index must be >= 1: the first day has no previous close");
  }

  std::vector<Forecast> forecasts;
  for (std::size_t k = 0; k < horizon && start_index + k < series.size(); ++k) {
    const std::size_t i = start_index + k;
    const StockBar& bar = series.bars[i];
    const double prev_close = series.bars[i - 1].close;

    Forecast forecast;
    forecast.date = bar.date;
    forecast.open = bar.open;
    forecast.predicted_close = predict_close_fluct(model, prev_close);
    forecast.actual_close = bar.close;
    forecasts.push_back(std::move(forecast));

    advance_posterior(model,
                      DeltaObservation{bar.close - prev_close, static_cast<double>(bar.volume)});
  }
  return forecasts;
}

}  // namespace stockhmm
