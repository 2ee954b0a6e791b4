#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "stockhmm/features.hpp"
#include "stockhmm/hmm.hpp"
#include "stockhmm/map_predictor.hpp"
#include "stockhmm/market_data.hpp"

namespace stockhmm {

/// Baseline model over (closing-price delta, volume) observations, plus the
/// filter state needed to predict one step ahead.
struct FluctModel {
  GaussianHmm hmm;  // dim == 2
  double last_close = 0.0;
  Eigen::VectorXd posterior;  // filtered state distribution, sums to 1
};

/// Fits a dim-2 HMM on delta_features(series) and initializes the posterior
/// from the final forward-pass row. Requires length >= n_states + 1.
FluctModel fit_fluct(const SymbolSeries& series, int n_states, const FitConfig& config,
                     FitReport* report = nullptr);

/// Rebuilds the filter state of an already-fitted model from a series, e.g.
/// after loading the model from disk.
FluctModel make_fluct_model(GaussianHmm hmm, const SymbolSeries& series);

/// One forward-recursion step: folds the newly observed delta into the
/// posterior, keeping predictions causal during backtests.
void advance_posterior(FluctModel& model, const DeltaObservation& observation);

/// One-step-ahead expected delta: posterior' * A * (delta coordinate of the
/// state means). The volume coordinate is computed by the same expectation
/// but discarded.
double predict_next_delta(const FluctModel& model);

/// prev_close + predict_next_delta(model).
double predict_close_fluct(const FluctModel& model, double prev_close);

/// One forecast per day in [start_index, start_index + horizon): predicts
/// from each day's true previous close, then advances the posterior with the
/// day's observed delta. The caller's model is untouched (taken by value);
/// its posterior must correspond to the history before start_index.
std::vector<Forecast> rolling_forecast_fluct(FluctModel model, const SymbolSeries& series,
                                             std::size_t start_index, std::size_t horizon);

}  // namespace stockhmm
