#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stockhmm/features.hpp"
#include "stockhmm/hmm.hpp"
#include "stockhmm/market_data.hpp"

namespace stockhmm {

/// Inclusive, evenly spaced candidate axes for the next-day observation.
/// Steps count points: an axis with steps >= 2 contains both endpoints.
struct GridSpec {
  double change_min = -0.1;
  double change_max = 0.1;
  int change_steps = 50;
  double high_min = 0.0;
  double high_max = 0.1;
  int high_steps = 10;
  double low_min = 0.0;
  double low_max = 0.1;
  int low_steps = 10;
};

/// Cartesian product of the three axes, change outermost, then high, then
/// low. Default spec yields 50 x 10 x 10 = 5000 candidates.
std::vector<ObservationVector> build_grid(const GridSpec& spec);

struct PredictorConfig {
  int latency_days = 30;  // observation window length d
  GridSpec grid;
  int jobs = 1;  // worker threads for the grid scan
};

/// One predicted trading day. For the MAP method predicted_close is
/// literally open * (1 + candidate->frac_change).
struct Forecast {
  std::string date;
  double open = std::numeric_limits<double>::quiet_NaN();
  double predicted_close = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> actual_close;
  std::optional<ObservationVector> candidate;  // winning grid candidate (MAP method)
  std::optional<double> log_likelihood;        // joint log-likelihood of window + winner
};

struct MapChoice {
  ObservationVector best;
  double score = 0.0;     // winning joint log-likelihood
  std::size_t index = 0;  // position in grid order
};

/// Scores candidate continuations against a fixed observation window. The
/// forward pass over the shared prefix runs once; each candidate then costs
/// a single O(n^2) step, so a grid scan is O(n^2 d + |grid| n^2) instead of
/// O(|grid| n^2 d). score(c) equals a fresh full forward pass over
/// window ++ [c] to within 1e-9.
class IncrementalScorer {
 public:
  IncrementalScorer(const GaussianHmm& model, const std::vector<ObservationVector>& window);

  double score(const ObservationVector& candidate) const;

 private:
  EmissionModel emission_;
  Eigen::VectorXd next_state_log_weight_;  // per-state log weight after the prefix
};

/// argmax over the grid of the joint log-likelihood of window ++ [candidate].
/// Ties break to the first candidate in grid order; with jobs > 1 the
/// reduction is by (score, grid index), so the result is identical.
MapChoice map_next_observation(const GaussianHmm& model,
                               const std::vector<ObservationVector>& window,
                               const std::vector<ObservationVector>& grid, int jobs = 1);

/// Predicts the close for the day opening at open_price from the fractional
/// features of the last latency_days bars of history (all of them when the
/// history is shorter). date labels the returned Forecast.
Forecast predict_close(const GaussianHmm& model, const SymbolSeries& history,
                       const std::string& date, double open_price,
                       const PredictorConfig& config);

/// One forecast per day in [start_index, start_index + horizon). Windows use
/// actual observed history, never prior predictions; each day's true open
/// feeds the price reconstruction.
std::vector<Forecast> rolling_forecast(const GaussianHmm& model, const SymbolSeries& series,
                                       std::size_t start_index, std::size_t horizon,
                                       const PredictorConfig& config);

}  // namespace stockhmm
