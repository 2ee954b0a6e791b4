#include "stockhmm/map_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

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

std::vector<double> axis_points(double lo, double hi, int steps, const char* name) {
  if (steps < 1) {
    throw ArgumentError(std::string("grid axis ") + name + " needs at least 1 step");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw ArgumentError(std::string("grid axis ") + name + " has non-finite bounds");
  }
  if (steps == 1) {
    if (hi < lo) throw ArgumentError(std::string("grid axis ") + name + " has max < min");
    return {lo};
  }
  if (!(hi > lo)) {
    throw ArgumentError(std::string("grid axis ") + name + " needs max > min when steps > 1");
  }
  std::vector<double> points(static_cast<std::size_t>(steps));
  const double span = hi - lo;
  for (int i = 0; i < steps; ++i) {
    points[static_cast<std::size_t>(i)] = lo + span * static_cast<double>(i) / (steps - 1);
  }
  return points;
}

Eigen::VectorXd to_vector(const ObservationVector& o) {
  Eigen::VectorXd v(3);
  v << o.frac_change, o.frac_high, o.frac_low;
  return v;
}

struct RangeBest {
  std::size_t index = 0;
  double score = -std::numeric_limits<double>::infinity();
};

// Scans [lo, hi); strict > keeps the earliest index on ties.
RangeBest scan_range(const IncrementalScorer& scorer, const std::vector<ObservationVector>& grid,
                     std::size_t lo, std::size_t hi) {
  RangeBest best;
  best.index = lo;
  for (std::size_t i = lo; i < hi; ++i) {
    const double s = scorer.score(grid[i]);
    if (s > best.score) {
      best.score = s;
      best.index = i;
    }
  }
  return best;
}

SymbolSeries window_slice(const SymbolSeries& series, std::size_t end, int latency_days) {
  SymbolSeries window;
  window.symbol = series.symbol;
  const std::size_t span = std::min<std::size_t>(end, static_cast<std::size_t>(latency_days));
  window.bars.assign(series.bars.begin() + static_cast<std::ptrdiff_t>(end - span),
                     series.bars.begin() + static_cast<std::ptrdiff_t>(end));
  return window;
}

}  // namespace

std::vector<ObservationVector> build_grid(const GridSpec& spec) {
  const auto changes = axis_points(spec.change_min, spec.change_max, spec.change_steps, "change");
  const auto highs = axis_points(spec.high_min, spec.high_max, spec.high_steps, "high");
  const auto lows = axis_points(spec.low_min, spec.low_max, spec.low_steps, "low");
  std::vector<ObservationVector> grid;
  grid.reserve(changes.size() * highs.size() * lows.size());
  for (double c : changes) {
    for (double h : highs) {
      for (double l : lows) {
        grid.push_back(ObservationVector{c, h, l});
      }
    }
  }
  return grid;
}

IncrementalScorer::IncrementalScorer(const GaussianHmm& model,
                                     const std::vector<ObservationVector>& window)
    : emission_(model) {
  if (model.dim != 3) {
    throw ArgumentError("fractional-change prediction needs a dim-3 model, got dim " +
                        std::to_string(model.dim));
  }
  const Eigen::Index n = model.n_states;
  next_state_log_weight_.resize(n);
  if (window.empty()) {
    next_state_log_weight_ = model.start_prob.array().log();
    return;
  }
  const ForwardResult prefix = forward_pass(model, to_matrix(window));
  const Eigen::MatrixXd log_trans = model.transition.array().log();
  const Eigen::VectorXd last = prefix.log_alpha.row(prefix.log_alpha.rows() - 1).transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    next_state_log_weight_(j) = log_sum_exp((last + log_trans.col(j)).eval());
  }
}

double IncrementalScorer::score(const ObservationVector& candidate) const {
  const Eigen::VectorXd x = to_vector(candidate);
  Eigen::VectorXd terms(emission_.n_states());
  for (int j = 0; j < emission_.n_states(); ++j) {
    terms(j) = next_state_log_weight_(j) + emission_.log_density(j, x);
  }
  return log_sum_exp(terms);
}

MapChoice map_next_observation(const GaussianHmm& model,
                               const std::vector<ObservationVector>& window,
                               const std::vector<ObservationVector>& grid, int jobs) {
  if (grid.empty()) throw ArgumentError("candidate grid is empty");
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");

  const IncrementalScorer scorer(model, window);

  RangeBest best;
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(
      static_cast<std::size_t>(jobs), grid.size()));
  if (workers <= 1) {
    best = scan_range(scorer, grid, 0, grid.size());
  } else {
    std::vector<RangeBest> partial(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (grid.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(grid.size(), lo + chunk);
      threads.emplace_back([&, w, lo, hi] { partial[w] = scan_range(scorer, grid, lo, hi); });
    }
    for (auto& t : threads) t.join();
    best = partial[0];
    for (std::size_t w = 1; w < workers; ++w) {
      if (partial[w].score > best.score ||
          (partial[w].score == best.score && partial[w].index < best.index)) {
        best = partial[w];
      }
    }
  }
  return MapChoice{grid[best.index], best.score, best.index};
}

Forecast predict_close(const GaussianHmm& model, const SymbolSeries& history,
                       const std::string& date, double open_price,
                       const PredictorConfig& config) {
  if (!std::isfinite(open_price) || open_price <= 0.0) {
    throw ArgumentError("open price must be finite and positive");
  }
  if (config.latency_days < 0) throw ArgumentError("latency_days must be >= 0");

  const SymbolSeries window = window_slice(history, history.size(), config.latency_days);
  const auto features = fractional_features(window);
  const auto grid = build_grid(config.grid);
  const MapChoice choice = map_next_observation(model, features.observations, grid, config.jobs);

  Forecast forecast;
  forecast.date = date;
  forecast.open = open_price;
  forecast.predicted_close = open_price * (1.0 + choice.best.frac_change);
  forecast.candidate = choice.best;
  forecast.log_likelihood = choice.score;
  return forecast;
}

std::vector<Forecast> rolling_forecast(const GaussianHmm& model, const SymbolSeries& series,
                                       std::size_t start_index, std::size_t horizon,
                                       const PredictorConfig& config) {
  if (start_index > series.size()) {
    throw ArgumentError("start_index is past the end of the series");
  }
  if (config.latency_days < 0) throw ArgumentError("latency_days must be >= 0");

  const auto grid = build_grid(config.grid);
  std::vector<Forecast> forecasts;
  for (std::size_t k = 0; k < horizon && start_index + k < series.size(); ++k) {
    const std::size_t i = start_index + k;
    const StockBar& bar = series.bars[i];
    if (!std::isfinite(bar.open) || bar.open <= 0.0) {
      throw DataError("bar " + bar.date + " has a non-positive open");
    }
    const SymbolSeries window = window_slice(series, i, config.latency_days);
    const auto features = fractional_features(window);
    const MapChoice choice = map_next_observation(model, features.observations, grid, config.jobs);

    Forecast forecast;
    forecast.date = bar.date;
    forecast.open = bar.open;
    forecast.predicted_close = bar.open * (1.0 + choice.best.frac_change);
    forecast.actual_close = bar.close;
    forecast.candidate = choice.best;
    forecast.log_likelihood = choice.score;
    forecasts.push_back(std::move(forecast));
  }
  return forecasts;
}

}  // namespace stockhmm
