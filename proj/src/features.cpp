#include "stockhmm/features.hpp"

#include <cmath>

#include "stockhmm/errors.hpp"

namespace stockhmm {

FractionalFeatures fractional_features(const SymbolSeries& series) {
  FractionalFeatures out;
  out.observations.reserve(series.bars.size());
  for (std::size_t i = 0; i < series.bars.size(); ++i) {
    const auto& bar = series.bars[i];
    ObservationVector obs;
    obs.frac_change = (bar.close - bar.open) / bar.open;
    obs.frac_high = (bar.high - bar.open) / bar.open;
    obs.frac_low = (bar.open - bar.low) / bar.open;
    if (!std::isfinite(obs.frac_change) || !std::isfinite(obs.frac_high) ||
        !std::isfinite(obs.frac_low)) {
      out.dropped_indices.push_back(i);
      continue;
    }
    out.observations.push_back(obs);
  }
  return out;
}

std::vector<DeltaObservation> delta_features(const SymbolSeries& series) {
  if (series.bars.size() < 2) {
    throw DataError("insufficient data: delta_features needs at least 2 bars, got " +
                    std::to_string(series.bars.size()));
  }
  std::vector<DeltaObservation> out;
  out.reserve(series.bars.size() - 1);
  for (std::size_t i = 0; i + 1 < series.bars.size(); ++i) {
    DeltaObservation obs;
    obs.close_delta = series.bars[i + 1].close - series.bars[i].close;
    obs.volume = static_cast<double>(series.bars[i + 1].volume);
    out.push_back(obs);
  }
  return out;
}

Eigen::MatrixXd to_matrix(const std::vector<ObservationVector>& observations) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(observations.size()), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& o = observations[static_cast<std::size_t>(i)];
    m(i, 0) = o.frac_change;
    m(i, 1) = o.frac_high;
    m(i, 2) = o.frac_low;
  }
  return m;
}

Eigen::MatrixXd to_matrix(const std::vector<DeltaObservation>& observations) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(observations.size()), 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& o = observations[static_cast<std::size_t>(i)];
    m(i, 0) = o.close_delta;
    m(i, 1) = o.volume;
  }
  return m;
}

}  // namespace stockhmm
