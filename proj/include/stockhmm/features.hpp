#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "stockhmm/market_data.hpp"

namespace stockhmm {

/// Scale-free daily observation:
///   ((close - open) / open, (high - open) / open, (open - low) / open).
struct ObservationVector {
  double frac_change = 0.0;
  double frac_high = 0.0;
  double frac_low = 0.0;

  friend bool operator==(const ObservationVector&, const ObservationVector&) = default;
};

/// Day-over-day closing-price difference paired with the day's volume.
struct DeltaObservation {
  double close_delta = 0.0;
  double volume = 0.0;
};

struct FractionalFeatures {
  std::vector<ObservationVector> observations;
  // Bar indices whose features came out non-finite and were dropped, so
  // downstream windows stay aligned with dates.
  std::vector<std::size_t> dropped_indices;
};

/// One ObservationVector per bar. Requires a cleaned series (open > 0).
FractionalFeatures fractional_features(const SymbolSeries& series);

/// Element i holds close[i+1] - close[i] and volume[i+1]; length n-1.
/// Requires >= 2 bars.
std::vector<DeltaObservation> delta_features(const SymbolSeries& series);

/// Row-per-observation matrices for the HMM layer.
Eigen::MatrixXd to_matrix(const std::vector<ObservationVector>& observations);
Eigen::MatrixXd to_matrix(const std::vector<DeltaObservation>& observations);

}  // namespace stockhmm
