#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stockhmm {

/// One trading day's OHLCV record. After clean() every bar satisfies
/// open > 0, finite prices with magnitude <= 1e12, volume >= 0, and
/// low <= min(open, close) <= max(open, close) <= high.
struct StockBar {
  std::string date;  // ISO-8601 YYYY-MM-DD
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  long long volume = 0;
  std::optional<double> prev_close;

  friend bool operator==(const StockBar&, const StockBar&) = default;
};

/// Chronologically ordered bars for one ticker. Loaders sort by date and
/// collapse exact-duplicate (date, open, high, low, close, volume) rows.
struct SymbolSeries {
  std::string symbol;
  std::vector<StockBar> bars;

  std::size_t size() const { return bars.size(); }
  bool empty() const { return bars.empty(); }
};

/// First floor(train_fraction * n) bars and the remainder, order untouched.
struct SplitSeries {
  SymbolSeries train;
  SymbolSeries test;
};

struct CsvLoadResult {
  SymbolSeries series;
  std::size_t skipped = 0;  // unparseable rows
};

struct ArchiveLoadResult {
  std::vector<SymbolSeries> series;  // sorted by symbol
  std::size_t skipped = 0;           // unparseable records across all files
};

/// Loads a JSON archive: either a directory of .json files or a single
/// .json file. Each file holds an array of daily records; the symbol comes
/// from a "symbol" field when present, otherwise from the filename stem.
/// Unparseable individual records are counted and skipped.
ArchiveLoadResult load_json_archive(const std::filesystem::path& path);

/// Loads a CSV with header columns date,open,high,low,close,volume and an
/// optional prev_close. Rows with unparseable cells are counted and skipped.
CsvLoadResult load_csv(const std::filesystem::path& path, const std::string& symbol);

/// Removes bars violating any StockBar invariant plus exact duplicates;
/// result is sorted. Total: never throws, may return an empty series.
SymbolSeries clean(const SymbolSeries& series);

/// Splits into the first floor(train_fraction * n) bars and the rest.
/// Requires >= 2 bars and train_fraction in (0, 1).
SplitSeries chronological_split(const SymbolSeries& series, double train_fraction);

}  // namespace stockhmm
