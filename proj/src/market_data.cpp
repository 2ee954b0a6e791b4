#include "stockhmm/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "stockhmm/errors.hpp"
#include "stockhmm/util.hpp"

namespace stockhmm {

namespace {

constexpr double kMaxPriceMagnitude = 1e12;

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_double(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_volume(const std::string& cell, long long& out) {
  double v = 0.0;
  if (!parse_double(cell, v) || !std::isfinite(v)) return false;
  if (std::abs(v) > 9.0e18) return false;
  out = std::llround(v);
  return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool same_record(const StockBar& a, const StockBar& b) {
  // Duplicate key per the cleaning contract: prev_close excluded.
  return a.date == b.date && a.open == b.open && a.high == b.high && a.low == b.low &&
         a.close == b.close && a.volume == b.volume;
}

// Sorts by date (stable, so same-date rows keep input order) and collapses
// exact-duplicate rows. Same-date rows with differing values both survive.
void normalize(SymbolSeries& series) {
  std::stable_sort(series.bars.begin(), series.bars.end(),
                   [](const StockBar& a, const StockBar& b) { return a.date < b.date; });
  std::vector<StockBar> kept;
  kept.reserve(series.bars.size());
  for (const auto& bar : series.bars) {
    bool duplicate = false;
    bool conflicting = false;
    for (auto it = kept.rbegin(); it != kept.rend() && it->date == bar.date; ++it) {
      if (same_record(*it, bar)) {
        duplicate = true;
        break;
      }
      conflicting = true;
    }
    if (duplicate) continue;
    if (conflicting) {
      warn(series.symbol + ": rows share date " + bar.date +
           " with differing values; keeping both");
    }
    kept.push_back(bar);
  }
  series.bars = std::move(kept);
}

// Accepts numbers directly or as numeric strings.
bool json_number(const nlohmann::json& obj, const char* key, double& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return false;
  if (it->is_number()) {
    out = it->get<double>();
    return true;
  }
  if (it->is_string()) return parse_double(it->get<std::string>(), out);
  return false;
}

// One JSON record -> StockBar; false means the record is skipped.
bool parse_json_record(const nlohmann::json& obj, StockBar& bar) {
  if (!obj.is_object()) return false;
  auto date_it = obj.find("date");
  if (date_it == obj.end() || !date_it->is_string()) return false;
  bar.date = trim(date_it->get<std::string>());
  if (!is_iso_date(bar.date)) return false;
  if (!json_number(obj, "open", bar.open)) return false;
  if (!json_number(obj, "high", bar.high)) return false;
  if (!json_number(obj, "low", bar.low)) return false;
  if (!json_number(obj, "close", bar.close)) return false;
  double volume = 0.0;
  if (!json_number(obj, "volume", volume) || !std::isfinite(volume) ||
      std::abs(volume) > 9.0e18) {
    return false;
  }
  bar.volume = std::llround(volume);
  double prev = 0.0;
  if (json_number(obj, "prev_close", prev)) bar.prev_close = prev;
  return true;
}

void load_json_file(const std::filesystem::path& file, std::vector<SymbolSeries>& series_list,
                    std::unordered_map<std::string, std::size_t>& series_index,
                    std::size_t& skipped) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open file: " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid JSON in " + file.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError("invalid JSON in " + file.string() + ": expected an array of records");

  const std::string stem = file.stem().string();
  for (const auto& record : doc) {
    StockBar bar;
    if (!parse_json_record(record, bar)) {
      ++skipped;
      continue;
    }
    std::string symbol = stem;
    if (record.is_object()) {
      auto sym_it = record.find("symbol");
      if (sym_it != record.end() && sym_it->is_string()) {
        const std::string s = trim(sym_it->get<std::string>());
        if (!s.empty()) symbol = s;
      }
    }
    auto [it, inserted] = series_index.try_emplace(symbol, series_list.size());
    if (inserted) {
      series_list.emplace_back();
      series_list.back().symbol = symbol;
    }
    series_list[it->second].bars.push_back(std::move(bar));
  }
}

}  // namespace

ArchiveLoadResult load_json_archive(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw DataError("path does not exist: " + path.string());
  }

  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());  // directory order is unspecified
  } else {
    files.push_back(path);
  }

  // Series come out in first-encounter order: files in sorted name order,
  // symbols in document order within each file.
  ArchiveLoadResult result;
  std::unordered_map<std::string, std::size_t> series_index;
  for (const auto& file : files) {
    load_json_file(file, result.series, series_index, result.skipped);
  }

  std::size_t total_bars = 0;
  for (auto& series : result.series) {
    normalize(series);
    total_bars += series.bars.size();
  }
  if (total_bars == 0) {
    throw DataError("empty-archive: no parseable records under " + path.string());
  }
  return result;
}

CsvLoadResult load_csv(const std::filesystem::path& path, const std::string& symbol) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());

  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw DataError("csv schema error: missing header row in " + path.string());
  }
  const auto header = split_csv_line(header_line);
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[to_lower(header[i])] = i;

  for (const char* required : {"date", "open", "high", "low", "close", "volume"}) {
    if (!column.count(required)) {
      throw DataError("csv schema error: missing required column \"" + std::string(required) +
                      "\" in " + path.string());
    }
  }
  const bool has_prev = column.count("prev_close") > 0;

  CsvLoadResult result;
  result.series.symbol = symbol;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    auto cell = [&](const char* name) -> const std::string& {
      static const std::string empty;
      const std::size_t idx = column.at(name);
      return idx < cells.size() ? cells[idx] : empty;
    };

    StockBar bar;
    bar.date = cell("date");
    bool ok = is_iso_date(bar.date) && parse_double(cell("open"), bar.open) &&
              parse_double(cell("high"), bar.high) && parse_double(cell("low"), bar.low) &&
              parse_double(cell("close"), bar.close) && parse_volume(cell("volume"), bar.volume);
    if (ok && has_prev) {
      const std::size_t idx = column.at("prev_close");
      const std::string prev_cell = idx < cells.size() ? cells[idx] : "";
      if (!trim(prev_cell).empty()) {
        double prev = 0.0;
        if (parse_double(prev_cell, prev)) {
          bar.prev_close = prev;
        } else {
          ok = false;
        }
      }
    }
    if (!ok) {
      ++result.skipped;
      continue;
    }
    result.series.bars.push_back(std::move(bar));
  }

  normalize(result.series);
  return result;
}

SymbolSeries clean(const SymbolSeries& series) {
  auto price_ok = [](double p) { return std::isfinite(p) && std::abs(p) <= kMaxPriceMagnitude; };

  SymbolSeries out;
  out.symbol = series.symbol;
  out.bars.reserve(series.bars.size());
  for (const auto& bar : series.bars) {
    if (!is_iso_date(bar.date)) continue;
    if (!price_ok(bar.open) || !price_ok(bar.high) || !price_ok(bar.low) || !price_ok(bar.close)) {
      continue;
    }
    if (bar.prev_close && !price_ok(*bar.prev_close)) continue;
    if (bar.open <= 0.0) continue;
    if (bar.volume < 0) continue;
    if (bar.low > std::min(bar.open, bar.close)) continue;
    if (bar.high < std::max(bar.open, bar.close)) continue;
    out.bars.push_back(bar);
  }
  normalize(out);
  return out;
}

SplitSeries chronological_split(const SymbolSeries& series, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train_fraction must lie in (0, 1), got " +
                        format_double(train_fraction));
  }
  if (series.bars.size() < 2) {
    throw DataError("insufficient data: chronological_split needs at least 2 bars, got " +
                    std::to_string(series.bars.size()));
  }

  const auto n = series.bars.size();
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n)));

  SplitSeries split;
  split.train.symbol = series.symbol;
  split.test.symbol = series.symbol;
  split.train.bars.assign(series.bars.begin(), series.bars.begin() + n_train);
  split.test.bars.assign(series.bars.begin() + n_train, series.bars.end());
  return split;
}

}  // namespace stockhmm
