// stockhmm: train Gaussian-emission HMMs on daily OHLCV bars and forecast
// closing prices, either by MAP search over discretized fractional changes
// or by the successive-fluctuation baseline.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stockhmm/errors.hpp"
#include "stockhmm/evaluation.hpp"
#include "stockhmm/features.hpp"
#include "stockhmm/fluct_predictor.hpp"
#include "stockhmm/hmm.hpp"
#include "stockhmm/map_predictor.hpp"
#include "stockhmm/market_data.hpp"
#include "stockhmm/serialization.hpp"
#include "stockhmm/util.hpp"

namespace {

namespace fs = std::filesystem;
using namespace stockhmm;

constexpr int kExitArgument = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct RunConfig {
  std::string data;
  std::string symbol;
  std::string method = "map_fractional";
  int states = 4;
  int latency = 30;
  GridSpec grid;
  int max_iter = 10000;
  double tol = 1e-3;
  std::uint64_t seed = 0;
  double train_frac = 0.8;
  long long horizon = -1;
  double open = std::numeric_limits<double>::quiet_NaN();
  std::string date = "next";
  std::string out = ".";
  int jobs = 1;
  std::string config_file;
};

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Folds `--config FILE` key=value lines into the argument list before CLI11
// sees it: each key becomes `--key value`, appended only when the flag is not
// already present, so explicit flags always win. Help requests skip the merge.
void merge_config_file(std::vector<std::string>& args) {
  for (const auto& arg : args) {
    if (arg == "-h" || arg == "--help" || arg == "--help-all") return;
  }

  std::string file;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ArgumentError("--config needs a file path");
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(std::string("--config=").size());
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (file.empty()) return;

  std::ifstream in(file);
  if (!in) throw DataError("cannot open file: " + file);

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string text = trimmed(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError("invalid config line " + std::to_string(line_number) + " in " + file +
                          ": expected key=value");
    }
    const std::string key = trimmed(text.substr(0, eq));
    const std::string value = trimmed(text.substr(eq + 1));
    if (key.empty()) {
      throw ArgumentError("invalid config line " + std::to_string(line_number) + " in " + file +
                          ": empty key");
    }
    if (key == "config") continue;  // no nesting

    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& arg) {
      return arg == flag || arg.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    args.push_back(flag);
    args.push_back(value);
  }
}

FitConfig fit_config(const RunConfig& cfg) {
  FitConfig fit;
  fit.max_iterations = cfg.max_iter;
  fit.tolerance = cfg.tol;
  fit.seed = cfg.seed;
  return fit;
}

PredictorConfig predictor_config(const RunConfig& cfg) {
  PredictorConfig pred;
  pred.latency_days = cfg.latency;
  pred.grid = cfg.grid;
  pred.jobs = cfg.jobs;
  return pred;
}

void add_data_options(CLI::App& sub, RunConfig& cfg, bool need_symbol) {
  sub.add_option("--data", cfg.data, "CSV file or JSON archive (file or directory)")->required();
  auto* symbol = sub.add_option("--symbol", cfg.symbol, "ticker to operate on");
  if (need_symbol) symbol->required();
}

void add_config_option(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--config", cfg.config_file, "key=value defaults file (explicit flags win)")
      ->type_name("FILE");
}

void add_model_options(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--method", cfg.method, "map_fractional or successive_fluctuation")
      ->default_str(cfg.method);
  sub.add_option("--states", cfg.states, "number of hidden states")->default_val(cfg.states);
  sub.add_option("--out", cfg.out, "output directory")->default_str(cfg.out);
}

void add_fit_options(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--max-iter", cfg.max_iter, "EM iteration cap")->default_val(cfg.max_iter);
  sub.add_option("--tol", cfg.tol, "EM log-likelihood convergence tolerance")
      ->default_val(cfg.tol);
  sub.add_option("--seed", cfg.seed, "initialization seed")->default_val(cfg.seed);
  sub.add_option("--train-frac", cfg.train_frac, "chronological train fraction")
      ->default_val(cfg.train_frac);
}

void add_predictor_options(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--latency", cfg.latency, "observation window length in days")
      ->default_val(cfg.latency);
  sub.add_option("--jobs", cfg.jobs, "worker threads for the grid scan")->default_val(cfg.jobs);
  sub.add_option("--grid-change-min", cfg.grid.change_min)->default_val(cfg.grid.change_min);
  sub.add_option("--grid-change-max", cfg.grid.change_max)->default_val(cfg.grid.change_max);
  sub.add_option("--grid-change-steps", cfg.grid.change_steps)->default_val(cfg.grid.change_steps);
  sub.add_option("--grid-high-min", cfg.grid.high_min)->default_val(cfg.grid.high_min);
  sub.add_option("--grid-high-max", cfg.grid.high_max)->default_val(cfg.grid.high_max);
  sub.add_option("--grid-high-steps", cfg.grid.high_steps)->default_val(cfg.grid.high_steps);
  sub.add_option("--grid-low-min", cfg.grid.low_min)->default_val(cfg.grid.low_min);
  sub.add_option("--grid-low-max", cfg.grid.low_max)->default_val(cfg.grid.low_max);
  sub.add_option("--grid-low-steps", cfg.grid.low_steps)->default_val(cfg.grid.low_steps);
}

bool has_csv_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv";
}

// Resolves --data/--symbol to one cleaned series. CSV paths load directly
// (symbol defaults to the filename stem); anything else is a JSON archive.
SymbolSeries load_series(const RunConfig& cfg) {
  const fs::path path(cfg.data);
  if (has_csv_extension(path)) {
    const std::string symbol = cfg.symbol.empty() ? path.stem().string() : cfg.symbol;
    const CsvLoadResult loaded = load_csv(path, symbol);
    if (loaded.skipped > 0) {
      warn("skipped " + std::to_string(loaded.skipped) + " unparseable rows in " + path.string());
    }
    return clean(loaded.series);
  }

  const ArchiveLoadResult archive = load_json_archive(path);
  if (archive.skipped > 0) {
    warn("skipped " + std::to_string(archive.skipped) + " unparseable records in " +
         path.string());
  }
  if (cfg.symbol.empty()) {
    if (archive.series.size() == 1) return clean(archive.series.front());
    throw ArgumentError("archive holds " + std::to_string(archive.series.size()) +
                        " symbols; pick one with --symbol");
  }
  for (const auto& series : archive.series) {
    if (series.symbol == cfg.symbol) return clean(series);
  }
  throw DataError("symbol " + cfg.symbol + " not found in " + path.string());
}

fs::path model_path(const RunConfig& cfg) {
  return fs::path(cfg.out) / (cfg.symbol + "." + cfg.method + ".model");
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw DataError("cannot create output directory " + cfg.out + ": " + ec.message());
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  out << text;
  if (!out) throw DataError("failed writing file: " + path.string());
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void write_series_csv(const fs::path& path, const SymbolSeries& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  out << "date,open,high,low,close,volume,prev_close\n";
  for (const auto& bar : series.bars) {
    out << bar.date << "," << format_double(bar.open) << "," << format_double(bar.high) << ","
        << format_double(bar.low) << "," << format_double(bar.close) << "," << bar.volume << ",";
    if (bar.prev_close.has_value()) out << format_double(*bar.prev_close);
    out << "\n";
  }
  if (!out) throw DataError("failed writing file: " + path.string());
}

int cmd_ingest(const RunConfig& cfg) {
  const ArchiveLoadResult archive = load_json_archive(cfg.data);
  ensure_out_dir(cfg);

  std::size_t total_rows = 0;
  std::size_t dropped = archive.skipped;
  std::string manifest = "symbol,rows,first_date,last_date\n";
  for (const auto& raw : archive.series) {
    const SymbolSeries series = clean(raw);
    dropped += raw.size() - series.size();
    total_rows += series.size();
    write_series_csv(fs::path(cfg.out) / (series.symbol + ".csv"), series);
    manifest += csv_quote(series.symbol) + "," + std::to_string(series.size()) + ",";
    if (!series.empty()) {
      manifest += series.bars.front().date + "," + series.bars.back().date;
    } else {
      manifest += ",";
    }
    manifest += "\n";
  }
  write_text_file(fs::path(cfg.out) / "manifest.csv", manifest);

  std::cout << "symbols: " << archive.series.size() << "\n"
            << "rows: " << total_rows << "\n"
            << "dropped_records: " << dropped << "\n";
  return 0;
}

// Fits on the train split only; the test split never reaches the fitter.
int cmd_train(RunConfig& cfg) {
  const Method method = parse_method(cfg.method);
  SymbolSeries series = load_series(cfg);
  if (cfg.symbol.empty()) cfg.symbol = series.symbol;
  const SplitSeries split = chronological_split(series, cfg.train_frac);

  GaussianHmm model;
  FitReport report;
  if (method == Method::map_fractional) {
    const auto features = fractional_features(split.train);
    if (!features.dropped_indices.empty()) {
      warn("dropped " + std::to_string(features.dropped_indices.size()) +
           " non-finite feature rows from " + cfg.symbol);
    }
    auto [fitted, fit_report] =
        fit_baum_welch(to_matrix(features.observations), cfg.states, fit_config(cfg));
    model = std::move(fitted);
    report = std::move(fit_report);
  } else {
    FluctModel fluct = fit_fluct(split.train, cfg.states, fit_config(cfg), &report);
    model = std::move(fluct.hmm);
  }
  for (const auto& warning : report.warnings) warn(warning);

  ensure_out_dir(cfg);
  save_model(model_path(cfg), model, fit_config(cfg));

  std::string log;
  log += "symbol: " + cfg.symbol + "\n";
  log += "method: " + cfg.method + "\n";
  log += "states: " + std::to_string(cfg.states) + "\n";
  log += "train_bars: " + std::to_string(split.train.size()) + "\n";
  log += "iterations: " + std::to_string(report.iterations_run) + "\n";
  log += "final_log_likelihood: " + format_double(report.log_likelihood_trace.back()) + "\n";
  log += std::string("converged: ") + (report.converged ? "true" : "false") + "\n";
  for (const auto& warning : report.warnings) log += "warning: " + warning + "\n";
  write_text_file(fs::path(cfg.out) / (cfg.symbol + "." + cfg.method + ".train.log"), log);

  std::cout << log;
  std::cout << "model: " << model_path(cfg).string() << "\n";
  return 0;
}

int cmd_backtest(RunConfig& cfg) {
  const Method method = parse_method(cfg.method);
  if (cfg.horizon < -1) throw ArgumentError("horizon must be -1 (full test split) or >= 0");
  SymbolSeries series = load_series(cfg);
  if (cfg.symbol.empty()) cfg.symbol = series.symbol;

  const fs::path model_file = model_path(cfg);
  if (!fs::exists(model_file)) {
    throw DataError("model file " + model_file.string() +
                    " not found; run the train command first");
  }
  const ModelDocument doc = load_model(model_file);

  const SplitSeries split = chronological_split(series, cfg.train_frac);
  const std::size_t n = series.size();
  const std::size_t test_size = split.test.size();
  std::size_t count = test_size;
  if (cfg.horizon >= 0) {
    count = std::min<std::size_t>(static_cast<std::size_t>(cfg.horizon), test_size);
  }
  const std::size_t start = n - count;

  std::vector<Forecast> forecasts;
  if (count > 0) {
    if (method == Method::map_fractional) {
      forecasts = rolling_forecast(doc.model, series, start, count, predictor_config(cfg));
    } else {
      SymbolSeries history;
      history.symbol = series.symbol;
      history.bars.assign(series.bars.begin(),
                          series.bars.begin() + static_cast<std::ptrdiff_t>(start));
      FluctModel fluct = make_fluct_model(doc.model, history);
      forecasts = rolling_forecast_fluct(std::move(fluct), series, start, count);
    }
  }

  ensure_out_dir(cfg);
  const std::string stem = cfg.symbol + "." + cfg.method;
  {
    std::ofstream out(fs::path(cfg.out) / (stem + ".forecast.csv"));
    if (!out) throw DataError("cannot open forecast file for writing");
    write_forecast_csv(out, forecasts, method);
  }
  {
    std::ofstream out(fs::path(cfg.out) / (stem + ".plot.csv"));
    if (!out) throw DataError("cannot open plot file for writing");
    write_plot_data(out, forecasts);
  }

  const BacktestReport report = build_report(std::move(forecasts), cfg.symbol, method);
  const std::string summary = format_report_summary(report);
  write_text_file(fs::path(cfg.out) / (stem + ".report.txt"), summary);
  std::cout << summary;
  return 0;
}

int cmd_predict(RunConfig& cfg) {
  const Method method = parse_method(cfg.method);
  SymbolSeries series = load_series(cfg);
  if (cfg.symbol.empty()) cfg.symbol = series.symbol;

  const fs::path model_file = model_path(cfg);
  if (!fs::exists(model_file)) {
    throw DataError("model file " + model_file.string() +
                    " not found; run the train command first");
  }
  const ModelDocument doc = load_model(model_file);

  // History is every bar strictly before the target day; the target day's
  // open comes from --open or, for a day present in the data, its own bar.
  SymbolSeries history;
  history.symbol = series.symbol;
  double open = cfg.open;
  if (cfg.date == "next") {
    history.bars = series.bars;
  } else {
    for (const auto& bar : series.bars) {
      if (bar.date == cfg.date) {
        if (!std::isfinite(open)) open = bar.open;
        break;
      }
      if (bar.date < cfg.date) history.bars.push_back(bar);
    }
  }
  if (history.empty()) throw DataError("no history before " + cfg.date);

  if (method == Method::map_fractional) {
    // Fractional-change prediction is anchored on the target day's open.
    if (!std::isfinite(open)) {
      if (cfg.date == "next") {
        throw ArgumentError("predicting past the end of the data requires --open");
      }
      throw ArgumentError("date " + cfg.date +
                          " is absent from the data; supply the day's open with --open");
    }
    const Forecast forecast =
        predict_close(doc.model, history, cfg.date, open, predictor_config(cfg));
    std::cout << "date: " << forecast.date << "\n"
              << "open: " << format_double(forecast.open) << "\n"
              << "predicted_close: " << format_double(forecast.predicted_close) << "\n"
              << "frac_change: " << format_double(forecast.candidate->frac_change) << "\n"
              << "log_likelihood: " << format_double(*forecast.log_likelihood) << "\n";
  } else {
    const FluctModel fluct = make_fluct_model(doc.model, history);
    const double prev_close = history.bars.back().close;
    const double predicted = predict_close_fluct(fluct, prev_close);
    std::cout << "date: " << cfg.date << "\n"
              << "prev_close: " << format_double(prev_close) << "\n"
              << "predicted_close: " << format_double(predicted) << "\n"
              << "predicted_delta: " << format_double(predicted - prev_close) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-HMM stock closing-price forecaster"};
  app.require_subcommand(1);

  RunConfig cfg;

  CLI::App* ingest = app.add_subcommand("ingest", "split a JSON archive into per-symbol CSVs");
  ingest->add_option("--data", cfg.data, "JSON archive (file or directory)")->required();
  ingest->add_option("--out", cfg.out, "output directory")->default_str(cfg.out);
  add_config_option(*ingest, cfg);

  CLI::App* train = app.add_subcommand("train", "fit a model on the train split");
  add_data_options(*train, cfg, false);
  add_model_options(*train, cfg);
  add_fit_options(*train, cfg);
  add_config_option(*train, cfg);

  CLI::App* backtest = app.add_subcommand("backtest", "roll a trained model over the test split");
  add_data_options(*backtest, cfg, false);
  add_model_options(*backtest, cfg);
  add_fit_options(*backtest, cfg);
  add_predictor_options(*backtest, cfg);
  backtest->add_option("--horizon", cfg.horizon,
                       "test days to forecast (-1 means the whole test split)")
      ->default_val(cfg.horizon);
  add_config_option(*backtest, cfg);

  CLI::App* predict = app.add_subcommand("predict", "forecast a single day's close");
  add_data_options(*predict, cfg, false);
  add_model_options(*predict, cfg);
  add_predictor_options(*predict, cfg);
  predict->add_option("--date", cfg.date, "target day (YYYY-MM-DD) or \"next\"")
      ->default_str(cfg.date);
  predict->add_option("--open", cfg.open, "target day's opening price");
  add_config_option(*predict, cfg);

  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  try {
    merge_config_file(args);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }

  std::reverse(args.begin(), args.end());  // CLI11's vector overload pops from the back
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgument;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (backtest->parsed()) return cmd_backtest(cfg);
    if (predict->parsed()) return cmd_predict(cfg);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
