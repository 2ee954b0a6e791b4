#pragma once

// Shared fixtures and independent oracles for the test suite. The oracles
// (brute-force likelihood, long-double Gaussian density) deliberately avoid
// the library's own log-sum-exp and Eigen solver paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stockhmm/hmm.hpp"
#include "stockhmm/market_data.hpp"

namespace testutil {

inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline double gauss_normal(std::mt19937_64& rng) {
  double u1 = unit_double(rng);
  while (u1 == 0.0) u1 = unit_double(rng);
  const double u2 = unit_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// ISO dates advancing one day per index from 2015-01-01 (Gregorian).
inline std::string make_date(int index) {
  static const int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int year = 2015;
  int month = 1;
  int day = 1;
  for (int i = 0; i < index; ++i) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    int dim = days_in_month[month - 1];
    if (month == 2 && leap) dim = 29;
    if (++day > dim) {
      day = 1;
      if (++month > 12) {
        month = 1;
        ++year;
      }
    }
  }
  std::ostringstream out;
  out << year << '-' << (month < 10 ? "0" : "") << month << '-' << (day < 10 ? "0" : "") << day;
  return out.str();
}

// Geometric random walk with |frac_change| <= max_frac and consistent
// intraday extremes; open of day t is close of day t-1.
inline stockhmm::SymbolSeries random_walk_series(const std::string& symbol, int n,
                                                 std::uint64_t seed, double start_price = 100.0,
                                                 double max_frac = 0.02) {
  std::mt19937_64 rng(seed);
  stockhmm::SymbolSeries series;
  series.symbol = symbol;
  double prev_close = start_price;
  for (int i = 0; i < n; ++i) {
    const double open = prev_close;
    const double frac = (2.0 * unit_double(rng) - 1.0) * max_frac;
    const double close = open * (1.0 + frac);
    const double hi_pad = unit_double(rng) * 0.01;
    const double lo_pad = unit_double(rng) * 0.01;
    stockhmm::StockBar bar;
    bar.date = make_date(i);
    bar.open = open;
    bar.close = close;
    bar.high = std::max(open, close) * (1.0 + hi_pad);
    bar.low = std::min(open, close) * (1.0 - lo_pad);
    bar.volume = 100000 + static_cast<long long>(rng() % 100000);
    series.bars.push_back(std::move(bar));
    prev_close = close;
  }
  return series;
}

inline Eigen::VectorXd random_stochastic_vector(std::mt19937_64& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = 0.05 + unit_double(rng);
  return v / v.sum();
}

inline stockhmm::GaussianHmm random_model(std::mt19937_64& rng, int n_states, int dim) {
  stockhmm::GaussianHmm model;
  model.n_states = n_states;
  model.dim = dim;
  model.start_prob = random_stochastic_vector(rng, n_states);
  model.transition.resize(n_states, n_states);
  for (int i = 0; i < n_states; ++i) {
    model.transition.row(i) = random_stochastic_vector(rng, n_states).transpose();
  }
  for (int j = 0; j < n_states; ++j) {
    Eigen::VectorXd mean(dim);
    for (int d = 0; d < dim; ++d) mean(d) = 10.0 * unit_double(rng) - 5.0;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c <= r; ++c) l(r, c) = 2.0 * unit_double(rng) - 1.0;
    }
    Eigen::MatrixXd cov = l * l.transpose();
    cov.diagonal().array() += 0.5;
    model.means.push_back(std::move(mean));
    model.covariances.push_back(std::move(cov));
  }
  return model;
}

// Draws observations from the model's own generative process.
inline Eigen::MatrixXd sample_sequence(const stockhmm::GaussianHmm& model, int length,
                                       std::mt19937_64& rng) {
  Eigen::MatrixXd obs(length, model.dim);
  std::vector<Eigen::MatrixXd> chol;
  for (const auto& cov : model.covariances) {
    chol.push_back(Eigen::MatrixXd(Eigen::LLT<Eigen::MatrixXd>(cov).matrixL()));
  }
  auto pick = [&](const Eigen::VectorXd& dist) {
    const double u = unit_double(rng);
    double acc = 0.0;
    for (int i = 0; i < dist.size(); ++i) {
      acc += dist(i);
      if (u < acc) return i;
    }
    return static_cast<int>(dist.size()) - 1;
  };
  int state = pick(model.start_prob);
  for (int t = 0; t < length; ++t) {
    if (t > 0) state = pick(model.transition.row(state).transpose());
    Eigen::VectorXd z(model.dim);
    for (int d = 0; d < model.dim; ++d) z(d) = gauss_normal(rng);
    obs.row(t) =
        (model.means[static_cast<std::size_t>(state)] + chol[static_cast<std::size_t>(state)] * z)
            .transpose();
  }
  return obs;
}

// Plain-arithmetic multivariate normal log-density: long-double Gaussian
// elimination with partial pivoting for both the determinant and the solve.
inline double independent_log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov) {
  const int d = static_cast<int>(mean.size());
  std::vector<std::vector<long double>> a(d, std::vector<long double>(d));
  std::vector<long double> b(d);
  for (int i = 0; i < d; ++i) {
    b[i] = static_cast<long double>(x(i)) - static_cast<long double>(mean(i));
    for (int j = 0; j < d; ++j) a[i][j] = static_cast<long double>(cov(i, j));
  }
  std::vector<long double> diff = b;

  long double det = 1.0L;
  for (int col = 0; col < d; ++col) {
    int pivot = col;
    for (int r = col + 1; r < d; ++r) {
      if (std::abs(static_cast<double>(a[r][col])) > std::abs(static_cast<double>(a[pivot][col])))
        pivot = r;
    }
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      std::swap(b[pivot], b[col]);
      det = -det;
    }
    det *= a[col][col];
    for (int r = col + 1; r < d; ++r) {
      const long double factor = a[r][col] / a[col][col];
      for (int c = col; c < d; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<long double> y(d);
  for (int r = d - 1; r >= 0; --r) {
    long double acc = b[r];
    for (int c = r + 1; c < d; ++c) acc -= a[r][c] * y[c];
    y[r] = acc / a[r][r];
  }
  long double quad = 0.0L;
  for (int i = 0; i < d; ++i) quad += diff[i] * y[i];

  const long double log_2pi = 1.837877066409345483560659472811L;
  return static_cast<double>(-0.5L * (d * log_2pi + std::log(det) + quad));
}

// Exhaustive likelihood over all n^T hidden-state paths.
inline double brute_force_log_likelihood(const stockhmm::GaussianHmm& model,
                                         const Eigen::MatrixXd& obs) {
  const int n = model.n_states;
  const auto T = static_cast<int>(obs.rows());
  std::vector<double> path_logs;
  std::vector<int> path(static_cast<std::size_t>(T), 0);
  while (true) {
    double lp = std::log(model.start_prob(path[0]));
    lp += independent_log_gaussian(obs.row(0).transpose(),
                                   model.means[static_cast<std::size_t>(path[0])],
                                   model.covariances[static_cast<std::size_t>(path[0])]);
    for (int t = 1; t < T; ++t) {
      lp += std::log(model.transition(path[static_cast<std::size_t>(t - 1)],
                                      path[static_cast<std::size_t>(t)]));
      lp += independent_log_gaussian(obs.row(t).transpose(),
                                     model.means[static_cast<std::size_t>(path[t])],
                                     model.covariances[static_cast<std::size_t>(path[t])]);
    }
    path_logs.push_back(lp);

    int pos = T - 1;
    while (pos >= 0 && path[static_cast<std::size_t>(pos)] == n - 1) {
      path[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++path[static_cast<std::size_t>(pos)];
  }

  double m = -std::numeric_limits<double>::infinity();
  for (double lp : path_logs) m = std::max(m, lp);
  long double acc = 0.0L;
  for (double lp : path_logs) acc += std::exp(static_cast<long double>(lp) - m);
  return static_cast<double>(m + std::log(static_cast<double>(acc)));
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("stockhmm_test_" + tag + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace testutil
