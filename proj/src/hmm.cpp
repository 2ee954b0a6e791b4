#include "stockhmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "stockhmm/errors.hpp"
#include "stockhmm/util.hpp"

namespace stockhmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kStarvedWeight = 1e-250;  // state got no posterior mass at all

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += std::exp(v(i) - m);
  return m + std::log(sum);
}

struct Lattice {
  Eigen::MatrixXd log_alpha;
  double log_likelihood = kNegInf;
};

// Forward recursion over precomputed emission log-densities.
Lattice forward_lattice(const Eigen::VectorXd& log_pi, const Eigen::MatrixXd& log_trans,
                        const Eigen::MatrixXd& log_emission) {
  const Eigen::Index T = log_emission.rows();
  const Eigen::Index n = log_pi.size();
  Lattice lattice;
  lattice.log_alpha.resize(T, n);
  lattice.log_alpha.row(0) = (log_pi + log_emission.row(0).transpose()).transpose();
  Eigen::VectorXd scratch(n);
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index j = 0; j < n; ++j) {
      scratch = lattice.log_alpha.row(t - 1).transpose() + log_trans.col(j);
      lattice.log_alpha(t, j) = log_sum_exp(scratch) + log_emission(t, j);
    }
  }
  lattice.log_likelihood = log_sum_exp(lattice.log_alpha.row(T - 1).transpose());
  return lattice;
}

Eigen::MatrixXd backward_lattice(const Eigen::MatrixXd& log_trans,
                                 const Eigen::MatrixXd& log_emission) {
  const Eigen::Index T = log_emission.rows();
  const Eigen::Index n = log_trans.rows();
  Eigen::MatrixXd log_beta(T, n);
  log_beta.row(T - 1).setZero();
  Eigen::VectorXd scratch(n);
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      scratch = log_trans.row(i).transpose() + log_emission.row(t + 1).transpose() +
                log_beta.row(t + 1).transpose();
      log_beta(t, i) = log_sum_exp(scratch);
    }
  }
  return log_beta;
}

Eigen::MatrixXd emission_log_densities(const EmissionModel& emission,
                                       const Eigen::MatrixXd& observations) {
  Eigen::MatrixXd log_b(observations.rows(), emission.n_states());
  for (Eigen::Index t = 0; t < observations.rows(); ++t) {
    log_b.row(t) = emission.log_densities(observations.row(t).transpose()).transpose();
  }
  return log_b;
}

void check_observations(const Eigen::MatrixXd& observations, int dim) {
  if (observations.rows() == 0) {
    throw ArgumentError("observation sequence is empty");
  }
  if (observations.cols() != dim) {
    throw ArgumentError("observation dimension mismatch: model expects " + std::to_string(dim) +
                        ", got " + std::to_string(observations.cols()));
  }
}

// Farthest-point seeding: a seeded random first pick, then repeatedly the
// observation farthest from the chosen set (lowest index on ties).
std::vector<Eigen::Index> farthest_point_indices(const Eigen::MatrixXd& obs, int n_states,
                                                 std::uint64_t seed) {
  const Eigen::Index T = obs.rows();
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> chosen;
  chosen.push_back(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(T)));

  Eigen::VectorXd min_dist(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    min_dist(t) = (obs.row(t) - obs.row(chosen[0])).squaredNorm();
  }
  while (static_cast<int>(chosen.size()) < n_states) {
    Eigen::Index best = -1;
    double best_dist = -1.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      if (std::find(chosen.begin(), chosen.end(), t) != chosen.end()) continue;
      if (min_dist(t) > best_dist) {
        best_dist = min_dist(t);
        best = t;
      }
    }
    chosen.push_back(best);
    for (Eigen::Index t = 0; t < T; ++t) {
      min_dist(t) = std::min(min_dist(t), (obs.row(t) - obs.row(best)).squaredNorm());
    }
  }
  return chosen;
}

GaussianHmm initial_model(const Eigen::MatrixXd& obs, int n_states, const FitConfig& config,
                          FitReport& report) {
  const Eigen::Index T = obs.rows();
  const Eigen::Index D = obs.cols();

  GaussianHmm model;
  model.n_states = n_states;
  model.dim = static_cast<int>(D);
  model.start_prob = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
  model.transition = Eigen::MatrixXd::Constant(n_states, n_states, 1.0 / n_states);

  const Eigen::RowVectorXd mean = obs.colwise().mean();
  const Eigen::MatrixXd centered = obs.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(T);

  std::vector<int> flat_dims;
  for (Eigen::Index d = 0; d < D; ++d) {
    if (cov(d, d) < 1e-12) flat_dims.push_back(static_cast<int>(d));
  }
  if (!flat_dims.empty()) {
    std::ostringstream msg;
    msg << "degenerate data: near-zero variance in dimension";
    if (flat_dims.size() > 1) msg << "s";
    for (std::size_t i = 0; i < flat_dims.size(); ++i) {
      msg << (i == 0 ? " " : ", ") << flat_dims[i];
    }
    msg << "; covariances held at the regularization floor";
    report.warnings.push_back(msg.str());
  }
  cov.diagonal().array() += config.regularization_floor;

  const auto seeds = farthest_point_indices(obs, n_states, config.seed);
  model.means.reserve(n_states);
  model.covariances.reserve(n_states);
  for (int j = 0; j < n_states; ++j) {
    model.means.push_back(obs.row(seeds[static_cast<std::size_t>(j)]).transpose());
    model.covariances.push_back(cov);
  }
  return model;
}

// Closed-form M-step. Starved states keep their previous parameters.
void m_step(GaussianHmm& model, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& log_alpha,
            const Eigen::MatrixXd& log_beta, const Eigen::MatrixXd& log_emission,
            const Eigen::MatrixXd& log_trans, double log_likelihood, double floor) {
  const Eigen::Index T = obs.rows();
  const Eigen::Index n = model.n_states;
  const Eigen::Index D = obs.cols();

  // State posteriors gamma[t][j] in linear space (entries are probabilities).
  Eigen::MatrixXd gamma(T, n);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index j = 0; j < n; ++j) {
      gamma(t, j) = std::exp(log_alpha(t, j) + log_beta(t, j) - log_likelihood);
    }
  }

  // Start distribution.
  Eigen::VectorXd new_start = gamma.row(0).transpose();
  const double start_sum = new_start.sum();
  if (start_sum > kStarvedWeight) {
    model.start_prob = new_start / start_sum;
  }

  // Transitions from accumulated pairwise posteriors.
  if (T >= 2) {
    Eigen::MatrixXd xi_sum = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index t = 0; t + 1 < T; ++t) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          xi_sum(i, j) += std::exp(log_alpha(t, i) + log_trans(i, j) + log_emission(t + 1, j) +
                                   log_beta(t + 1, j) - log_likelihood);
        }
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row_sum = xi_sum.row(i).sum();
      if (row_sum > kStarvedWeight) {
        model.transition.row(i) = xi_sum.row(i) / row_sum;
      }
    }
  }

  // Gaussian parameters.
  for (Eigen::Index j = 0; j < n; ++j) {
    const double weight = gamma.col(j).sum();
    if (weight <= kStarvedWeight) continue;
    const Eigen::VectorXd mean = (obs.transpose() * gamma.col(j)) / weight;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(D, D);
    for (Eigen::Index t = 0; t < T; ++t) {
      const Eigen::VectorXd diff = obs.row(t).transpose() - mean;
      cov.noalias() += gamma(t, j) * (diff * diff.transpose());
    }
    cov /= weight;
    cov = ((cov + cov.transpose()) / 2.0).eval();
    cov.diagonal().array() += floor;
    model.means[static_cast<std::size_t>(j)] = mean;
    model.covariances[static_cast<std::size_t>(j)] = cov;
  }

  // Kill rounding drift so stochasticity holds after every iteration.
  model.start_prob /= model.start_prob.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    model.transition.row(i) /= model.transition.row(i).sum();
  }
}

}  // namespace

void GaussianHmm::validate() const {
  if (n_states < 1) throw NumericError("model invariant violated: n_states must be >= 1");
  if (dim < 1) throw NumericError("model invariant violated: dim must be >= 1");
  if (start_prob.size() != n_states) {
    throw NumericError("model invariant violated: start_prob length != n_states");
  }
  if (transition.rows() != n_states || transition.cols() != n_states) {
    throw NumericError("model invariant violated: transition must be n_states x n_states");
  }
  if (static_cast<int>(means.size()) != n_states ||
      static_cast<int>(covariances.size()) != n_states) {
    throw NumericError("model invariant violated: need one mean and covariance per state");
  }

  if (start_prob.minCoeff() < 0.0) {
    throw NumericError("model invariant violated: start probabilities must be non-negative");
  }
  if (std::abs(start_prob.sum() - 1.0) > 1e-8) {
    throw NumericError("model invariant violated: start probabilities must sum to 1");
  }
  for (int i = 0; i < n_states; ++i) {
    if (transition.row(i).minCoeff() < 0.0) {
      throw NumericError("model invariant violated: transition matrix must be non-negative");
    }
    if (std::abs(transition.row(i).sum() - 1.0) > 1e-8) {
      throw NumericError("model invariant violated: transition matrix must be row-stochastic (row " +
                         std::to_string(i) + " sums to " +
                         format_double(transition.row(i).sum()) + ")");
    }
  }
  for (int j = 0; j < n_states; ++j) {
    const auto& mean = means[static_cast<std::size_t>(j)];
    const auto& cov = covariances[static_cast<std::size_t>(j)];
    if (mean.size() != dim) {
      throw NumericError("model invariant violated: mean for state " + std::to_string(j) +
                         " has wrong dimension");
    }
    if (cov.rows() != dim || cov.cols() != dim) {
      throw NumericError("model invariant violated: covariance for state " + std::to_string(j) +
                         " has wrong dimension");
    }
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw NumericError("model invariant violated: covariance for state " + std::to_string(j) +
                         " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
      throw NumericError("model invariant violated: covariance for state " + std::to_string(j) +
                         " is not positive-definite");
    }
  }
}

double log_gaussian_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& covariance) {
  const Eigen::Index D = mean.size();
  if (x.size() != D || covariance.rows() != D || covariance.cols() != D) {
    throw ArgumentError("log_gaussian_density: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericError("covariance is not positive-definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < D; ++i) log_det += std::log(lower(i, i));
  log_det *= 2.0;
  const Eigen::VectorXd solved = lower.triangularView<Eigen::Lower>().solve(x - mean);
  return -0.5 * (static_cast<double>(D) * kLog2Pi + log_det + solved.squaredNorm());
}

EmissionModel::EmissionModel(const GaussianHmm& model) : dim_(model.dim) {
  means_ = model.means;
  cholesky_lower_.reserve(model.covariances.size());
  log_normalizer_.reserve(model.covariances.size());
  for (std::size_t j = 0; j < model.covariances.size(); ++j) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.covariances[j]);
    if (llt.info() != Eigen::Success) {
      throw NumericError("covariance for state " + std::to_string(j) +
                         " is not positive-definite");
    }
    Eigen::MatrixXd lower = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < lower.rows(); ++i) log_det += std::log(lower(i, i));
    log_det *= 2.0;
    log_normalizer_.push_back(-0.5 * (dim_ * kLog2Pi + log_det));
    cholesky_lower_.push_back(std::move(lower));
  }
}

double EmissionModel::log_density(int state, const Eigen::VectorXd& x) const {
  const auto j = static_cast<std::size_t>(state);
  const Eigen::VectorXd solved =
      cholesky_lower_[j].triangularView<Eigen::Lower>().solve(x - means_[j]);
  return log_normalizer_[j] - 0.5 * solved.squaredNorm();
}

Eigen::VectorXd EmissionModel::log_densities(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(n_states());
  for (int j = 0; j < n_states(); ++j) out(j) = log_density(j, x);
  return out;
}

ForwardResult forward_pass(const GaussianHmm& model, const Eigen::MatrixXd& observations) {
  check_observations(observations, model.dim);
  EmissionModel emission(model);
  const Eigen::MatrixXd log_b = emission_log_densities(emission, observations);
  const Eigen::VectorXd log_pi = model.start_prob.array().log();
  const Eigen::MatrixXd log_trans = model.transition.array().log();
  Lattice lattice = forward_lattice(log_pi, log_trans, log_b);
  return ForwardResult{std::move(lattice.log_alpha), lattice.log_likelihood};
}

double forward_log_likelihood(const GaussianHmm& model, const Eigen::MatrixXd& observations) {
  return forward_pass(model, observations).log_likelihood;
}

std::pair<GaussianHmm, FitReport> fit_baum_welch(const Eigen::MatrixXd& observations,
                                                 int n_states, const FitConfig& config,
                                                 const IterationCallback& on_iteration) {
  if (n_states < 1) throw ArgumentError("n_states must be >= 1");
  if (config.max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
  if (!(config.tolerance > 0.0)) throw ArgumentError("tolerance must be > 0");
  if (!(config.regularization_floor > 0.0)) {
    throw ArgumentError("regularization_floor must be > 0");
  }
  if (observations.rows() < n_states) {
    throw DataError("insufficient data: " + std::to_string(observations.rows()) +
                    " observations for " + std::to_string(n_states) + " states");
  }
  if (!observations.allFinite()) {
    throw ArgumentError("observations must be finite");
  }

  FitReport report;
  GaussianHmm model = initial_model(observations, n_states, config, report);

  double prev_ll = kNegInf;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    EmissionModel emission(model);
    const Eigen::MatrixXd log_b = emission_log_densities(emission, observations);
    const Eigen::VectorXd log_pi = model.start_prob.array().log();
    const Eigen::MatrixXd log_trans = model.transition.array().log();
    const Lattice lattice = forward_lattice(log_pi, log_trans, log_b);
    report.log_likelihood_trace.push_back(lattice.log_likelihood);

    if (iter > 1 && std::abs(lattice.log_likelihood - prev_ll) < config.tolerance) {
      report.converged = true;
      break;
    }
    prev_ll = lattice.log_likelihood;

    const Eigen::MatrixXd log_beta = backward_lattice(log_trans, log_b);
    m_step(model, observations, lattice.log_alpha, log_beta, log_b, log_trans,
           lattice.log_likelihood, config.regularization_floor);
    report.iterations_run = iter;
    if (on_iteration) on_iteration(model, iter);
  }

  return {std::move(model), std::move(report)};
}

}  // namespace stockhmm
