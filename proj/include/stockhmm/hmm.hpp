#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace stockhmm {

/// Gaussian-emission hidden Markov model: start distribution, row-stochastic
/// transition matrix, and one (mean, covariance) pair per state. Immutable in
/// normal use; fitted models are safe to share across threads.
struct GaussianHmm {
  int n_states = 0;
  int dim = 0;
  Eigen::VectorXd start_prob;                // length n_states, sums to 1
  Eigen::MatrixXd transition;                // n_states x n_states, rows sum to 1
  std::vector<Eigen::VectorXd> means;        // n_states vectors of length dim
  std::vector<Eigen::MatrixXd> covariances;  // n_states symmetric PD dim x dim

  /// Throws NumericError naming the violated invariant.
  void validate() const;
};

struct FitConfig {
  int max_iterations = 10000;
  double tolerance = 1e-3;  // stop when the log-likelihood gain drops below this
  double regularization_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct FitReport {
  int iterations_run = 0;  // parameter updates performed
  std::vector<double> log_likelihood_trace;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// log N(x; mean, covariance). Throws NumericError if the covariance is not
/// positive-definite.
double log_gaussian_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& covariance);

/// Per-state Cholesky factors cached once so repeated emission evaluation
/// (grid scans, filtering) costs one triangular solve per call.
class EmissionModel {
 public:
  explicit EmissionModel(const GaussianHmm& model);

  double log_density(int state, const Eigen::VectorXd& x) const;
  /// All states at once; length n_states.
  Eigen::VectorXd log_densities(const Eigen::VectorXd& x) const;

  int n_states() const { return static_cast<int>(means_.size()); }
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> cholesky_lower_;
  std::vector<double> log_normalizer_;  // -(dim*log(2*pi) + log det cov)/2
};

struct ForwardResult {
  Eigen::MatrixXd log_alpha;  // T x n_states
  double log_likelihood = 0.0;
};

/// Forward recursion entirely in log space with log-sum-exp; Theta(n^2 T).
ForwardResult forward_pass(const GaussianHmm& model, const Eigen::MatrixXd& observations);

/// log P(observations | model) via the forward recursion.
double forward_log_likelihood(const GaussianHmm& model, const Eigen::MatrixXd& observations);

/// Invoked with the updated model after each EM iteration.
using IterationCallback = std::function<void(const GaussianHmm&, int iteration)>;

/// Baum-Welch EM fit: forward-backward E-step, closed-form M-step for the
/// start distribution, transitions, means, and covariances. Deterministic
/// given config.seed. Degenerate (zero-variance) data yields a model with
/// floored covariances plus a warning in the report, never an abort.
std::pair<GaussianHmm, FitReport> fit_baum_welch(const Eigen::MatrixXd& observations,
                                                 int n_states, const FitConfig& config,
                                                 const IterationCallback& on_iteration = {});

}  // namespace stockhmm
