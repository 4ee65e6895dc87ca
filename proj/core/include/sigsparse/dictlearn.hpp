#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigsparse/dictionary.hpp"

namespace sigsparse {

struct KsvdOptions {
  int atoms = 60;
  int rho = 3;
  int max_iters = 50;
  std::uint64_t seed = 0;
};

struct KsvdReport {
  /// ||X - DA||_F^2 after the first coding pass with the initial dictionary.
  double initial_objective = 0.0;
  /// ||X - DA||_F^2 after each full iteration (coding + all atom updates).
  std::vector<double> objective;
  int replaced_atoms = 0;
};

/// K-SVD from a random-sample initialisation: K distinct, normalised data
/// columns drawn with options.seed.
Dictionary ksvd_fit(const Eigen::MatrixXd& X, const KsvdOptions& options,
                    KsvdReport* report = nullptr);

/// K-SVD warm-started from `init`; options.atoms is ignored.
Dictionary ksvd_train(const Eigen::MatrixXd& X, const Dictionary& init,
                      const KsvdOptions& options, KsvdReport* report = nullptr);

/// Cascade update with a new signature's patches only.
inline Dictionary ksvd_update(const Dictionary& dict, const Eigen::MatrixXd& X_new, int rho,
                              int iters = 10, std::uint64_t seed = 0,
                              KsvdReport* report = nullptr) {
  return ksvd_train(X_new, dict, KsvdOptions{dict.K(), rho, iters, seed}, report);
}

/// Random-sample initial dictionary used by ksvd_fit and online_fit.
Eigen::MatrixXd sample_initial_atoms(const Eigen::MatrixXd& X, int atoms, std::uint64_t seed);

enum class Prior : std::uint8_t { None, APositive, DNonNegative, Nmf };
const char* to_string(Prior p);
Prior prior_from_string(const std::string& s);

struct OnlineOptions {
  int atoms = 60;
  double lambda = 0.15;
  int minibatch = 512;
  /// Fixed iteration count. When unset the count is estimated from
  /// time_budget_s with a short timed calibration run.
  std::optional<int> iterations;
  double time_budget_s = 60.0;
  Prior prior = Prior::None;
  std::uint64_t seed = 0;
};

struct OnlineReport {
  /// Mean per-sample lasso objective of each mini-batch, measured at coding
  /// time (before the dictionary update of that iteration).
  std::vector<double> objective;
  int iterations = 0;
};

/// Online dictionary learning: mini-batch lasso coding, t^-1 weighted
/// sufficient statistics, one block-coordinate sweep over the atoms per
/// iteration followed by projection onto the constraint set.
Dictionary online_fit(const std::vector<Eigen::MatrixXd>& stream, const OnlineOptions& options,
                      const Dictionary* init = nullptr, OnlineReport* report = nullptr);

/// Iterations that fit in options.time_budget_s on this machine.
int estimate_online_iterations(const std::vector<Eigen::MatrixXd>& stream,
                               const OnlineOptions& options);

}  // namespace sigsparse
