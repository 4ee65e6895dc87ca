#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sigsparse/dictionary.hpp"
#include "sigsparse/patches.hpp"

namespace sigsparse {

struct OmpOptions {
  int rho = 3;
  /// Select on signed correlation and keep coefficients non-negative.
  bool positive = false;
  /// Stop once ||r|| < rel_tol * ||x|| (batch mode floors rel_tol at 1e-7).
  double rel_tol = 1e-10;
  /// Batch-OMP (precomputed D^T D / D^T X, progressive Cholesky). When false
  /// the residual is recomputed explicitly after every selection.
  bool batch = true;
};

/// Greedy l0 coding of every column of X with at most rho atoms.
SparseCodes omp_encode(const Dictionary& dict, const Eigen::MatrixXd& X,
                       const OmpOptions& options = {});
inline SparseCodes omp_encode(const Dictionary& dict, const PatchMatrix& X,
                              const OmpOptions& options = {}) {
  return omp_encode(dict, X.data, options);
}

/// Step-by-step record of one OMP run (explicit-residual path).
struct OmpTrace {
  std::vector<int> support;                    // selection order
  std::vector<Eigen::VectorXd> coefficients;   // on support[0..s] after step s
  std::vector<Eigen::VectorXd> residuals;      // after step s
  std::uint8_t flags = kCodeOk;
};
OmpTrace omp_trace(const Dictionary& dict, const Eigen::VectorXd& x,
                   const OmpOptions& options = {});

struct LarsOptions {
  double lambda = 0.15;
  /// Restrict the path to alpha >= 0.
  bool positive = false;
  /// Breakpoint cap per column; 0 means 8 * K.
  int max_steps = 0;
};

/// Solves min 0.5 ||x - D a||^2 + lambda ||a||_1 for every column by
/// following the homotopy path from lambda_max down to lambda.
SparseCodes lars_lasso_encode(const Dictionary& dict, const Eigen::MatrixXd& X,
                              const LarsOptions& options = {});
inline SparseCodes lars_lasso_encode(const Dictionary& dict, const PatchMatrix& X,
                                     const LarsOptions& options = {}) {
  return lars_lasso_encode(dict, X.data, options);
}

/// Single-column homotopy solve from the Gram matrix G = D^T D and the
/// correlations c = D^T x. `flags` receives CodeFlag bits.
Eigen::VectorXd lars_lasso_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& corr,
                                 const LarsOptions& options, std::uint8_t* flags = nullptr);

/// ||X - D A||_F.
double reconstruction_error(const Dictionary& dict, const Eigen::MatrixXd& X,
                            const SparseCodes& codes);
double reconstruction_error(const Dictionary& dict, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& A);

/// 0.5 ||x - D a||^2 + lambda ||a||_1 summed over columns.
double lasso_objective(const Dictionary& dict, const Eigen::MatrixXd& X,
                       const Eigen::MatrixXd& A, double lambda);

}  // namespace sigsparse
