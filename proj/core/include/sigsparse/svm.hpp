#pragma once

#include <Eigen/Dense>

namespace sigsparse {

struct SvmParams {
  double C = 1.0;
  double gamma = 1.0;
  /// Stopping tolerance on the maximal KKT violation.
  double tol = 1e-3;
  long max_iterations = 1'000'000;
};

/// Binary C-SVM with the RBF kernel k(u, v) = exp(-gamma ||u - v||^2),
/// trained by SMO with second-order working-set selection.
class RbfSvm {
 public:
  /// Rows of X are samples; labels are +1 / -1.
  static RbfSvm train(const Eigen::MatrixXd& X, const Eigen::VectorXd& labels,
                      const SvmParams& params);

  /// sum_i y_i alpha_i k(x_i, x) + b
  double decision(const Eigen::VectorXd& x) const;
  Eigen::VectorXd decision(const Eigen::MatrixXd& X) const;

  /// Builds a model directly from its parts (used by deserialisation).
  static RbfSvm from_parts(Eigen::MatrixXd support_vectors, Eigen::VectorXd dual_coef,
                           double bias, double gamma, double C);

  const Eigen::MatrixXd& support_vectors() const { return sv_; }
  /// y_i * alpha_i for every support vector.
  const Eigen::VectorXd& dual_coef() const { return coef_; }
  double bias() const { return bias_; }
  double gamma() const { return gamma_; }
  double C() const { return C_; }
  int dimension() const { return static_cast<int>(sv_.cols()); }

  /// Dual variables of every training sample (zero for non-support vectors).
  const Eigen::VectorXd& training_alpha() const { return alpha_; }
  long iterations() const { return iterations_; }

 private:
  Eigen::MatrixXd sv_;
  Eigen::VectorXd coef_;
  Eigen::VectorXd alpha_;
  double bias_ = 0.0;
  double gamma_ = 1.0;
  double C_ = 1.0;
  long iterations_ = 0;
};

double rbf_kernel(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double gamma);

}  // namespace sigsparse
