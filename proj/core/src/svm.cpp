#include "sigsparse/svm.hpp"

#include <cmath>
#include <limits>

#include "sigsparse/error.hpp"

namespace sigsparse {

double rbf_kernel(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double gamma) {
  return std::exp(-gamma * (u - v).squaredNorm());
}

RbfSvm RbfSvm::train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvmParams& p) {
  const Eigen::Index n = X.rows();
  if (n != y.size()) throw Error("svm: sample/label count mismatch");
  if (!(p.C > 0.0) || !(p.gamma > 0.0)) throw Error("svm: C and gamma must be positive");
  bool has_pos = false;
  bool has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) == 1.0) has_pos = true;
    else if (y(i) == -1.0) has_neg = true;
    else throw Error("svm: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw Error("svm: both classes are required");

  // Full kernel matrix; writer-dependent training sets are small.
  const Eigen::VectorXd sq = X.rowwise().squaredNorm();
  Eigen::MatrixXd Kmat = -2.0 * X * X.transpose();
  Kmat.colwise() += sq;
  Kmat.rowwise() += sq.transpose();
  Kmat = (-p.gamma * Kmat.cwiseMax(0.0)).array().exp().matrix();

  constexpr double kTau = 1e-12;
  const double C = p.C;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);
  auto Q = [&](Eigen::Index i, Eigen::Index j) { return y(i) * y(j) * Kmat(i, j); };
  auto upper = [&](Eigen::Index t) { return alpha(t) >= C; };
  auto lower = [&](Eigen::Index t) { return alpha(t) <= 0.0; };

  long iter = 0;
  for (; iter < p.max_iterations; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y(t) == 1.0) {
        if (!upper(t) && -G(t) >= gmax) { gmax = -G(t); i = t; }
      } else {
        if (!lower(t) && G(t) >= gmax) { gmax = G(t); i = t; }
      }
    }
    if (i < 0) break;

    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y(t) == 1.0) {
        if (lower(t)) continue;
        const double grad_diff = gmax + G(t);
        gmax2 = std::max(gmax2, G(t));
        if (grad_diff > 0.0) {
          double quad = Kmat(i, i) + Kmat(t, t) - 2.0 * y(i) * Q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) { best_obj = obj; j = t; }
        }
      } else {
        if (upper(t)) continue;
        const double grad_diff = gmax - G(t);
        gmax2 = std::max(gmax2, -G(t));
        if (grad_diff > 0.0) {
          double quad = Kmat(i, i) + Kmat(t, t) + 2.0 * y(i) * Q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) { best_obj = obj; j = t; }
        }
      }
    }
    if (gmax + gmax2 < p.tol || j < 0) break;

    const double old_ai = alpha(i);
    const double old_aj = alpha(j);
    if (y(i) != y(j)) {
      double quad = Kmat(i, i) + Kmat(j, j) + 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G(i) - G(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = diff; }
      } else {
        if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = -diff; }
      }
      if (diff > 0.0) {
        if (alpha(i) > C) { alpha(i) = C; alpha(j) = C - diff; }
      } else {
        if (alpha(j) > C) { alpha(j) = C; alpha(i) = C + diff; }
      }
    } else {
      double quad = Kmat(i, i) + Kmat(j, j) - 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (G(i) - G(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > C) {
        if (alpha(i) > C) { alpha(i) = C; alpha(j) = sum - C; }
      } else {
        if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = sum; }
      }
      if (sum > C) {
        if (alpha(j) > C) { alpha(j) = C; alpha(i) = sum - C; }
      } else {
        if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = sum; }
      }
    }
    const double dai = alpha(i) - old_ai;
    const double daj = alpha(j) - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) G(t) += Q(i, t) * dai + Q(j, t) * daj;
  }

  // rho from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * G(t);
    if (upper(t)) {
      if (y(t) == -1.0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y(t) == 1.0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);

  RbfSvm model;
  model.gamma_ = p.gamma;
  model.C_ = C;
  model.bias_ = -rho;
  model.alpha_ = alpha;
  model.iterations_ = iter;
  int nsv = 0;
  for (Eigen::Index t = 0; t < n; ++t) nsv += alpha(t) > 0.0;
  model.sv_.resize(nsv, X.cols());
  model.coef_.resize(nsv);
  int k = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha(t) <= 0.0) continue;
    model.sv_.row(k) = X.row(t);
    model.coef_(k) = y(t) * alpha(t);
    ++k;
  }
  return model;
}

RbfSvm RbfSvm::from_parts(Eigen::MatrixXd support_vectors, Eigen::VectorXd dual_coef, double bias,
                          double gamma, double C) {
  if (support_vectors.rows() != dual_coef.size()) throw Error("svm: inconsistent model parts");
  RbfSvm m;
  m.sv_ = std::move(support_vectors);
  m.coef_ = std::move(dual_coef);
  m.bias_ = bias;
  m.gamma_ = gamma;
  m.C_ = C;
  return m;
}

double RbfSvm::decision(const Eigen::VectorXd& x) const {
  if (x.size() != sv_.cols()) throw Error("svm: descriptor length does not match the model");
  double f = bias_;
  for (Eigen::Index k = 0; k < sv_.rows(); ++k)
    f += coef_(k) * std::exp(-gamma_ * (sv_.row(k).transpose() - x).squaredNorm());
  return f;
}

Eigen::VectorXd RbfSvm::decision(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = decision(Eigen::VectorXd(X.row(i).transpose()));
  return out;
}

}  // namespace sigsparse
