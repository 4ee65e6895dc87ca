#include "sigsparse/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigsparse/error.hpp"

namespace sigsparse {

namespace {

// Pivot floor for the progressive Cholesky factor, relative to the atom's
// squared norm. Below it the new atom is (numerically) in the span of the
// already selected ones.
constexpr double kPivotFloor = 1e-12;

// Non-negative least squares on normal equations: min 0.5 g'Qg - b'g, g >= 0
// (Lawson-Hanson active set). Q is tiny (at most rho x rho).
Eigen::VectorXd nnls_normal(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b) {
  const Eigen::Index s = b.size();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(s);
  std::vector<bool> passive(static_cast<std::size_t>(s), false);
  const double tol = 1e-14 * std::max(1.0, b.cwiseAbs().maxCoeff());

  for (int outer = 0; outer < 3 * s + 3; ++outer) {
    const Eigen::VectorXd w = b - Q * z;
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < s; ++j)
      if (!passive[j] && w(j) > tol && (best < 0 || w(j) > w(best))) best = j;
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < 3 * s + 3; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < s; ++j)
        if (passive[j]) idx.push_back(j);
      Eigen::MatrixXd Qp(idx.size(), idx.size());
      Eigen::VectorXd bp(idx.size());
      for (std::size_t a = 0; a < idx.size(); ++a) {
        bp(a) = b(idx[a]);
        for (std::size_t c = 0; c < idx.size(); ++c) Qp(a, c) = Q(idx[a], idx[c]);
      }
      const Eigen::VectorXd sp = Qp.ldlt().solve(bp);
      if ((sp.array() > 0.0).all()) {
        z.setZero();
        for (std::size_t a = 0; a < idx.size(); ++a) z(idx[a]) = sp(a);
        break;
      }
      double step = 1.0;
      for (std::size_t a = 0; a < idx.size(); ++a) {
        if (sp(a) <= 0.0) {
          const double zj = z(idx[a]);
          const double denom = zj - sp(a);
          if (denom > 0.0) step = std::min(step, zj / denom);
        }
      }
      for (std::size_t a = 0; a < idx.size(); ++a) z(idx[a]) += step * (sp(a) - z(idx[a]));
      for (std::size_t a = 0; a < idx.size(); ++a) {
        if (z(idx[a]) <= tol) {
          z(idx[a]) = 0.0;
          passive[idx[a]] = false;
        }
      }
    }
  }
  return z;
}

struct ColumnCode {
  std::vector<int> support;
  Eigen::VectorXd coeffs;
  std::uint8_t flags = kCodeOk;
};

// Picks the next atom from the current correlations; -1 when nothing
// qualifies. Lowest index wins ties.
int select_atom(const Eigen::VectorXd& corr, const std::vector<char>& chosen, bool positive,
                bool* tie) {
  int best = -1;
  double best_val = positive ? 0.0 : -1.0;
  for (Eigen::Index j = 0; j < corr.size(); ++j) {
    if (chosen[j]) continue;
    const double v = positive ? corr(j) : std::abs(corr(j));
    if (v > best_val) {
      best_val = v;
      best = static_cast<int>(j);
    } else if (best >= 0 && v == best_val && tie) {
      *tie = true;
    }
  }
  if (positive && best >= 0 && best_val <= 0.0) return -1;
  return best;
}

// Appends row s of the Cholesky factor of G_II for the new atom k.
// Returns false when the pivot is too small.
bool extend_cholesky(Eigen::MatrixXd& L, int s, const Eigen::MatrixXd& G,
                     const std::vector<int>& support, int k) {
  const double gkk = G(k, k);
  if (gkk <= 0.0) return false;
  if (s == 0) {
    L(0, 0) = std::sqrt(gkk);
    return true;
  }
  Eigen::VectorXd g(s);
  for (int i = 0; i < s; ++i) g(i) = G(support[i], k);
  const Eigen::VectorXd w =
      L.topLeftCorner(s, s).triangularView<Eigen::Lower>().solve(g);
  const double pivot = gkk - w.squaredNorm();
  if (pivot <= kPivotFloor * gkk) return false;
  L.block(s, 0, 1, s) = w.transpose();
  L(s, s) = std::sqrt(pivot);
  return true;
}

Eigen::VectorXd cholesky_solve(const Eigen::MatrixXd& L, int s, const Eigen::VectorXd& rhs) {
  const auto Ls = L.topLeftCorner(s, s).triangularView<Eigen::Lower>();
  Eigen::VectorXd y = Ls.solve(rhs);
  return Ls.transpose().solve(y);
}

Eigen::VectorXd support_coefficients(const Eigen::MatrixXd& L, const Eigen::MatrixXd& G,
                                     const std::vector<int>& support,
                                     const Eigen::VectorXd& corr0, bool positive) {
  const int s = static_cast<int>(support.size());
  Eigen::VectorXd b(s);
  for (int i = 0; i < s; ++i) b(i) = corr0(support[i]);
  Eigen::VectorXd gamma = cholesky_solve(L, s, b);
  if (positive && (gamma.array() < 0.0).any()) {
    Eigen::MatrixXd Q(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) Q(i, j) = G(support[i], support[j]);
    gamma = nnls_normal(Q, b);
  }
  return gamma;
}

ColumnCode omp_column_batch(const Eigen::MatrixXd& G, const Eigen::VectorXd& corr0,
                            double xnorm2, const OmpOptions& opt) {
  ColumnCode out;
  if (xnorm2 == 0.0) {
    out.flags = kCodeZeroInput;
    return out;
  }
  const int K = static_cast<int>(G.rows());
  // Relative stop floored at 1e-7 (energy update precision).
  const double rel = std::max(opt.rel_tol, 1e-7);
  const double tol2 = rel * rel * xnorm2;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(opt.rho, opt.rho);
  std::vector<char> chosen(static_cast<std::size_t>(K), 0);
  Eigen::VectorXd corr = corr0;
  double err2 = xnorm2;

  for (int s = 0; s < opt.rho; ++s) {
    if (err2 < tol2) break;
    bool tie = false;
    const int k = select_atom(corr, chosen, opt.positive, &tie);
    if (k < 0) break;
    if (!extend_cholesky(L, s, G, out.support, k)) {
      out.flags |= kCodeRankDeficient;
      break;
    }
    if (tie) out.flags |= kCodeTieBreak;
    out.support.push_back(k);
    chosen[k] = 1;

    out.coeffs = support_coefficients(L, G, out.support, corr0, opt.positive);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(K);
    double fit = 0.0;
    for (std::size_t i = 0; i < out.support.size(); ++i) {
      beta += G.col(out.support[i]) * out.coeffs(i);
      fit += out.coeffs(i) * corr0(out.support[i]);
    }
    corr = corr0 - beta;
    // ||x - D_I g||^2 = x'x - 2 g'c_I + g'G_II g, and g'G_II g = g'(c_I - corr_I).
    double quad = 0.0;
    for (std::size_t i = 0; i < out.support.size(); ++i)
      quad += out.coeffs(i) * (corr0(out.support[i]) - corr(out.support[i]));
    err2 = xnorm2 - 2.0 * fit + quad;
  }
  return out;
}

}  // namespace

OmpTrace omp_trace(const Dictionary& dict, const Eigen::VectorXd& x, const OmpOptions& opt) {
  if (x.size() != dict.n()) throw Error("omp: signal dimension does not match dictionary");
  if (opt.rho < 1 || opt.rho > dict.K()) throw Error("omp: rho must be in [1, K]");
  OmpTrace trace;
  const double xnorm2 = x.squaredNorm();
  if (xnorm2 == 0.0) {
    trace.flags = kCodeZeroInput;
    return trace;
  }
  const Eigen::MatrixXd& D = dict.atoms();
  const Eigen::MatrixXd& G = dict.gram();
  const Eigen::VectorXd corr0 = D.transpose() * x;
  const double tol = opt.rel_tol * std::sqrt(xnorm2);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(opt.rho, opt.rho);
  std::vector<char> chosen(static_cast<std::size_t>(dict.K()), 0);
  Eigen::VectorXd residual = x;

  for (int s = 0; s < opt.rho; ++s) {
    if (residual.norm() < tol) break;
    const Eigen::VectorXd corr = D.transpose() * residual;
    bool tie = false;
    const int k = select_atom(corr, chosen, opt.positive, &tie);
    if (k < 0) break;
    if (!extend_cholesky(L, s, G, trace.support, k)) {
      trace.flags |= kCodeRankDeficient;
      break;
    }
    if (tie) trace.flags |= kCodeTieBreak;
    trace.support.push_back(k);
    chosen[k] = 1;
    Eigen::VectorXd gamma = support_coefficients(L, G, trace.support, corr0, opt.positive);
    residual = x;
    for (std::size_t i = 0; i < trace.support.size(); ++i)
      residual -= D.col(trace.support[i]) * gamma(i);
    trace.coefficients.push_back(std::move(gamma));
    trace.residuals.push_back(residual);
  }
  return trace;
}

SparseCodes omp_encode(const Dictionary& dict, const Eigen::MatrixXd& X, const OmpOptions& opt) {
  if (X.rows() != dict.n()) throw Error("omp: signal dimension does not match dictionary");
  if (opt.rho < 1 || opt.rho > dict.K()) throw Error("omp: rho must be in [1, K]");

  const Eigen::Index M = X.cols();
  SparseCodes codes;
  codes.solver = Solver::Omp;
  codes.sparsity_param = opt.rho;
  codes.positive = opt.positive;
  codes.flags.assign(static_cast<std::size_t>(M), kCodeOk);
  codes.A.resize(dict.K(), M);
  codes.A.reserve(Eigen::VectorXi::Constant(M, opt.rho));

  const Eigen::MatrixXd& G = dict.gram();
  Eigen::MatrixXd corr0;
  if (opt.batch) corr0 = dict.atoms().transpose() * X;

  for (Eigen::Index i = 0; i < M; ++i) {
    std::vector<int> support;
    Eigen::VectorXd coeffs;
    std::uint8_t flags = kCodeOk;
    if (opt.batch) {
      ColumnCode c = omp_column_batch(G, corr0.col(i), X.col(i).squaredNorm(), opt);
      support = std::move(c.support);
      coeffs = std::move(c.coeffs);
      flags = c.flags;
    } else {
      OmpTrace t = omp_trace(dict, X.col(i), opt);
      support = std::move(t.support);
      if (!t.coefficients.empty()) coeffs = t.coefficients.back();
      flags = t.flags;
    }
    codes.flags[static_cast<std::size_t>(i)] = flags;
    std::vector<std::pair<int, double>> entries;
    for (std::size_t s = 0; s < support.size(); ++s)
      if (coeffs(static_cast<Eigen::Index>(s)) != 0.0)
        entries.emplace_back(support[s], coeffs(static_cast<Eigen::Index>(s)));
    std::sort(entries.begin(), entries.end());
    for (const auto& [row, v] : entries) codes.A.insert(row, i) = v;
  }
  codes.A.makeCompressed();
  return codes;
}

Eigen::VectorXd lars_lasso_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& c0,
                                 const LarsOptions& opt, std::uint8_t* flags_out) {
  const int K = static_cast<int>(G.rows());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(K);
  std::uint8_t flags = kCodeOk;
  auto finish = [&](Eigen::VectorXd v) {
    if (flags_out) *flags_out = flags;
    return v;
  };
  if (!(opt.lambda > 0.0)) throw Error("lars: lambda must be > 0");
  if (c0.isZero(0.0)) {
    flags |= kCodeZeroInput;
    return finish(beta);
  }

  // Entry: the most correlated atom (signed for the positive variant).
  int first = -1;
  double lam = opt.positive ? 0.0 : -1.0;
  for (int j = 0; j < K; ++j) {
    const double v = opt.positive ? c0(j) : std::abs(c0(j));
    if (v > lam) {
      lam = v;
      first = j;
    } else if (first >= 0 && v == lam) {
      flags |= kCodeTieBreak;
    }
  }
  if (first < 0 || lam <= opt.lambda) return finish(beta);

  std::vector<int> active{first};
  std::vector<double> sign{opt.positive ? 1.0 : (c0(first) > 0.0 ? 1.0 : -1.0)};
  std::vector<char> in_active(static_cast<std::size_t>(K), 0);
  in_active[first] = 1;

  const int max_steps = opt.max_steps > 0 ? opt.max_steps : 8 * K;
  const double eps = 1e-12 * std::max(1.0, lam);

  for (int step = 0; step < max_steps; ++step) {
    const int na = static_cast<int>(active.size());
    Eigen::MatrixXd Gaa(na, na);
    Eigen::VectorXd s(na);
    for (int a = 0; a < na; ++a) {
      s(a) = sign[a];
      for (int b = 0; b < na; ++b) Gaa(a, b) = G(active[a], active[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Gaa);
    if (llt.info() != Eigen::Success) {
      flags |= kCodeRankDeficient;
      break;
    }
    const Eigen::VectorXd u = llt.solve(s);
    Eigen::VectorXd a_dir = Eigen::VectorXd::Zero(K);
    for (int a = 0; a < na; ++a) a_dir += G.col(active[a]) * u(a);
    const Eigen::VectorXd corr = c0 - G * beta;

    // Smallest step (decrease in lambda) to the next breakpoint.
    double gamma = lam - opt.lambda;
    int event_index = -1;
    bool event_drop = false;
    auto consider = [&](double g, int j, bool drop) {
      if (!(g > eps)) return;
      if (g < gamma) {
        gamma = g;
        event_index = j;
        event_drop = drop;
      } else if (g == gamma && event_index >= 0) {
        flags |= kCodeTieBreak;
        if (j < event_index) {
          event_index = j;
          event_drop = drop;
        }
      }
    };
    for (int j = 0; j < K; ++j) {
      if (in_active[j]) continue;
      if (a_dir(j) < 1.0) consider((lam - corr(j)) / (1.0 - a_dir(j)), j, false);
      if (!opt.positive && a_dir(j) > -1.0) consider((lam + corr(j)) / (1.0 + a_dir(j)), j, false);
    }
    for (int a = 0; a < na; ++a) {
      const int j = active[a];
      if (u(a) != 0.0) {
        const double g = -beta(j) / u(a);
        if (g > 0.0) consider(g, j, true);
      }
    }

    for (int a = 0; a < na; ++a) beta(active[a]) += gamma * u(a);
    lam -= gamma;
    if (event_index < 0) break;

    if (event_drop) {
      const auto it = std::find(active.begin(), active.end(), event_index);
      const auto pos = it - active.begin();
      active.erase(it);
      sign.erase(sign.begin() + pos);
      in_active[event_index] = 0;
      beta(event_index) = 0.0;
      if (active.empty()) break;
    } else {
      const double cj = c0(event_index) - G.col(event_index).dot(beta);
      active.push_back(event_index);
      sign.push_back(opt.positive ? 1.0 : (cj > 0.0 ? 1.0 : -1.0));
      in_active[event_index] = 1;
    }
  }

  // Re-solve on the final support and signs to remove accumulated drift:
  // G_AA a_A = c_A - lambda s_A.
  const int na = static_cast<int>(active.size());
  if (na > 0) {
    Eigen::MatrixXd Gaa(na, na);
    Eigen::VectorXd rhs(na);
    for (int a = 0; a < na; ++a) {
      rhs(a) = c0(active[a]) - opt.lambda * sign[a];
      for (int b = 0; b < na; ++b) Gaa(a, b) = G(active[a], active[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Gaa);
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd refined = llt.solve(rhs);
      bool consistent = true;
      for (int a = 0; a < na; ++a) consistent = consistent && refined(a) * sign[a] >= 0.0;
      if (consistent)
        for (int a = 0; a < na; ++a) beta(active[a]) = refined(a);
    }
  }
  if (opt.positive) beta = beta.cwiseMax(0.0);
  return finish(beta);
}

SparseCodes lars_lasso_encode(const Dictionary& dict, const Eigen::MatrixXd& X,
                              const LarsOptions& opt) {
  if (X.rows() != dict.n()) throw Error("lars: signal dimension does not match dictionary");
  if (!(opt.lambda > 0.0)) throw Error("lars: lambda must be > 0");
  const Eigen::Index M = X.cols();
  SparseCodes codes;
  codes.solver = Solver::Lars;
  codes.sparsity_param = opt.lambda;
  codes.positive = opt.positive;
  codes.flags.assign(static_cast<std::size_t>(M), kCodeOk);
  codes.A.resize(dict.K(), M);

  const Eigen::MatrixXd& G = dict.gram();
  const Eigen::MatrixXd corr = dict.atoms().transpose() * X;
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < M; ++i) {
    std::uint8_t flags = kCodeOk;
    const Eigen::VectorXd a = lars_lasso_solve(G, corr.col(i), opt, &flags);
    codes.flags[static_cast<std::size_t>(i)] = flags;
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (a(j) != 0.0) triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), a(j));
  }
  codes.A.setFromTriplets(triplets.begin(), triplets.end());
  codes.A.makeCompressed();
  return codes;
}

double reconstruction_error(const Dictionary& dict, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& A) {
  if (X.rows() != dict.n() || A.rows() != dict.K() || A.cols() != X.cols())
    throw Error("reconstruction_error: dimension mismatch");
  return (X - dict.atoms() * A).norm();
}

double reconstruction_error(const Dictionary& dict, const Eigen::MatrixXd& X,
                            const SparseCodes& codes) {
  if (X.rows() != dict.n() || codes.K() != dict.K() || codes.M() != X.cols())
    throw Error("reconstruction_error: dimension mismatch");
  const Eigen::MatrixXd recon = dict.atoms() * codes.A;
  return (X - recon).norm();
}

double lasso_objective(const Dictionary& dict, const Eigen::MatrixXd& X, const Eigen::MatrixXd& A,
                       double lambda) {
  const double fit = (X - dict.atoms() * A).squaredNorm();
  return 0.5 * fit + lambda * A.cwiseAbs().sum();
}

}  // namespace sigsparse
