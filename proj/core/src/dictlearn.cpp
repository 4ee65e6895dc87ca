#include "sigsparse/dictlearn.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "sigsparse/error.hpp"
#include "sigsparse/sparse.hpp"

namespace sigsparse {

const char* to_string(Prior p) {
  switch (p) {
    case Prior::None: return "none";
    case Prior::APositive: return "a-positive";
    case Prior::DNonNegative: return "d-nonneg";
    case Prior::Nmf: return "nmf";
  }
  return "none";
}

Prior prior_from_string(const std::string& s) {
  if (s == "none") return Prior::None;
  if (s == "a-positive") return Prior::APositive;
  if (s == "d-nonneg") return Prior::DNonNegative;
  if (s == "nmf") return Prior::Nmf;
  throw Error("unknown prior: " + s);
}

Eigen::MatrixXd sample_initial_atoms(const Eigen::MatrixXd& X, int atoms, std::uint64_t seed) {
  if (X.cols() < atoms) throw Error("insufficient samples: need at least K patches");
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(X.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::MatrixXd D(X.rows(), atoms);
  int filled = 0;
  for (Eigen::Index idx : order) {
    if (filled == atoms) break;
    const double norm = X.col(idx).norm();
    if (norm == 0.0) continue;
    const Eigen::VectorXd cand = X.col(idx) / norm;
    bool duplicate = false;
    for (int j = 0; j < filled && !duplicate; ++j)
      duplicate = (D.col(j) - cand).squaredNorm() < 1e-20;
    if (duplicate) continue;
    D.col(filled++) = cand;
  }
  // Too few distinct nonzero samples: fill with random unit directions.
  std::normal_distribution<double> normal(0.0, 1.0);
  for (; filled < atoms; ++filled) {
    Eigen::VectorXd v(X.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    D.col(filled) = v.normalized();
  }
  return D;
}

namespace {

void project_column(Eigen::Ref<Eigen::VectorXd> d, AtomConstraint constraint) {
  if (constraint == AtomConstraint::NonNegativeUnitBall) d = d.cwiseMax(0.0);
  const double norm = d.norm();
  if (norm > 1.0) d /= norm;
}

Dictionary ksvd_core(const Eigen::MatrixXd& X, Eigen::MatrixXd D, AtomConstraint constraint,
                     const KsvdOptions& opt, KsvdReport* report) {
  const int K = static_cast<int>(D.cols());
  const Eigen::Index M = X.cols();
  if (M < K) throw Error("insufficient samples: K-SVD needs at least K patches");
  if (X.isZero(0.0)) throw Error("K-SVD: all-zero training data");
  if (opt.rho < 1 || opt.rho > K) throw Error("K-SVD: rho must be in [1, K]");

  KsvdReport local;
  KsvdReport& rep = report ? *report : local;
  rep = KsvdReport{};

  const OmpOptions omp{opt.rho, false, 1e-10, true};
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, M);
  Eigen::MatrixXd R = X;
  std::vector<char> replacement_used(static_cast<std::size_t>(M), 0);

  for (int it = 0; it < std::max(opt.max_iters, 1); ++it) {
    // Sparse coding; a column keeps its previous code if the fresh greedy
    // code is worse.
    const Dictionary dict(D, constraint);
    const Eigen::MatrixXd fresh = omp_encode(dict, X, omp).dense();
    const Eigen::MatrixXd fresh_residual = X - D * fresh;
    for (Eigen::Index i = 0; i < M; ++i) {
      if (it == 0 || fresh_residual.col(i).squaredNorm() <= R.col(i).squaredNorm()) {
        A.col(i) = fresh.col(i);
        R.col(i) = fresh_residual.col(i);
      }
    }
    if (it == 0) rep.initial_objective = R.squaredNorm();
    if (opt.max_iters == 0) break;

    std::fill(replacement_used.begin(), replacement_used.end(), 0);
    for (int k = 0; k < K; ++k) {
      std::vector<Eigen::Index> omega;
      for (Eigen::Index i = 0; i < M; ++i)
        if (A(k, i) != 0.0) omega.push_back(i);

      if (omega.empty()) {
        // Unused atom: swap in the worst-represented sample.
        Eigen::Index worst = -1;
        double worst_err = -1.0;
        for (Eigen::Index i = 0; i < M; ++i) {
          if (replacement_used[i] || X.col(i).squaredNorm() == 0.0) continue;
          const double e = R.col(i).squaredNorm();
          if (e > worst_err) {
            worst_err = e;
            worst = i;
          }
        }
        if (worst < 0) continue;
        replacement_used[worst] = 1;
        Eigen::VectorXd atom = X.col(worst).normalized();
        if (constraint == AtomConstraint::NonNegativeUnitBall) {
          atom = atom.cwiseMax(0.0);
          if (atom.norm() == 0.0) continue;
          atom.normalize();
        }
        D.col(k) = atom;
        ++rep.replaced_atoms;
        continue;
      }

      const Eigen::Index w = static_cast<Eigen::Index>(omega.size());
      Eigen::MatrixXd E(X.rows(), w);
      Eigen::VectorXd old_row(w);
      for (Eigen::Index c = 0; c < w; ++c) {
        old_row(c) = A(k, omega[c]);
        E.col(c) = R.col(omega[c]) + D.col(k) * old_row(c);
      }
      const double old_err = (E - D.col(k) * old_row.transpose()).squaredNorm();

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(E * E.transpose());
      Eigen::VectorXd u = eig.eigenvectors().col(E.rows() - 1);
      if (constraint == AtomConstraint::NonNegativeUnitBall) {
        if (u.sum() < 0.0) u = -u;
        u = u.cwiseMax(0.0);
        if (u.norm() == 0.0) continue;
        u.normalize();
      } else if (u.dot(D.col(k)) < 0.0) {
        u = -u;
      }
      const Eigen::VectorXd row = E.transpose() * u;
      const double new_err = (E - u * row.transpose()).squaredNorm();
      if (new_err > old_err) continue;

      D.col(k) = u;
      for (Eigen::Index c = 0; c < w; ++c) {
        A(k, omega[c]) = row(c);
        R.col(omega[c]) = E.col(c) - u * row(c);
      }
    }
    rep.objective.push_back(R.squaredNorm());
  }

  project_atoms(D, constraint);
  return Dictionary(std::move(D), constraint);
}

}  // namespace

Dictionary ksvd_fit(const Eigen::MatrixXd& X, const KsvdOptions& options, KsvdReport* report) {
  if (options.atoms <= X.rows()) throw Error("dictionary must be overcomplete (K > n)");
  if (X.cols() < options.atoms) throw Error("insufficient samples: K-SVD needs at least K patches");
  if (X.isZero(0.0)) throw Error("K-SVD: all-zero training data");
  return ksvd_core(X, sample_initial_atoms(X, options.atoms, options.seed),
                   AtomConstraint::UnitBall, options, report);
}

Dictionary ksvd_train(const Eigen::MatrixXd& X, const Dictionary& init, const KsvdOptions& options,
                      KsvdReport* report) {
  if (X.rows() != init.n()) throw Error("K-SVD: patch dimension does not match dictionary");
  return ksvd_core(X, init.atoms(), init.constraint(), options, report);
}

namespace {

struct OnlineState {
  Eigen::MatrixXd D;
  Eigen::MatrixXd Astat;
  Eigen::MatrixXd Bstat;
  std::vector<Eigen::Index> order;
  std::size_t cursor = 0;
  std::mt19937_64 rng;
};

Eigen::MatrixXd pool_stream(const std::vector<Eigen::MatrixXd>& stream) {
  Eigen::Index rows = -1;
  Eigen::Index total = 0;
  for (const auto& part : stream) {
    if (part.cols() == 0) continue;
    if (rows >= 0 && part.rows() != rows) throw Error("online_fit: inconsistent patch dimension");
    rows = part.rows();
    total += part.cols();
  }
  if (total == 0) throw Error("online_fit: empty stream");
  Eigen::MatrixXd pooled(rows, total);
  Eigen::Index at = 0;
  for (const auto& part : stream) {
    if (part.cols() == 0) continue;
    pooled.middleCols(at, part.cols()) = part;
    at += part.cols();
  }
  return pooled;
}

void online_step(OnlineState& st, const Eigen::MatrixXd& X, int t, const OnlineOptions& opt,
                 AtomConstraint constraint, bool positive_codes, std::vector<double>* objective) {
  const Eigen::Index total = X.cols();
  const Eigen::Index batch = std::min<Eigen::Index>(opt.minibatch, total);
  Eigen::MatrixXd Xb(X.rows(), batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    if (st.cursor == st.order.size()) {
      std::shuffle(st.order.begin(), st.order.end(), st.rng);
      st.cursor = 0;
    }
    Xb.col(b) = X.col(st.order[st.cursor++]);
  }

  const Eigen::MatrixXd G = st.D.transpose() * st.D;
  const Eigen::MatrixXd corr = st.D.transpose() * Xb;
  const LarsOptions lars{opt.lambda, positive_codes, 0};
  Eigen::MatrixXd Ab(st.D.cols(), batch);
  for (Eigen::Index b = 0; b < batch; ++b) Ab.col(b) = lars_lasso_solve(G, corr.col(b), lars);

  if (objective) {
    const double obj = 0.5 * (Xb - st.D * Ab).squaredNorm() + opt.lambda * Ab.cwiseAbs().sum();
    objective->push_back(obj / static_cast<double>(batch));
  }

  const double w = 1.0 / static_cast<double>(t);
  const double scale = w / static_cast<double>(batch);
  st.Astat = (1.0 - w) * st.Astat + scale * (Ab * Ab.transpose());
  st.Bstat = (1.0 - w) * st.Bstat + scale * (Xb * Ab.transpose());

  std::uniform_int_distribution<Eigen::Index> pick(0, batch - 1);
  for (Eigen::Index j = 0; j < st.D.cols(); ++j) {
    const double ajj = st.Astat(j, j);
    if (ajj < 1e-12) {
      // Atom never used so far: restart it on a random sample.
      Eigen::VectorXd atom = Xb.col(pick(st.rng));
      if (atom.norm() > 0.0) atom.normalize();
      project_column(atom, constraint);
      if (atom.norm() > 0.0) st.D.col(j) = atom;
      continue;
    }
    Eigen::VectorXd u = st.D.col(j) + (st.Bstat.col(j) - st.D * st.Astat.col(j)) / ajj;
    project_column(u, constraint);
    st.D.col(j) = u;
  }
}

OnlineState make_state(const Eigen::MatrixXd& X, const OnlineOptions& opt,
                       const Dictionary* init, AtomConstraint constraint) {
  OnlineState st;
  st.rng.seed(opt.seed);
  if (init) {
    if (init->n() != X.rows()) throw Error("online_fit: patch dimension does not match dictionary");
    st.D = init->atoms();
  } else {
    if (opt.atoms <= X.rows()) throw Error("dictionary must be overcomplete (K > n)");
    st.D = sample_initial_atoms(X, opt.atoms, opt.seed);
  }
  project_atoms(st.D, constraint);
  st.Astat = Eigen::MatrixXd::Zero(st.D.cols(), st.D.cols());
  st.Bstat = Eigen::MatrixXd::Zero(st.D.rows(), st.D.cols());
  st.order.resize(static_cast<std::size_t>(X.cols()));
  std::iota(st.order.begin(), st.order.end(), Eigen::Index{0});
  st.cursor = st.order.size();
  return st;
}

}  // namespace

int estimate_online_iterations(const std::vector<Eigen::MatrixXd>& stream,
                               const OnlineOptions& options) {
  const Eigen::MatrixXd X = pool_stream(stream);
  const bool nonneg = options.prior == Prior::DNonNegative || options.prior == Prior::Nmf;
  const AtomConstraint constraint =
      nonneg ? AtomConstraint::NonNegativeUnitBall : AtomConstraint::UnitBall;
  const bool positive = options.prior == Prior::APositive || options.prior == Prior::Nmf;
  OnlineState st = make_state(X, options, nullptr, constraint);
  constexpr int kCalibration = 3;
  const auto start = std::chrono::steady_clock::now();
  for (int t = 1; t <= kCalibration; ++t) online_step(st, X, t, options, constraint, positive, nullptr);
  const double per_iter =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
      kCalibration;
  if (per_iter <= 0.0) return 1000;
  return std::max(1, static_cast<int>(options.time_budget_s / per_iter));
}

Dictionary online_fit(const std::vector<Eigen::MatrixXd>& stream, const OnlineOptions& options,
                      const Dictionary* init, OnlineReport* report) {
  if (options.minibatch < 1) throw Error("online_fit: mini-batch size must be >= 1");
  if (!(options.lambda > 0.0)) throw Error("online_fit: lambda must be > 0");
  const Eigen::MatrixXd X = pool_stream(stream);
  if (options.prior == Prior::Nmf && X.minCoeff() < 0.0)
    throw Error("online_fit: NMF needs non-negative (uncentered) patches");

  const bool nonneg = options.prior == Prior::DNonNegative || options.prior == Prior::Nmf;
  const AtomConstraint constraint =
      nonneg ? AtomConstraint::NonNegativeUnitBall : AtomConstraint::UnitBall;
  const bool positive = options.prior == Prior::APositive || options.prior == Prior::Nmf;

  const int iterations =
      options.iterations ? *options.iterations : estimate_online_iterations(stream, options);
  if (iterations < 1) throw Error("online_fit: iteration count must be >= 1");

  OnlineReport local;
  OnlineReport& rep = report ? *report : local;
  rep = OnlineReport{};

  OnlineState st = make_state(X, options, init, constraint);
  for (int t = 1; t <= iterations; ++t)
    online_step(st, X, t, options, constraint, positive, &rep.objective);
  rep.iterations = iterations;

  project_atoms(st.D, constraint);
  return Dictionary(std::move(st.D), constraint);
}

}  // namespace sigsparse
