#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "oracles.hpp"
#include "sigsparse/error.hpp"
#include "sigsparse/verifier.hpp"

using namespace sigsparse;

namespace {

LabeledFeatureSet blobs(int npos, int nneg, double sep, int dim, std::mt19937_64& rng) {
  LabeledFeatureSet s;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < npos; ++i) {
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v(d) = g(rng) + sep;
    s.positives.push_back(v);
  }
  for (int i = 0; i < nneg; ++i) {
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v(d) = g(rng) - sep;
    s.negatives.push_back(v);
  }
  return s;
}

Eigen::MatrixXd rows(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(a.size() + b.size()), a.front().size());
  Eigen::Index r = 0;
  for (const auto& v : a) X.row(r++) = v.transpose();
  for (const auto& v : b) X.row(r++) = v.transpose();
  return X;
}

}  // namespace

TEST(Svm, SeparableToyDataIsFitExactly) {
  std::mt19937_64 rng(81);
  const auto s = blobs(20, 20, 3.0, 2, rng);
  const Eigen::MatrixXd X = rows(s.positives, s.negatives);
  Eigen::VectorXd y(40);
  y << Eigen::VectorXd::Ones(20), -Eigen::VectorXd::Ones(20);
  const auto svm = RbfSvm::train(X, y, SvmParams{10.0, 0.5});
  const Eigen::VectorXd f = svm.decision(X);
  for (int i = 0; i < 40; ++i) EXPECT_GT(f(i) * y(i), 0.0);
  std::vector<double> p(f.data(), f.data() + 20), n(f.data() + 20, f.data() + 40);
  EXPECT_EQ(auc(p, n), 1.0);
}

TEST(Svm, DualSatisfiesBoxAndKkt) {
  std::mt19937_64 rng(82);
  const auto s = blobs(25, 25, 0.7, 3, rng);
  const Eigen::MatrixXd X = rows(s.positives, s.negatives);
  Eigen::VectorXd y(50);
  y << Eigen::VectorXd::Ones(25), -Eigen::VectorXd::Ones(25);
  const double C = 2.0;
  const auto svm = RbfSvm::train(X, y, SvmParams{C, 0.3, 1e-4});
  const Eigen::VectorXd& a = svm.training_alpha();
  EXPECT_NEAR(a.dot(y), 0.0, 1e-9);
  const Eigen::VectorXd f = svm.decision(X);
  for (int i = 0; i < 50; ++i) {
    EXPECT_GE(a(i), -1e-12);
    EXPECT_LE(a(i), C + 1e-12);
    const double m = y(i) * f(i);
    if (a(i) < 1e-8) EXPECT_GE(m, 1.0 - 1e-3);
    else if (a(i) > C - 1e-8) EXPECT_LE(m, 1.0 + 1e-3);
    else EXPECT_NEAR(m, 1.0, 1e-3);
  }
}

TEST(Svm, SingleSupportVectorByHand) {
  Eigen::MatrixXd sv(1, 2);
  sv << 1.0, 2.0;
  Eigen::VectorXd coef(1);
  coef << 0.5;
  const auto svm = RbfSvm::from_parts(sv, coef, -0.1, 0.25, 1.0);
  Eigen::VectorXd x(2);
  x << 0.0, 0.0;
  EXPECT_NEAR(svm.decision(x), 0.5 * std::exp(-0.25 * 5.0) - 0.1, 1e-15);
}

TEST(Svm, SupportVectorOrderDoesNotMatter) {
  std::mt19937_64 rng(83);
  Eigen::MatrixXd sv(5, 3);
  for (int i = 0; i < 5; ++i) sv.row(i) = oracle::random_vector(3, rng).transpose();
  Eigen::VectorXd coef = oracle::random_vector(5, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> P(5);
  P.indices() << 3, 0, 4, 1, 2;
  const auto a = RbfSvm::from_parts(sv, coef, 0.2, 0.7, 1.0);
  const auto b = RbfSvm::from_parts(P * sv, P * coef, 0.2, 0.7, 1.0);
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::random_vector(3, rng);
    EXPECT_NEAR(a.decision(x), b.decision(x), 1e-12);
  }
}

TEST(Svm, BatchEqualsSingleCalls) {
  std::mt19937_64 rng(84);
  const auto s = blobs(10, 10, 1.0, 4, rng);
  Eigen::VectorXd y(20);
  y << Eigen::VectorXd::Ones(10), -Eigen::VectorXd::Ones(10);
  const auto svm = RbfSvm::train(rows(s.positives, s.negatives), y, SvmParams{1.0, 0.2});
  Eigen::MatrixXd Q(100, 4);
  for (int i = 0; i < 100; ++i) Q.row(i) = oracle::random_vector(4, rng).transpose();
  const Eigen::VectorXd batch = svm.decision(Q);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(batch(i), svm.decision(Eigen::VectorXd(Q.row(i).transpose())));
}

TEST(Svm, LengthMismatchThrows) {
  Eigen::MatrixXd sv = Eigen::MatrixXd::Ones(1, 3);
  const auto svm = RbfSvm::from_parts(sv, Eigen::VectorXd::Ones(1), 0.0, 1.0, 1.0);
  EXPECT_THROW(svm.decision(Eigen::VectorXd(Eigen::VectorXd::Ones(2))), Error);
}

TEST(Auc, MatchesPairwiseOracle) {
  std::mt19937_64 rng(85);
  std::uniform_int_distribution<int> u(0, 5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p, n;
    for (int i = 0; i < 1 + t % 17; ++i) p.push_back(u(rng));
    for (int i = 0; i < 1 + t % 13; ++i) n.push_back(u(rng));
    EXPECT_NEAR(auc(p, n), oracle::auc(p, n), 1e-12);
  }
}

TEST(HardThreshold, Examples) {
  EXPECT_DOUBLE_EQ(hard_threshold(std::vector<double>{2, 4}), 1.5);
  EXPECT_DOUBLE_EQ(hard_threshold(std::vector<double>{0}), 0.0);
  EXPECT_DOUBLE_EQ(hard_threshold(std::vector<double>{1, 2, 3, 4, 5}), 1.5);
  EXPECT_THROW(hard_threshold(std::vector<double>{}), Error);
}

TEST(TrainSvm, SeparableGivesPerfectHoldout) {
  std::mt19937_64 rng(86);
  const auto s = blobs(10, 20, 2.5, 5, rng);
  const auto r = train_svm(s);
  EXPECT_EQ(r.best.auc, 1.0);
  EXPECT_EQ(r.grid.size(), 11u * 13u);
  EXPECT_EQ(r.holdout_positive.size(), 3u);
  EXPECT_EQ(r.holdout_negative.size(), 6u);
  EXPECT_EQ(r.cvs_plus.size(), 3u);
}

TEST(TrainSvm, DuplicatedPointsAreAtChance) {
  std::mt19937_64 rng(87);
  LabeledFeatureSet s;
  for (int i = 0; i < 20; ++i) {
    const auto v = oracle::random_vector(3, rng);
    s.positives.push_back(v);
    s.negatives.push_back(v);
  }
  TrainOptions o;
  o.C_grid = {1.0};
  o.gamma_grid = {0.5};
  const auto r = train_svm(s, o);
  std::vector<double> ps, ns;
  for (const auto& v : s.positives) ps.push_back(r.classifier.score(v));
  for (const auto& v : s.negatives) ns.push_back(r.classifier.score(v));
  EXPECT_EQ(auc(ps, ns), 0.5);
}

TEST(TrainSvm, SelectionMatchesExhaustiveGrid) {
  std::mt19937_64 rng(88);
  const auto s = blobs(12, 16, 0.4, 4, rng);
  TrainOptions o;
  o.C_grid = {0.5, 2.0, 8.0};
  o.gamma_grid = {0.05, 0.5, 2.0};
  o.seed = 9;
  const auto r = train_svm(s, o);

  // Re-train every cell on the same split and recompute its AUC.
  std::mt19937_64 split_rng(o.seed);
  std::vector<int> pi(s.positives.size()), ni(s.negatives.size());
  std::iota(pi.begin(), pi.end(), 0);
  std::iota(ni.begin(), ni.end(), 0);
  std::shuffle(pi.begin(), pi.end(), split_rng);
  std::shuffle(ni.begin(), ni.end(), split_rng);
  const std::vector<int> expect_hp(pi.begin(), pi.begin() + 4), expect_hn(ni.begin(), ni.begin() + 5);
  EXPECT_EQ(r.holdout_positive, expect_hp);
  EXPECT_EQ(r.holdout_negative, expect_hn);
  std::vector<Eigen::VectorXd> tp, tn, hp, hn;
  for (std::size_t k = 0; k < pi.size(); ++k) (k < 4 ? hp : tp).push_back(s.positives[pi[k]]);
  for (std::size_t k = 0; k < ni.size(); ++k) (k < 5 ? hn : tn).push_back(s.negatives[ni[k]]);
  const Eigen::MatrixXd Xtr = rows(tp, tn);
  Eigen::VectorXd ytr(Xtr.rows());
  ytr << Eigen::VectorXd::Ones(static_cast<Eigen::Index>(tp.size())), -Eigen::VectorXd::Ones(static_cast<Eigen::Index>(tn.size()));
  const auto scaler = Standardizer::fit(Xtr);
  double best_auc = -1, best_acc = -1, bc = 0, bg = 0;
  std::size_t cell = 0;
  for (double C : o.C_grid)
    for (double g : o.gamma_grid) {
      const auto svm = RbfSvm::train(scaler.apply_rows(Xtr), ytr, SvmParams{C, g});
      std::vector<double> ps, ns;
      for (const auto& v : hp) ps.push_back(svm.decision(scaler.apply(v)));
      for (const auto& v : hn) ns.push_back(svm.decision(scaler.apply(v)));
      const double a = oracle::auc(ps, ns);
      double acc = 0;
      for (double v : ps) acc += (v >= 0) / (2.0 * ps.size());
      for (double v : ns) acc += (v < 0) / (2.0 * ns.size());
      EXPECT_NEAR(r.grid[cell].auc, a, 1e-12);
      ++cell;
      if (a > best_auc || (a == best_auc && acc > best_acc)) {
        best_auc = a;
        best_acc = acc;
        bc = C;
        bg = g;
      }
    }
  EXPECT_EQ(r.best.C, bc);
  EXPECT_EQ(r.best.gamma, bg);
}

TEST(TrainSvm, ReproducibleAndValidated) {
  std::mt19937_64 rng(89);
  const auto s = blobs(6, 12, 1.0, 3, rng);
  TrainOptions o;
  o.seed = 4;
  const auto a = train_svm(s, o);
  const auto b = train_svm(s, o);
  EXPECT_EQ(a.cvs_plus, b.cvs_plus);
  EXPECT_EQ(a.best.C, b.best.C);
  LabeledFeatureSet tiny = s;
  tiny.positives.resize(1);
  EXPECT_THROW(train_svm(tiny), Error);
  LabeledFeatureSet ragged = s;
  ragged.negatives[0] = Eigen::VectorXd::Ones(4);
  EXPECT_THROW(train_svm(ragged), Error);
}

TEST(Standardizer, ZeroMeanUnitScale) {
  std::mt19937_64 rng(90);
  Eigen::MatrixXd X(30, 4);
  for (int i = 0; i < 30; ++i) X.row(i) = (3.0 * oracle::random_vector(4, rng)).transpose();
  X.col(2).setConstant(5.0);
  const auto s = Standardizer::fit(X);
  const Eigen::MatrixXd Z = s.apply_rows(X);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(Z.col(j).mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(Z.col(0).squaredNorm() / 29.0), 1.0, 1e-12);
  EXPECT_EQ(s.scale(2), 1.0);
}

TEST(WriterModel, BinaryRoundTrip) {
  std::mt19937_64 rng(91);
  const auto s = blobs(6, 12, 1.5, 10, rng);
  const auto r = train_svm(s);
  WriterModel m{"w007", Dictionary(oracle::random_dictionary(4, 10, rng)), 2, r.classifier, r.cvs_plus,
                hard_threshold(r.cvs_plus), 42, {{"K", "10"}}};
  std::filesystem::create_directories(SIGSPARSE_TEST_TMP);
  const auto path = std::filesystem::path(SIGSPARSE_TEST_TMP) / "model.bin";
  save_writer_model(path, m);
  EXPECT_TRUE(std::filesystem::exists(path.string() + ".json"));
  const auto back = load_writer_model(path);
  EXPECT_EQ(back.writer_id, "w007");
  EXPECT_EQ(back.motl, 2);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.dictionary, m.dictionary);
  EXPECT_EQ(back.cvs_plus, m.cvs_plus);
  EXPECT_EQ(back.config, m.config);
  EXPECT_DOUBLE_EQ(back.hard_threshold, m.hard_threshold);
  for (const auto& v : s.negatives) EXPECT_EQ(back.score(v), m.score(v));
}
