#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigsparse/dictionary.hpp"
#include "sigsparse/svm.hpp"

namespace sigsparse {

/// Training set of one writer: genuine references (positive class) and
/// genuine samples of other writers (negative class).
struct LabeledFeatureSet {
  std::vector<Eigen::VectorXd> positives;
  std::vector<Eigen::VectorXd> negatives;
  std::vector<std::string> positive_ids;
  std::vector<std::string> negative_ids;
};

/// Per-dimension z-score with statistics of the training data. Constant
/// dimensions get unit scale.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& rows);
  static Standardizer identity(int dim);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& rows) const;
};

/// Standardisation followed by the RBF SVM.
struct Classifier {
  Standardizer scaler;
  RbfSvm svm;

  double score(const Eigen::VectorXd& descriptor) const;
  Eigen::VectorXd score(const Eigen::MatrixXd& rows) const;
};

struct TrainOptions {
  std::vector<double> C_grid;      // default 2^-3 .. 2^7
  std::vector<double> gamma_grid;  // default 2^-9 .. 2^3
  double holdout_fraction = 0.3;
  bool standardize = true;
  double smo_tol = 1e-3;
  std::uint64_t seed = 0;

  static std::vector<double> default_C_grid();
  static std::vector<double> default_gamma_grid();
};

struct GridCell {
  double C = 0.0;
  double gamma = 0.0;
  double auc = 0.0;
  /// Balanced holdout accuracy of the sign decision.
  double accuracy = 0.0;
};

struct TrainResult {
  Classifier classifier;          // refit on the full learning set
  std::vector<double> cvs_plus;   // holdout scores of positives at the best cell
  std::vector<GridCell> grid;     // C-major, gamma-minor order
  GridCell best;
  std::vector<int> holdout_positive;  // indices into positives
  std::vector<int> holdout_negative;  // indices into negatives
};

/// Stratified holdout grid search over (C, gamma) maximising holdout AUC.
/// AUC ties go to the higher balanced accuracy at decision value 0, then to
/// the first cell in grid order.
TrainResult train_svm(const LabeledFeatureSet& data, const TrainOptions& options = {});

/// Area under the ROC curve (Mann-Whitney, ties count one half).
double auc(std::span<const double> positive_scores, std::span<const double> negative_scores);

/// Half the mean of the stored positive validation scores.
double hard_threshold(std::span<const double> cvs_plus);

/// Everything needed to verify a claimed identity.
struct WriterModel {
  std::string writer_id;
  Dictionary dictionary;
  int motl = 0;
  Classifier classifier;
  std::vector<double> cvs_plus;
  double hard_threshold = 0.0;
  std::uint64_t seed = 0;
  /// Flat key/value snapshot of the pipeline configuration.
  std::map<std::string, std::string> config;

  double score(const Eigen::VectorXd& descriptor) const { return classifier.score(descriptor); }
};

// Binary model file, little-endian:
//   char[8] "SGSPWMDL", uint32 version (1),
//   uint64 json_length, char json[json_length]   (metadata: writer id, motl,
//          seed, C, gamma, bias, hard threshold, cvs_plus, config)
//   uint32 n, uint32 K, uint32 constraint, float64 atoms[n*K] (row-major)
//   uint32 dim, float64 mean[dim], float64 scale[dim]
//   uint32 n_sv, float64 dual_coef[n_sv], float64 sv[n_sv*dim] (row-major)
// A "<path>.json" copy of the metadata is written alongside.
void save_writer_model(const std::filesystem::path& path, const WriterModel& model);
WriterModel load_writer_model(const std::filesystem::path& path);

}  // namespace sigsparse
