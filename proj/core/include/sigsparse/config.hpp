#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "sigsparse/descriptor.hpp"
#include "sigsparse/dictionary.hpp"
#include "sigsparse/dictlearn.hpp"
#include "sigsparse/noise.hpp"

namespace sigsparse {

/// Pipeline and protocol settings. Serialised as a flat "key = value" text
/// file; '#' starts a comment. Solver "omp" learns with K-SVD and codes with
/// OMP; solver "lars" learns online and codes with LARS-Lasso, and only then
/// are priors other than "none" allowed.
struct ExperimentConfig {
  int n_g_ref = 5;
  int patch_size = 5;
  int K = 60;
  Solver solver = Solver::Omp;
  int rho = 3;
  double lambda = 0.15;
  Prior prior = Prior::None;
  int ksvd_iters = 50;
  int cascade_iters = 10;
  int online_iters = 100;
  int online_minibatch = 512;
  Pooling pooling = Pooling::F3;
  int beta = 2;
  SplitOrder split_order = SplitOrder::ColumnsThenRows;
  bool keypoints = true;
  int keypoint_max = 200;
  int keypoint_threshold = 20;
  int repetitions = 10;
  std::uint64_t seed = 1;
  NoiseSpec noise;
  /// "auto" applies the 3x3 median filter whenever noise is injected.
  std::string median = "auto";
  bool standardize = true;
  double holdout_fraction = 0.3;
  /// Random-forgery test samples per writer; 0 means one per other writer.
  int random_pool = 0;

  void validate() const;
  bool use_median() const;

  std::map<std::string, std::string> to_map() const;
  static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);
  /// Applies overrides on top of this config; unknown keys are rejected.
  ExperimentConfig with(const std::map<std::string, std::string>& overrides) const;

  /// Canonical text: keys sorted, one "key = value" per line.
  std::string serialize() const;
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// 64-bit FNV-1a of serialize(), as 16 hex digits.
  std::string hash() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

/// Parses "key = value" lines into a map.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace sigsparse
