#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sigsparse/config.hpp"
#include "sigsparse/descriptor.hpp"
#include "sigsparse/dictionary.hpp"
#include "sigsparse/imageproc.hpp"
#include "sigsparse/keypoints.hpp"
#include "sigsparse/metrics.hpp"
#include "sigsparse/patches.hpp"
#include "sigsparse/synth.hpp"
#include "sigsparse/verifier.hpp"

namespace sigsparse {

/// Scale applied to gray values before learning and coding.
inline constexpr double kPatchScale = 1.0 / 255.0;

/// Gray image after polarity normalisation, optional noise and median filter,
/// with its Otsu binarisation.
struct PreparedImage {
  GrayImage gray;
  OtsuResult otsu;
};

PreparedImage preprocess(const GrayImage& img, const ExperimentConfig& cfg,
                         std::uint64_t noise_seed = 0);

/// Patches at every skeleton pixel, scaled by kPatchScale; centred unless the
/// NMF prior is active.
PatchMatrix signature_patches(const PreparedImage& img, const BinaryImage& skeleton,
                              const ExperimentConfig& cfg);

/// Cascade learning over the references in order: K-SVD on the first, then
/// cascade_iters K-SVD iterations per further reference (solver omp), or
/// online learning over the pooled stream (solver lars).
Dictionary learn_dictionary(const std::vector<PatchMatrix>& references, const ExperimentConfig& cfg,
                            std::uint64_t seed);

SparseCodes encode_patches(const Dictionary& dict, const PatchMatrix& patches,
                           const ExperimentConfig& cfg);

struct SignatureFeatures {
  SkeletonImage skeleton;
  PatchMatrix patches;
  SparseCodes codes;
  KeypointSet keypoints;
  SegmentMap segments;
  SignatureDescriptor descriptor;
};

/// Full per-signature chain: thin to `level`, patches, coding, keypoints,
/// equimass segmentation and pooling.
SignatureFeatures compute_features(const PreparedImage& img, const Dictionary& dict, int level,
                                   const ExperimentConfig& cfg);

/// Median of the per-reference optimal thinning levels.
int references_motl(std::span<const PreparedImage> references, const ExperimentConfig& cfg);

/// Enrols a writer: MOTL, dictionary, descriptors, SVM and thresholds.
WriterModel enroll(const std::string& writer_id, std::span<const PreparedImage> references,
                   std::span<const PreparedImage> negatives, const ExperimentConfig& cfg,
                   std::uint64_t seed);

double verify(const WriterModel& model, const PreparedImage& img, const ExperimentConfig& cfg);

struct SkippedWriter {
  std::string writer;
  std::string reason;
};

struct ScoreRow {
  int repetition = 0;
  std::string writer;
  /// "genuine", "skilled" or "random".
  std::string kind;
  /// Source writer and sample index, e.g. "w003/g_05".
  std::string sample;
  double score = 0.0;
};

struct WriterRun {
  int repetition = 0;
  std::string writer;
  int motl = 0;
  double C = 0.0;
  double gamma = 0.0;
  double hard_threshold = 0.0;
  std::vector<int> references;
  int negatives = 0;
  int random_pool = 0;
};

struct ExperimentResult {
  MetricsReport report;
  std::vector<SkippedWriter> skipped;
  std::vector<ScoreRow> scores;
  std::vector<WriterRun> runs;
  /// Length of every descriptor built during the run, in build order.
  std::vector<int> descriptor_lengths;
};

using LogFn = std::function<void(const std::string&)>;

/// Writer-dependent protocol: per repetition and writer, random references,
/// MOTL, cascade dictionary, 2 x n_g_ref negatives from other writers'
/// genuines, SVM, then scores for the remaining genuines, all skilled
/// forgeries and a random-forgery pool of one unused genuine per other writer.
/// Writers that cannot be evaluated are skipped with a reason.
ExperimentResult run_experiment(const Dataset& data, const ExperimentConfig& cfg,
                                const LogFn& log = {});
ExperimentResult run_experiment(const DatasetLayout& layout, const ExperimentConfig& cfg,
                                const LogFn& log = {});

/// "run-<config hash>-seed<seed>".
std::string run_directory_name(const ExperimentConfig& cfg);

/// Writes config.txt, metrics.csv, summary.json, scores.csv, runs.csv and
/// skipped.csv under out_root/run_directory_name(cfg); returns that path.
std::filesystem::path write_run(const std::filesystem::path& out_root, const ExperimentConfig& cfg,
                                const ExperimentResult& result);

}  // namespace sigsparse
