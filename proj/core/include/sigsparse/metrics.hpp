#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sigsparse {

/// Test scores of one writer, split by provenance.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> skilled;
  std::vector<double> random;
};

/// Rates are percentages. A forgery is accepted when score >= threshold; a
/// genuine sample is rejected when score < threshold.
struct RatePoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

double far_at(std::span<const double> forgery, double threshold);
double frr_at(std::span<const double> genuine, double threshold);

/// Sweep over every observed score plus one sentinel below the minimum and
/// one above the maximum, in increasing threshold order.
std::vector<RatePoint> far_frr_curve(std::span<const double> genuine,
                                     std::span<const double> forgery);

struct EerResult {
  double rate = 0.0;
  double threshold = 0.0;
};

/// Crossing of the FAR and FRR step curves; linear interpolation between the
/// bracketing sweep points when no sweep point has FAR == FRR.
EerResult eer(const std::vector<RatePoint>& curve);
inline EerResult eer(std::span<const double> genuine, std::span<const double> forgery) {
  return eer(far_frr_curve(genuine, forgery));
}

/// FAR of random forgeries at the skilled-forgery EER threshold.
double p_far_r_at_eer_s(const ScoreSet& scores);

struct WriterMetrics {
  std::string writer;
  int repetition = 0;
  double eer_s = 0.0;
  double threshold_at_eer_s = 0.0;
  double eer_r = 0.0;
  double p_far_r_at_eer_s = 0.0;
  double hard_threshold = 0.0;
  double far_s_hard = 0.0;
  double frr_hard = 0.0;
  double far_r_hard = 0.0;
};

/// Per-writer metrics from user-specific (per-writer) thresholds plus the
/// rates at the given hard threshold.
WriterMetrics writer_metrics(const ScoreSet& scores, double hard_threshold);

struct MetricsReport {
  std::vector<WriterMetrics> per_writer;
  /// Mean over writers within each repetition, then over repetitions.
  WriterMetrics mean;
  int repetitions = 0;
  int writers = 0;
};

MetricsReport aggregate(std::vector<WriterMetrics> rows);

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report);
void write_metrics_json(const std::filesystem::path& path, const MetricsReport& report,
                        const std::string& extra_json = "");

}  // namespace sigsparse
