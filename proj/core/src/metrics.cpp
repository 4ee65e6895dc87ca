#include "sigsparse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include "json.hpp"
#include "sigsparse/error.hpp"

namespace sigsparse {

double far_at(std::span<const double> forgery, double t) {
  if (forgery.empty()) throw Error("far_at: no forgery scores");
  const auto accepted = std::count_if(forgery.begin(), forgery.end(), [t](double s) { return s >= t; });
  return 100.0 * static_cast<double>(accepted) / static_cast<double>(forgery.size());
}

double frr_at(std::span<const double> genuine, double t) {
  if (genuine.empty()) throw Error("frr_at: no genuine scores");
  const auto rejected = std::count_if(genuine.begin(), genuine.end(), [t](double s) { return s < t; });
  return 100.0 * static_cast<double>(rejected) / static_cast<double>(genuine.size());
}

std::vector<RatePoint> far_frr_curve(std::span<const double> genuine,
                                     std::span<const double> forgery) {
  if (genuine.empty() || forgery.empty()) throw Error("far_frr_curve: both classes need scores");
  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> f(forgery.begin(), forgery.end());
  std::sort(g.begin(), g.end());
  std::sort(f.begin(), f.end());
  for (double s : g)
    if (!std::isfinite(s)) throw Error("far_frr_curve: non-finite score");
  for (double s : f)
    if (!std::isfinite(s)) throw Error("far_frr_curve: non-finite score");

  std::vector<double> thresholds(g);
  thresholds.insert(thresholds.end(), f.begin(), f.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double eps = 1e-6 * (1.0 + std::max(std::abs(thresholds.front()), std::abs(thresholds.back())));
  thresholds.insert(thresholds.begin(), thresholds.front() - eps);
  thresholds.push_back(thresholds.back() + eps);

  // Sorted sweep: count of genuine below t and forgeries at or above t.
  std::vector<RatePoint> curve;
  curve.reserve(thresholds.size());
  std::size_t gi = 0;
  std::size_t fi = 0;
  const double ng = static_cast<double>(g.size());
  const double nf = static_cast<double>(f.size());
  for (double t : thresholds) {
    while (gi < g.size() && g[gi] < t) ++gi;
    while (fi < f.size() && f[fi] < t) ++fi;
    curve.push_back({t, 100.0 * static_cast<double>(f.size() - fi) / nf,
                     100.0 * static_cast<double>(gi) / ng});
  }
  return curve;
}

EerResult eer(const std::vector<RatePoint>& curve) {
  if (curve.empty()) throw Error("eer: empty curve");
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double d = curve[i].far - curve[i].frr;
    if (d == 0.0) return {curve[i].far, curve[i].threshold};
    if (d < 0.0) {
      if (i == 0) return {curve[0].far, curve[0].threshold};
      const RatePoint& a = curve[i - 1];
      const RatePoint& b = curve[i];
      const double da = a.far - a.frr;
      const double s = da / (da - d);
      return {a.far + s * (b.far - a.far), a.threshold + s * (b.threshold - a.threshold)};
    }
  }
  const RatePoint& last = curve.back();
  return {0.5 * (last.far + last.frr), last.threshold};
}

double p_far_r_at_eer_s(const ScoreSet& scores) {
  if (scores.random.empty()) throw Error("p_far_r_at_eer_s: no random-forgery scores");
  const EerResult e = eer(scores.genuine, scores.skilled);
  return far_at(scores.random, e.threshold);
}

WriterMetrics writer_metrics(const ScoreSet& scores, double hard) {
  WriterMetrics m;
  const EerResult es = eer(scores.genuine, scores.skilled);
  m.eer_s = es.rate;
  m.threshold_at_eer_s = es.threshold;
  m.eer_r = eer(scores.genuine, scores.random).rate;
  m.p_far_r_at_eer_s = far_at(scores.random, es.threshold);
  m.hard_threshold = hard;
  m.far_s_hard = far_at(scores.skilled, hard);
  m.frr_hard = frr_at(scores.genuine, hard);
  m.far_r_hard = far_at(scores.random, hard);
  return m;
}

namespace {

template <typename F>
void for_each_rate(WriterMetrics& m, F&& f) {
  f(m.eer_s);
  f(m.threshold_at_eer_s);
  f(m.eer_r);
  f(m.p_far_r_at_eer_s);
  f(m.hard_threshold);
  f(m.far_s_hard);
  f(m.frr_hard);
  f(m.far_r_hard);
}

WriterMetrics mean_of(const std::vector<WriterMetrics>& rows) {
  WriterMetrics acc;
  acc.writer = "mean";
  std::vector<double> sums(8, 0.0);
  for (auto row : rows) {
    int k = 0;
    for_each_rate(row, [&](double& v) { sums[static_cast<std::size_t>(k++)] += v; });
  }
  int k = 0;
  for_each_rate(acc, [&](double& v) {
    v = sums[static_cast<std::size_t>(k++)] / static_cast<double>(rows.size());
  });
  return acc;
}

}  // namespace

MetricsReport aggregate(std::vector<WriterMetrics> rows) {
  if (rows.empty()) throw Error("aggregate: no reports");
  MetricsReport rep;
  std::map<int, std::vector<WriterMetrics>> by_rep;
  std::map<std::string, int> writers;
  for (const auto& r : rows) {
    by_rep[r.repetition].push_back(r);
    writers[r.writer] = 1;
  }
  std::vector<WriterMetrics> rep_means;
  for (const auto& [rep_id, list] : by_rep) rep_means.push_back(mean_of(list));
  rep.mean = mean_of(rep_means);
  rep.mean.repetition = -1;
  rep.repetitions = static_cast<int>(by_rep.size());
  rep.writers = static_cast<int>(writers.size());
  rep.per_writer = std::move(rows);
  return rep;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "writer,repetition,eer_s,threshold_at_eer_s,eer_r,p_far_r_at_eer_s,hard_threshold,"
         "far_s_hard,frr_hard,far_r_hard\n";
  out << std::setprecision(10);
  auto row = [&](const WriterMetrics& m) {
    out << m.writer << ',' << m.repetition << ',' << m.eer_s << ',' << m.threshold_at_eer_s << ','
        << m.eer_r << ',' << m.p_far_r_at_eer_s << ',' << m.hard_threshold << ',' << m.far_s_hard
        << ',' << m.frr_hard << ',' << m.far_r_hard << '\n';
  };
  for (const auto& m : report.per_writer) row(m);
}

void write_metrics_json(const std::filesystem::path& path, const MetricsReport& report,
                        const std::string& extra_json) {
  nlohmann::json j;
  const auto& m = report.mean;
  j["writers"] = report.writers;
  j["repetitions"] = report.repetitions;
  j["mean"] = {{"eer_s", m.eer_s},
               {"eer_r", m.eer_r},
               {"p_far_r_at_eer_s", m.p_far_r_at_eer_s},
               {"threshold_at_eer_s", m.threshold_at_eer_s},
               {"hard_threshold", m.hard_threshold},
               {"far_s_hard", m.far_s_hard},
               {"frr_hard", m.frr_hard},
               {"far_r_hard", m.far_r_hard}};
  if (!extra_json.empty()) j["run"] = nlohmann::json::parse(extra_json);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace sigsparse
