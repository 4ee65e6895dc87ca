#include "sigsparse/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sigsparse/dictlearn.hpp"
#include "sigsparse/error.hpp"
#include "sigsparse/noise.hpp"
#include "sigsparse/rng.hpp"
#include "sigsparse/sparse.hpp"

namespace fs = std::filesystem;

namespace sigsparse {

PreparedImage preprocess(const GrayImage& img, const ExperimentConfig& cfg,
                         std::uint64_t noise_seed) {
  if (img.empty()) throw Error("preprocess: empty image");
  GrayImage g = normalize_polarity(img);
  if (cfg.noise.kind != NoiseSpec::Kind::None) g = add_noise(g, cfg.noise, noise_seed);
  if (cfg.use_median()) g = median_filter(g, 3);
  PreparedImage out{std::move(g), {}};
  out.otsu = otsu_threshold(out.gray);
  return out;
}

PatchMatrix signature_patches(const PreparedImage& img, const BinaryImage& skeleton,
                              const ExperimentConfig& cfg) {
  PatchOptions po;
  po.patch_size = cfg.patch_size;
  po.center = cfg.prior != Prior::Nmf;
  po.background = img.otsu.background_mean;
  PatchMatrix p = extract_patches(img.gray, skeleton, po);
  p.data *= kPatchScale;
  return p;
}

Dictionary learn_dictionary(const std::vector<PatchMatrix>& refs, const ExperimentConfig& cfg,
                            std::uint64_t seed) {
  if (refs.empty()) throw Error("learn_dictionary: no references");
  if (cfg.solver == Solver::Omp) {
    Dictionary dict = ksvd_fit(refs.front().data, KsvdOptions{cfg.K, cfg.rho, cfg.ksvd_iters, seed});
    for (std::size_t i = 1; i < refs.size(); ++i) {
      if (cfg.cascade_iters == 0 || refs[i].M() < cfg.K) continue;
      dict = ksvd_update(dict, refs[i].data, cfg.rho, cfg.cascade_iters, derive_seed(seed, {i}));
    }
    return dict;
  }
  std::vector<Eigen::MatrixXd> stream;
  for (const auto& r : refs)
    if (!r.empty()) stream.push_back(r.data);
  OnlineOptions oo;
  oo.atoms = cfg.K;
  oo.lambda = cfg.lambda;
  oo.minibatch = cfg.online_minibatch;
  oo.iterations = cfg.online_iters;
  oo.prior = cfg.prior;
  oo.seed = seed;
  return online_fit(stream, oo);
}

SparseCodes encode_patches(const Dictionary& dict, const PatchMatrix& patches,
                           const ExperimentConfig& cfg) {
  if (cfg.solver == Solver::Omp) {
    OmpOptions o;
    o.rho = cfg.rho;
    return omp_encode(dict, patches, o);
  }
  LarsOptions o;
  o.lambda = cfg.lambda;
  o.positive = cfg.prior == Prior::APositive || cfg.prior == Prior::Nmf;
  return lars_lasso_encode(dict, patches, o);
}

namespace {

struct LevelCache {
  SkeletonImage skeleton;
  PatchMatrix patches;
  KeypointSet keypoints;
  bool has_keypoints = false;
  SegmentMap segments;
};

LevelCache prepare_level(const PreparedImage& img, int level, const ExperimentConfig& cfg,
                         const std::vector<Keypoint>* detected) {
  LevelCache lc;
  lc.skeleton = thin_to_level(img.otsu.binary, level);
  if (lc.skeleton.image.ink_count() == 0) throw Error("signature has no ink after binarisation");
  lc.patches = signature_patches(img, lc.skeleton.image, cfg);
  lc.segments = equimass_segment(lc.skeleton.image, cfg.beta, cfg.split_order);
  if (cfg.keypoints && detected) {
    lc.keypoints = assign_to_skeleton(*detected, lc.skeleton.image);
    lc.has_keypoints = true;
  }
  return lc;
}

KeypointOptions keypoint_options(const ExperimentConfig& cfg) {
  KeypointOptions ko;
  ko.max_points = cfg.keypoint_max;
  ko.threshold = cfg.keypoint_threshold;
  return ko;
}

SignatureDescriptor describe(const LevelCache& lc, const Dictionary& dict, const ExperimentConfig& cfg,
                             SparseCodes* codes_out = nullptr) {
  SparseCodes codes = encode_patches(dict, lc.patches, cfg);
  SignatureDescriptor d = build_descriptor(codes, lc.patches.locations, lc.segments,
                                           lc.has_keypoints ? &lc.keypoints : nullptr, cfg.pooling);
  if (codes_out) *codes_out = std::move(codes);
  return d;
}

int image_otl(const PreparedImage& img, const ExperimentConfig& cfg) {
  if (img.otsu.binary.ink_count() == 0) throw Error("signature has no ink after binarisation");
  return optimal_thinning_level(img.otsu.binary, cfg.patch_size).otl;
}

TrainOptions train_options(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainOptions to;
  to.holdout_fraction = cfg.holdout_fraction;
  to.standardize = cfg.standardize;
  to.seed = seed;
  return to;
}

}  // namespace

SignatureFeatures compute_features(const PreparedImage& img, const Dictionary& dict, int level,
                                   const ExperimentConfig& cfg) {
  std::vector<Keypoint> detected;
  if (cfg.keypoints) detected = detect_keypoints(img.gray, keypoint_options(cfg));
  LevelCache lc = prepare_level(img, level, cfg, &detected);
  SignatureFeatures f;
  f.descriptor = describe(lc, dict, cfg, &f.codes);
  f.skeleton = std::move(lc.skeleton);
  f.patches = std::move(lc.patches);
  f.keypoints = std::move(lc.keypoints);
  f.segments = std::move(lc.segments);
  return f;
}

int references_motl(std::span<const PreparedImage> refs, const ExperimentConfig& cfg) {
  if (refs.empty()) throw Error("references_motl: no references");
  std::vector<int> levels;
  for (const auto& r : refs) levels.push_back(image_otl(r, cfg));
  return lower_median(levels);
}

WriterModel enroll(const std::string& writer_id, std::span<const PreparedImage> refs,
                   std::span<const PreparedImage> negatives, const ExperimentConfig& cfg,
                   std::uint64_t seed) {
  const int motl_level = references_motl(refs, cfg);
  std::vector<LevelCache> ref_levels;
  std::vector<PatchMatrix> ref_patches;
  for (const auto& r : refs) {
    std::vector<Keypoint> kp;
    if (cfg.keypoints) kp = detect_keypoints(r.gray, keypoint_options(cfg));
    ref_levels.push_back(prepare_level(r, motl_level, cfg, &kp));
    ref_patches.push_back(ref_levels.back().patches);
  }
  Dictionary dict = learn_dictionary(ref_patches, cfg, derive_seed(seed, {1}));
  LabeledFeatureSet set;
  for (std::size_t i = 0; i < ref_levels.size(); ++i) {
    set.positives.push_back(describe(ref_levels[i], dict, cfg).values);
    set.positive_ids.push_back("ref" + std::to_string(i));
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    std::vector<Keypoint> kp;
    if (cfg.keypoints) kp = detect_keypoints(negatives[i].gray, keypoint_options(cfg));
    set.negatives.push_back(describe(prepare_level(negatives[i], motl_level, cfg, &kp), dict, cfg).values);
    set.negative_ids.push_back("neg" + std::to_string(i));
  }
  TrainResult tr = train_svm(set, train_options(cfg, derive_seed(seed, {2})));
  WriterModel m{writer_id, std::move(dict), motl_level, std::move(tr.classifier), tr.cvs_plus,
                hard_threshold(tr.cvs_plus), seed, cfg.to_map()};
  return m;
}

double verify(const WriterModel& model, const PreparedImage& img, const ExperimentConfig& cfg) {
  return model.score(compute_features(img, model.dictionary, model.motl, cfg).descriptor.values);
}

namespace {

struct ImageEntry {
  PreparedImage prepared;
  std::optional<int> otl;
  std::vector<Keypoint> keypoints;
  std::map<int, LevelCache> levels;
  std::string error;
};

class ImageCache {
 public:
  ImageCache(const Dataset& data, const ExperimentConfig& cfg) : data_(data), cfg_(cfg) {}

  ImageEntry& get(int writer, bool genuine, int idx) {
    const auto key = std::make_tuple(writer, genuine, idx);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
    const auto& w = data_.writers[static_cast<std::size_t>(writer)];
    const GrayImage& src = genuine ? w.genuine[static_cast<std::size_t>(idx)] : w.skilled[static_cast<std::size_t>(idx)];
    ImageEntry e;
    const std::uint64_t nseed = derive_seed(cfg_.seed, {0x6e6f697365ull, static_cast<std::uint64_t>(writer),
                                                        genuine ? 0ull : 1ull, static_cast<std::uint64_t>(idx)});
    e.prepared = preprocess(src, cfg_, nseed);
    if (cfg_.keypoints) e.keypoints = detect_keypoints(e.prepared.gray, keypoint_options(cfg_));
    return entries_.emplace(key, std::move(e)).first->second;
  }

  int otl(int writer, int idx) {
    ImageEntry& e = get(writer, true, idx);
    if (!e.otl) e.otl = image_otl(e.prepared, cfg_);
    return *e.otl;
  }

  const LevelCache& level(int writer, bool genuine, int idx, int lvl) {
    ImageEntry& e = get(writer, genuine, idx);
    auto it = e.levels.find(lvl);
    if (it == e.levels.end())
      it = e.levels.emplace(lvl, prepare_level(e.prepared, lvl, cfg_, &e.keypoints)).first;
    return it->second;
  }

 private:
  const Dataset& data_;
  const ExperimentConfig& cfg_;
  std::map<std::tuple<int, bool, int>, ImageEntry> entries_;
};

std::string sample_name(const std::string& writer, bool genuine, int idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "/%s_%02d", genuine ? "g" : "f", idx);
  return writer + buf;
}

struct Pick {
  int writer;
  int idx;
};

}  // namespace

ExperimentResult run_experiment(const Dataset& data, const ExperimentConfig& cfg, const LogFn& log) {
  cfg.validate();
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  const int W = static_cast<int>(data.writers.size());
  if (W == 0) throw Error("run_experiment: empty dataset");

  ExperimentResult result;
  std::vector<std::string> skip_reason(static_cast<std::size_t>(W));
  for (int w = 0; w < W; ++w) {
    const auto& wi = data.writers[static_cast<std::size_t>(w)];
    auto& reason = skip_reason[static_cast<std::size_t>(w)];
    if (static_cast<int>(wi.genuine.size()) < cfg.n_g_ref + 1)
      reason = "needs at least n_g_ref + 1 = " + std::to_string(cfg.n_g_ref + 1) + " genuine samples, has " +
               std::to_string(wi.genuine.size());
    else if (wi.skilled.empty())
      reason = "no skilled forgeries";
  }
  std::vector<int> donors;
  for (int w = 0; w < W; ++w)
    if (!data.writers[static_cast<std::size_t>(w)].genuine.empty()) donors.push_back(w);

  ImageCache cache(data, cfg);
  std::vector<WriterMetrics> rows;

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    for (int w = 0; w < W; ++w) {
      if (!skip_reason[static_cast<std::size_t>(w)].empty()) continue;
      const auto& wi = data.writers[static_cast<std::size_t>(w)];
      const auto urep = static_cast<std::uint64_t>(rep);
      const auto uw = static_cast<std::uint64_t>(w);
      std::mt19937_64 rng(derive_seed(cfg.seed, {urep, uw, 1}));
      try {
        std::vector<int> order(wi.genuine.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<int> refs(order.begin(), order.begin() + cfg.n_g_ref);
        std::vector<int> test_genuine(order.begin() + cfg.n_g_ref, order.end());
        std::sort(test_genuine.begin(), test_genuine.end());

        std::vector<int> levels;
        for (int r : refs) levels.push_back(cache.otl(w, r));
        const int motl_level = lower_median(levels);

        std::vector<PatchMatrix> ref_patches;
        for (int r : refs) ref_patches.push_back(cache.level(w, true, r, motl_level).patches);
        const Dictionary dict = learn_dictionary(ref_patches, cfg, derive_seed(cfg.seed, {urep, uw, 2}));

        auto descriptor = [&](int writer, bool genuine, int idx) {
          SignatureDescriptor d = describe(cache.level(writer, genuine, idx, motl_level), dict, cfg);
          result.descriptor_lengths.push_back(static_cast<int>(d.values.size()));
          return d.values;
        };

        // Negatives: 2 x n_g_ref genuines of other writers, one writer at a
        // time in shuffled order, cycling when there are fewer writers.
        std::vector<int> others;
        for (int d : donors)
          if (d != w) others.push_back(d);
        if (others.empty()) throw Error("no other writers to draw negatives from");
        std::shuffle(others.begin(), others.end(), rng);
        std::map<int, std::vector<int>> unused;
        for (int o : others) {
          auto& u = unused[o];
          u.resize(data.writers[static_cast<std::size_t>(o)].genuine.size());
          std::iota(u.begin(), u.end(), 0);
          std::shuffle(u.begin(), u.end(), rng);
        }
        const int n_neg = 2 * cfg.n_g_ref;
        std::vector<Pick> negatives;
        for (std::size_t k = 0, stalled = 0; static_cast<int>(negatives.size()) < n_neg; ++k) {
          const int o = others[k % others.size()];
          auto& u = unused[o];
          if (u.empty()) {
            if (++stalled > others.size()) throw Error("not enough other-writer genuines for negatives");
            continue;
          }
          stalled = 0;
          negatives.push_back({o, u.back()});
          u.pop_back();
        }
        std::vector<Pick> random_pool;
        for (int o : others) {
          if (cfg.random_pool > 0 && static_cast<int>(random_pool.size()) >= cfg.random_pool) break;
          auto& u = unused[o];
          if (u.empty()) continue;
          random_pool.push_back({o, u.back()});
          u.pop_back();
        }
        if (random_pool.empty()) throw Error("no unused other-writer genuines for the random-forgery pool");

        LabeledFeatureSet set;
        for (int r : refs) {
          set.positives.push_back(descriptor(w, true, r));
          set.positive_ids.push_back(sample_name(wi.id, true, r));
        }
        for (const Pick& p : negatives) {
          set.negatives.push_back(descriptor(p.writer, true, p.idx));
          set.negative_ids.push_back(sample_name(data.writers[static_cast<std::size_t>(p.writer)].id, true, p.idx));
        }
        const TrainResult tr = train_svm(set, train_options(cfg, derive_seed(cfg.seed, {urep, uw, 3})));
        const double hard = hard_threshold(tr.cvs_plus);

        ScoreSet scores;
        auto record = [&](const std::string& kind, const std::string& name, double s) {
          result.scores.push_back({rep, wi.id, kind, name, s});
        };
        for (int g : test_genuine) {
          const double s = tr.classifier.score(descriptor(w, true, g));
          scores.genuine.push_back(s);
          record("genuine", sample_name(wi.id, true, g), s);
        }
        for (int f = 0; f < static_cast<int>(wi.skilled.size()); ++f) {
          const double s = tr.classifier.score(descriptor(w, false, f));
          scores.skilled.push_back(s);
          record("skilled", sample_name(wi.id, false, f), s);
        }
        for (const Pick& p : random_pool) {
          const double s = tr.classifier.score(descriptor(p.writer, true, p.idx));
          scores.random.push_back(s);
          record("random", sample_name(data.writers[static_cast<std::size_t>(p.writer)].id, true, p.idx), s);
        }
        WriterMetrics m = writer_metrics(scores, hard);
        m.writer = wi.id;
        m.repetition = rep;
        rows.push_back(m);
        result.runs.push_back({rep, wi.id, motl_level, tr.best.C, tr.best.gamma, hard, refs,
                               static_cast<int>(negatives.size()), static_cast<int>(random_pool.size())});
        std::ostringstream msg;
        msg << "rep " << rep << " " << wi.id << ": motl=" << motl_level << " EER_S=" << m.eer_s
            << "% EER_R=" << m.eer_r << "%";
        say(msg.str());
      } catch (const Error& e) {
        skip_reason[static_cast<std::size_t>(w)] = "repetition " + std::to_string(rep) + ": " + e.what();
        say("skip " + wi.id + ": " + skip_reason[static_cast<std::size_t>(w)]);
      }
    }
  }

  std::set<std::string> skipped_ids;
  for (int w = 0; w < W; ++w) {
    const auto& reason = skip_reason[static_cast<std::size_t>(w)];
    if (reason.empty()) continue;
    result.skipped.push_back({data.writers[static_cast<std::size_t>(w)].id, reason});
    skipped_ids.insert(data.writers[static_cast<std::size_t>(w)].id);
  }
  auto dropped = [&](const auto& r) { return skipped_ids.count(r.writer) > 0; };
  std::erase_if(rows, dropped);
  std::erase_if(result.scores, dropped);
  std::erase_if(result.runs, dropped);
  if (rows.empty()) throw Error("run_experiment: every writer was skipped");
  result.report = aggregate(std::move(rows));
  return result;
}

ExperimentResult run_experiment(const DatasetLayout& layout, const ExperimentConfig& cfg,
                                const LogFn& log) {
  return run_experiment(load_dataset(layout), cfg, log);
}

std::string run_directory_name(const ExperimentConfig& cfg) {
  return "run-" + cfg.hash() + "-seed" + std::to_string(cfg.seed);
}

fs::path write_run(const fs::path& out_root, const ExperimentConfig& cfg, const ExperimentResult& result) {
  const fs::path dir = out_root / run_directory_name(cfg);
  fs::create_directories(dir);
  cfg.save(dir / "config.txt");
  write_metrics_csv(dir / "metrics.csv", result.report);

  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << std::setprecision(10);
    return out;
  };
  {
    auto out = open("scores.csv");
    out << "repetition,writer,kind,sample,score\n";
    for (const auto& s : result.scores)
      out << s.repetition << ',' << s.writer << ',' << s.kind << ',' << s.sample << ',' << s.score << '\n';
  }
  {
    auto out = open("runs.csv");
    out << "repetition,writer,motl,C,gamma,hard_threshold,negatives,random_pool,references\n";
    for (const auto& r : result.runs) {
      out << r.repetition << ',' << r.writer << ',' << r.motl << ',' << r.C << ',' << r.gamma << ','
          << r.hard_threshold << ',' << r.negatives << ',' << r.random_pool << ',';
      for (std::size_t i = 0; i < r.references.size(); ++i) out << (i ? ";" : "") << r.references[i];
      out << '\n';
    }
  }
  {
    auto out = open("skipped.csv");
    out << "writer,reason\n";
    for (const auto& s : result.skipped) out << s.writer << ",\"" << s.reason << "\"\n";
  }

  std::set<int> lengths(result.descriptor_lengths.begin(), result.descriptor_lengths.end());
  nlohmann::json run;
  run["config_hash"] = cfg.hash();
  run["seed"] = cfg.seed;
  run["config"] = cfg.to_map();
  run["skipped_writers"] = result.skipped.size();
  run["descriptors_built"] = result.descriptor_lengths.size();
  run["descriptor_lengths"] = std::vector<int>(lengths.begin(), lengths.end());
  run["random_pool"] = cfg.random_pool == 0 ? "one unused genuine per other writer"
                                            : std::to_string(cfg.random_pool) + " other-writer genuines";
  if (cfg.noise.kind == NoiseSpec::Kind::Gaussian && cfg.use_median())
    run["notes"] = "gaussian noise is cleaned with the 3x3 median filter";
  write_metrics_json(dir / "summary.json", result.report, run.dump());
  return dir;
}

}  // namespace sigsparse
