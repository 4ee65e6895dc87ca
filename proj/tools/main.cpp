#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sigsparse/config.hpp"
#include "sigsparse/error.hpp"
#include "sigsparse/experiment.hpp"
#include "sigsparse/image_io.hpp"
#include "sigsparse/synth.hpp"

namespace fs = std::filesystem;
using namespace sigsparse;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "key = value config file");
    app->add_option("--set", sets, "override, key=value (repeatable)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!file.empty()) cfg = ExperimentConfig::load(file);
    std::map<std::string, std::string> kv;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error("--set expects key=value, got '" + s + "'");
      kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return cfg.with(kv);
  }
};

std::vector<PreparedImage> prepare_all(const std::vector<std::string>& paths, const ExperimentConfig& cfg) {
  std::vector<PreparedImage> out;
  for (std::size_t i = 0; i < paths.size(); ++i) out.push_back(preprocess(load_image(paths[i]), cfg, cfg.seed + i));
  return out;
}

int resolve_level(const std::string& level, const PreparedImage& img, const ExperimentConfig& cfg) {
  if (level == "auto") return optimal_thinning_level(img.otsu.binary, cfg.patch_size).otl;
  return std::stoi(level);
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Writer-dependent offline signature verification with sparse patch codes"};
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "binarise, report OTL and write the thinned skeleton");
  std::string pre_image, pre_out, pre_level = "auto";
  ConfigArgs pre_cfg;
  pre->add_option("--image", pre_image)->required();
  pre->add_option("--out", pre_out, "skeleton PGM");
  pre->add_option("--level", pre_level, "thinning level or 'auto'");
  pre_cfg.attach(pre);

  // learn-dict
  auto* ld = app.add_subcommand("learn-dict", "learn a dictionary from reference signatures");
  std::vector<std::string> ld_images;
  std::string ld_out;
  ConfigArgs ld_cfg;
  ld->add_option("--images", ld_images)->required();
  ld->add_option("--out", ld_out)->required();
  double ld_budget = 0.0;
  ld->add_option("--time-budget", ld_budget,
                 "solver lars: seconds of online learning; sets online_iters from a timed calibration");
  ld_cfg.attach(ld);

  // encode
  auto* enc = app.add_subcommand("encode", "sparse-code the skeleton patches of one image");
  std::string enc_dict, enc_image, enc_out, enc_patches, enc_level = "auto";
  ConfigArgs enc_cfg;
  enc->add_option("--dict", enc_dict)->required();
  enc->add_option("--image", enc_image)->required();
  enc->add_option("--level", enc_level);
  enc->add_option("--out", enc_out, "codes CSV (column,atom,value)")->required();
  enc->add_option("--patches-out", enc_patches, "debug PatchMatrix binary");
  enc_cfg.attach(enc);

  // features
  auto* feat = app.add_subcommand("features", "compute the pooled descriptor of one image");
  std::string feat_dict, feat_image, feat_out, feat_bin, feat_level = "auto", feat_pool;
  int feat_beta = 0;
  ConfigArgs feat_cfg;
  feat->add_option("--dict", feat_dict)->required();
  feat->add_option("--image", feat_image)->required();
  feat->add_option("--level", feat_level);
  feat->add_option("--pooling", feat_pool, "f1..f5");
  feat->add_option("--beta", feat_beta);
  feat->add_option("--out", feat_out, "descriptor JSON")->required();
  feat->add_option("--binary", feat_bin, "packed binary descriptor");
  feat_cfg.attach(feat);

  // keypoints
  auto* kp = app.add_subcommand("keypoints", "detect corner keypoints");
  std::string kp_image, kp_out;
  ConfigArgs kp_cfg;
  kp->add_option("--image", kp_image)->required();
  kp->add_option("--out", kp_out, "CSV (row,col,response,octave)");
  kp_cfg.attach(kp);

  // enroll
  auto* en = app.add_subcommand("enroll", "train a writer model");
  std::string en_writer, en_out;
  std::vector<std::string> en_refs, en_negs;
  ConfigArgs en_cfg;
  en->add_option("--writer", en_writer)->required();
  en->add_option("--refs", en_refs, "genuine references")->required();
  en->add_option("--negatives", en_negs, "other writers' genuines")->required();
  en->add_option("--out", en_out)->required();
  en_cfg.attach(en);

  // verify
  auto* ver = app.add_subcommand("verify", "score a questioned signature");
  std::string ver_model, ver_image;
  double ver_threshold = 0.0;
  ver->add_option("--model", ver_model)->required();
  ver->add_option("--image", ver_image)->required();
  auto* ver_t = ver->add_option("--threshold", ver_threshold, "extra decision threshold");

  // synth
  auto* syn = app.add_subcommand("synth", "generate a synthetic signature dataset");
  std::string syn_out;
  int syn_writers = 10;
  SynthCounts syn_counts;
  SynthStyle syn_style;
  std::uint64_t syn_seed = 1;
  syn->add_option("--out", syn_out)->required();
  syn->add_option("--writers", syn_writers);
  syn->add_option("--genuine", syn_counts.genuine);
  syn->add_option("--forgery", syn_counts.forgery);
  syn->add_option("--seed", syn_seed);
  syn->add_option("--stroke-width", syn_style.stroke_width);
  syn->add_option("--jitter", syn_style.genuine_jitter);
  syn->add_option("--distortion", syn_style.forgery_distortion);
  syn->add_option("--width", syn_style.width);
  syn->add_option("--height", syn_style.height);

  // experiment
  auto* ex = app.add_subcommand("experiment", "run the writer-dependent protocol");
  std::string ex_data, ex_out = "runs";
  bool ex_cedar = false, ex_quiet = false;
  ConfigArgs ex_cfg;
  ex->add_option("--data", ex_data, "dataset root")->required();
  ex->add_flag("--cedar", ex_cedar, "read a full_org/full_forg folder pair");
  ex->add_option("--out", ex_out, "parent directory of the run directory");
  ex->add_flag("--quiet", ex_quiet);
  ex_cfg.attach(ex);

  // report
  auto* rep = app.add_subcommand("report", "recompute and print metrics of a run directory");
  std::string rep_run;
  rep->add_option("--run", rep_run)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) {
      const auto cfg = pre_cfg.resolve();
      const auto img = preprocess(load_image(pre_image), cfg, cfg.seed);
      const auto otl = optimal_thinning_level(img.otsu.binary, cfg.patch_size);
      const int level = pre_level == "auto" ? otl.otl : std::stoi(pre_level);
      const auto skel = thin_to_level(img.otsu.binary, level);
      if (!pre_out.empty()) save_pgm(pre_out, skel.image);
      print_json({{"threshold", img.otsu.threshold},
                  {"ink_pixels", img.otsu.binary.ink_count()},
                  {"otl", otl.otl},
                  {"patch_density", otl.curve.pd},
                  {"level", level},
                  {"skeleton_pixels", skel.image.ink_count()}});
    } else if (*ld) {
      auto cfg = ld_cfg.resolve();
      const auto refs = prepare_all(ld_images, cfg);
      const int level = references_motl(refs, cfg);
      std::vector<PatchMatrix> patches;
      for (const auto& r : refs) patches.push_back(signature_patches(r, thin_to_level(r.otsu.binary, level).image, cfg));
      if (ld_budget > 0.0 && cfg.solver == Solver::Lars) {
        std::vector<Eigen::MatrixXd> stream;
        for (const auto& p : patches)
          if (!p.empty()) stream.push_back(p.data);
        OnlineOptions oo;
        oo.atoms = cfg.K;
        oo.lambda = cfg.lambda;
        oo.minibatch = cfg.online_minibatch;
        oo.prior = cfg.prior;
        oo.time_budget_s = ld_budget;
        cfg.online_iters = std::max(1, estimate_online_iterations(stream, oo));
      }
      const auto dict = learn_dictionary(patches, cfg, cfg.seed);
      auto meta = cfg.to_map();
      meta["motl"] = std::to_string(level);
      save_dictionary(ld_out, dict, meta);
      print_json({{"motl", level}, {"n", dict.n()}, {"K", dict.K()}, {"out", ld_out}});
    } else if (*enc) {
      const auto cfg = enc_cfg.resolve();
      const auto dict = load_dictionary(enc_dict);
      const auto img = preprocess(load_image(enc_image), cfg, cfg.seed);
      const int level = resolve_level(enc_level, img, cfg);
      const auto patches = signature_patches(img, thin_to_level(img.otsu.binary, level).image, cfg);
      const auto codes = encode_patches(dict, patches, cfg);
      if (!enc_patches.empty()) save_patch_matrix(enc_patches, patches);
      std::ofstream out(enc_out);
      out << "column,row,col,atom,value\n";
      out.precision(12);
      for (int j = 0; j < codes.A.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(codes.A, j); it; ++it)
          out << j << ',' << patches.locations[static_cast<std::size_t>(j)].row << ','
              << patches.locations[static_cast<std::size_t>(j)].col << ',' << it.row() << ',' << it.value() << '\n';
      print_json({{"patches", patches.M()}, {"nonzeros", codes.A.nonZeros()}, {"level", level}});
    } else if (*feat) {
      auto cfg = feat_cfg.resolve();
      std::map<std::string, std::string> kv;
      if (!feat_pool.empty()) kv["pooling"] = feat_pool;
      if (feat_beta > 0) kv["beta"] = std::to_string(feat_beta);
      cfg = cfg.with(kv);
      const auto dict = load_dictionary(feat_dict);
      const auto img = preprocess(load_image(feat_image), cfg, cfg.seed);
      const auto f = compute_features(img, dict, resolve_level(feat_level, img, cfg), cfg);
      save_descriptor_json(feat_out, f.descriptor);
      if (!feat_bin.empty()) save_descriptor_binary(feat_bin, f.descriptor);
      print_json({{"length", f.descriptor.values.size()},
                  {"pooling", to_string(f.descriptor.pooling)},
                  {"beta", f.descriptor.beta},
                  {"K", f.descriptor.K},
                  {"keypoints", f.keypoints.points.size()}});
    } else if (*kp) {
      const auto cfg = kp_cfg.resolve();
      const auto img = preprocess(load_image(kp_image), cfg, cfg.seed);
      KeypointOptions ko;
      ko.max_points = cfg.keypoint_max;
      ko.threshold = cfg.keypoint_threshold;
      const auto pts = detect_keypoints(img.gray, ko);
      std::ostringstream csv;
      csv << "row,col,response,octave\n";
      for (const auto& p : pts) csv << p.row << ',' << p.col << ',' << p.response << ',' << p.octave << '\n';
      if (kp_out.empty()) std::cout << csv.str();
      else std::ofstream(kp_out) << csv.str();
    } else if (*en) {
      const auto cfg = en_cfg.resolve();
      const auto refs = prepare_all(en_refs, cfg);
      const auto negs = prepare_all(en_negs, cfg);
      const auto model = enroll(en_writer, refs, negs, cfg, cfg.seed);
      save_writer_model(en_out, model);
      print_json({{"writer", model.writer_id},
                  {"motl", model.motl},
                  {"C", model.classifier.svm.C()},
                  {"gamma", model.classifier.svm.gamma()},
                  {"hard_threshold", model.hard_threshold}});
    } else if (*ver) {
      const auto model = load_writer_model(ver_model);
      const auto cfg = ExperimentConfig::from_map(model.config);
      const double s = verify(model, preprocess(load_image(ver_image), cfg, cfg.seed), cfg);
      nlohmann::json j{{"score", s}, {"hard_threshold", model.hard_threshold},
                       {"decision_hard", s >= model.hard_threshold ? "genuine" : "forgery"}};
      if (*ver_t) {
        j["threshold"] = ver_threshold;
        j["decision_threshold"] = s >= ver_threshold ? "genuine" : "forgery";
      }
      print_json(j);
    } else if (*syn) {
      const auto data = synth_generate(syn_writers, syn_counts, syn_style, syn_seed);
      const auto layout = write_dataset(data, syn_out);
      print_json({{"root", syn_out}, {"writers", layout.writers.size()}});
    } else if (*ex) {
      const auto cfg = ex_cfg.resolve();
      const auto layout = ex_cedar ? load_cedar_layout(ex_data) : load_layout(ex_data);
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = run_experiment(layout, cfg, [&](const std::string& s) {
        if (!ex_quiet) std::cerr << s << '\n';
      });
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const auto dir = write_run(ex_out, cfg, result);
      const auto& m = result.report.mean;
      print_json({{"run", dir.string()},
                  {"writers", result.report.writers},
                  {"skipped", result.skipped.size()},
                  {"eer_s", m.eer_s},
                  {"eer_r", m.eer_r},
                  {"p_far_r_at_eer_s", m.p_far_r_at_eer_s},
                  {"far_s_hard", m.far_s_hard},
                  {"frr_hard", m.frr_hard},
                  {"seconds", secs}});
    } else if (*rep) {
      const fs::path dir = rep_run;
      std::map<std::string, double> hard;
      {
        std::ifstream in(dir / "runs.csv");
        if (!in) throw Error("missing runs.csv in " + dir.string());
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
          std::vector<std::string> f;
          std::stringstream ss(line);
          for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
          if (f.size() < 6) continue;
          hard[f[0] + "|" + f[1]] = std::stod(f[5]);
        }
      }
      std::map<std::string, std::pair<int, ScoreSet>> sets;
      {
        std::ifstream in(dir / "scores.csv");
        if (!in) throw Error("missing scores.csv in " + dir.string());
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
          std::vector<std::string> f;
          std::stringstream ss(line);
          for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
          if (f.size() != 5) throw Error("bad scores.csv row: " + line);
          auto& [r, s] = sets[f[0] + "|" + f[1]];
          r = std::stoi(f[0]);
          const double v = std::stod(f[4]);
          (f[2] == "genuine" ? s.genuine : f[2] == "skilled" ? s.skilled : s.random).push_back(v);
        }
      }
      std::vector<WriterMetrics> rows;
      for (const auto& [key, rs] : sets) {
        WriterMetrics m = writer_metrics(rs.second, hard.at(key));
        m.repetition = rs.first;
        m.writer = key.substr(key.find('|') + 1);
        rows.push_back(m);
      }
      const auto report = aggregate(rows);
      std::printf("%-8s %4s %8s %8s %8s %8s %8s\n", "writer", "rep", "EER_S", "EER_R", "FAR_R@S", "FAR_S@h", "FRR@h");
      for (const auto& m : report.per_writer)
        std::printf("%-8s %4d %8.2f %8.2f %8.2f %8.2f %8.2f\n", m.writer.c_str(), m.repetition, m.eer_s, m.eer_r,
                    m.p_far_r_at_eer_s, m.far_s_hard, m.frr_hard);
      const auto& m = report.mean;
      std::printf("%-8s %4s %8.2f %8.2f %8.2f %8.2f %8.2f\n", "mean", "", m.eer_s, m.eer_r, m.p_far_r_at_eer_s,
                  m.far_s_hard, m.frr_hard);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
