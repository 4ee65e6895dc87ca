#include "sigsparse/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"
#include "sigsparse/error.hpp"

namespace sigsparse {

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows) {
  Standardizer s;
  s.mean = rows.colwise().mean().transpose();
  s.scale = Eigen::VectorXd::Ones(rows.cols());
  if (rows.rows() > 1) {
    const Eigen::MatrixXd centered = rows.rowwise() - s.mean.transpose();
    const Eigen::VectorXd var =
        centered.colwise().squaredNorm().transpose() / static_cast<double>(rows.rows() - 1);
    for (Eigen::Index j = 0; j < var.size(); ++j)
      if (var(j) > 1e-24) s.scale(j) = std::sqrt(var(j));
  }
  return s;
}

Standardizer Standardizer::identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw Error("descriptor length does not match the model");
  return (x - mean).cwiseQuotient(scale);
}

Eigen::MatrixXd Standardizer::apply_rows(const Eigen::MatrixXd& rows) const {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    out.row(i) = apply(rows.row(i).transpose()).transpose();
  return out;
}

double Classifier::score(const Eigen::VectorXd& descriptor) const {
  return svm.decision(scaler.apply(descriptor));
}

Eigen::VectorXd Classifier::score(const Eigen::MatrixXd& rows) const {
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out(i) = score(Eigen::VectorXd(rows.row(i).transpose()));
  return out;
}

std::vector<double> TrainOptions::default_C_grid() {
  std::vector<double> g;
  for (int e = -3; e <= 7; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

std::vector<double> TrainOptions::default_gamma_grid() {
  std::vector<double> g;
  for (int e = -9; e <= 3; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

double auc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw Error("auc: both classes need scores");
  // Rank-sum with midranks for ties.
  std::vector<std::pair<double, int>> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.emplace_back(s, 1);
  for (double s : neg) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second == 1) rank_sum += midrank;
    i = j;
  }
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double hard_threshold(std::span<const double> cvs_plus) {
  if (cvs_plus.empty()) throw Error("hard_threshold: no stored validation scores");
  return 0.5 * std::accumulate(cvs_plus.begin(), cvs_plus.end(), 0.0) /
         static_cast<double>(cvs_plus.size());
}

namespace {

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& a, const std::vector<int>& ia,
                           const std::vector<Eigen::VectorXd>& b, const std::vector<int>& ib) {
  const Eigen::Index dim = a.empty() ? b.front().size() : a.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ia.size() + ib.size()), dim);
  Eigen::Index r = 0;
  for (int i : ia) out.row(r++) = a[static_cast<std::size_t>(i)].transpose();
  for (int i : ib) out.row(r++) = b[static_cast<std::size_t>(i)].transpose();
  return out;
}

Eigen::VectorXd labels(std::size_t npos, std::size_t nneg) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(npos + nneg));
  y.head(static_cast<Eigen::Index>(npos)).setOnes();
  y.tail(static_cast<Eigen::Index>(nneg)).setConstant(-1.0);
  return y;
}

// Holdout size per class: round(fraction * n), kept in [1, n - 1].
int holdout_count(std::size_t n, double fraction) {
  const int h = static_cast<int>(std::lround(fraction * static_cast<double>(n)));
  return std::clamp(h, 1, static_cast<int>(n) - 1);
}

Classifier fit_classifier(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double C,
                          double gamma, const TrainOptions& opt) {
  Classifier clf;
  clf.scaler = opt.standardize ? Standardizer::fit(X) : Standardizer::identity(static_cast<int>(X.cols()));
  clf.svm = RbfSvm::train(clf.scaler.apply_rows(X), y, SvmParams{C, gamma, opt.smo_tol});
  return clf;
}

}  // namespace

TrainResult train_svm(const LabeledFeatureSet& data, const TrainOptions& opt_in) {
  TrainOptions opt = opt_in;
  if (opt.C_grid.empty()) opt.C_grid = TrainOptions::default_C_grid();
  if (opt.gamma_grid.empty()) opt.gamma_grid = TrainOptions::default_gamma_grid();
  if (data.positives.size() < 2 || data.negatives.size() < 2)
    throw Error("train_svm: need at least two samples per class");
  if (!(opt.holdout_fraction > 0.0 && opt.holdout_fraction < 1.0))
    throw Error("train_svm: holdout fraction must be in (0, 1)");
  const auto dim = data.positives.front().size();
  for (const auto* set : {&data.positives, &data.negatives})
    for (const auto& v : *set)
      if (v.size() != dim) throw Error("train_svm: descriptors differ in length");

  std::mt19937_64 rng(opt.seed);
  std::vector<int> pos(data.positives.size());
  std::vector<int> neg(data.negatives.size());
  std::iota(pos.begin(), pos.end(), 0);
  std::iota(neg.begin(), neg.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  const int hp = holdout_count(pos.size(), opt.holdout_fraction);
  const int hn = holdout_count(neg.size(), opt.holdout_fraction);

  TrainResult res;
  res.holdout_positive.assign(pos.begin(), pos.begin() + hp);
  res.holdout_negative.assign(neg.begin(), neg.begin() + hn);
  const std::vector<int> train_pos(pos.begin() + hp, pos.end());
  const std::vector<int> train_neg(neg.begin() + hn, neg.end());

  const Eigen::MatrixXd Xtr = stack_rows(data.positives, train_pos, data.negatives, train_neg);
  const Eigen::VectorXd ytr = labels(train_pos.size(), train_neg.size());
  const Eigen::MatrixXd Xho =
      stack_rows(data.positives, res.holdout_positive, data.negatives, res.holdout_negative);

  res.best.auc = -1.0;
  for (double C : opt.C_grid) {
    for (double gamma : opt.gamma_grid) {
      const Classifier clf = fit_classifier(Xtr, ytr, C, gamma, opt);
      const Eigen::VectorXd s = clf.score(Xho);
      const std::span<const double> all(s.data(), static_cast<std::size_t>(s.size()));
      const double a = auc(all.first(static_cast<std::size_t>(hp)), all.subspan(static_cast<std::size_t>(hp)));
      int tp = 0;
      int tn = 0;
      for (int i = 0; i < hp; ++i) tp += s(i) >= 0.0 ? 1 : 0;
      for (Eigen::Index i = hp; i < s.size(); ++i) tn += s(i) < 0.0 ? 1 : 0;
      const double acc = 0.5 * (static_cast<double>(tp) / hp + static_cast<double>(tn) / hn);
      res.grid.push_back({C, gamma, a, acc});
      if (a > res.best.auc || (a == res.best.auc && acc > res.best.accuracy)) {
        res.best = {C, gamma, a, acc};
        res.cvs_plus.assign(s.data(), s.data() + hp);
      }
    }
  }

  std::vector<int> all_pos(data.positives.size());
  std::vector<int> all_neg(data.negatives.size());
  std::iota(all_pos.begin(), all_pos.end(), 0);
  std::iota(all_neg.begin(), all_neg.end(), 0);
  res.classifier = fit_classifier(stack_rows(data.positives, all_pos, data.negatives, all_neg),
                                  labels(all_pos.size(), all_neg.size()), res.best.C,
                                  res.best.gamma, opt);
  return res;
}

namespace {

constexpr char kModelMagic[8] = {'S', 'G', 'S', 'P', 'W', 'M', 'D', 'L'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("truncated writer model");
  return v;
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw Error("truncated writer model");
}

nlohmann::json model_metadata(const WriterModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelVersion;
  j["writer_id"] = m.writer_id;
  j["motl"] = m.motl;
  j["seed"] = m.seed;
  j["C"] = m.classifier.svm.C();
  j["gamma"] = m.classifier.svm.gamma();
  j["bias"] = m.classifier.svm.bias();
  j["support_vectors"] = m.classifier.svm.support_vectors().rows();
  j["hard_threshold"] = m.hard_threshold;
  j["cvs_plus"] = m.cvs_plus;
  j["config"] = m.config;
  j["dictionary"] = {{"n", m.dictionary.n()},
                     {"K", m.dictionary.K()},
                     {"constraint", to_string(m.dictionary.constraint())}};
  return j;
}

}  // namespace

void save_writer_model(const std::filesystem::path& path, const WriterModel& m) {
  const std::string meta = model_metadata(m).dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kModelMagic, sizeof kModelMagic);
  put(out, kModelVersion);
  put(out, static_cast<std::uint64_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));

  const auto& D = m.dictionary;
  put(out, static_cast<std::uint32_t>(D.n()));
  put(out, static_cast<std::uint32_t>(D.K()));
  put(out, static_cast<std::uint32_t>(D.constraint()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> atoms = D.atoms();
  put_doubles(out, atoms.data(), static_cast<std::size_t>(atoms.size()));

  const auto dim = static_cast<std::uint32_t>(m.classifier.scaler.mean.size());
  put(out, dim);
  put_doubles(out, m.classifier.scaler.mean.data(), dim);
  put_doubles(out, m.classifier.scaler.scale.data(), dim);

  const auto& svm = m.classifier.svm;
  if (svm.support_vectors().cols() != static_cast<Eigen::Index>(dim) && svm.support_vectors().rows() > 0)
    throw Error("writer model: scaler and SVM disagree in dimension");
  put(out, static_cast<std::uint32_t>(svm.support_vectors().rows()));
  put_doubles(out, svm.dual_coef().data(), static_cast<std::size_t>(svm.dual_coef().size()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sv = svm.support_vectors();
  put_doubles(out, sv.data(), static_cast<std::size_t>(sv.size()));
  if (!out) throw Error("write failed: " + path.string());

  std::ofstream js(path.string() + ".json");
  js << model_metadata(m).dump(2) << '\n';
}

WriterModel load_writer_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kModelMagic, sizeof magic) != 0)
    throw Error("not a writer model file: " + path.string());
  if (get<std::uint32_t>(in) != kModelVersion) throw Error("unsupported writer model version");
  const auto meta_len = get<std::uint64_t>(in);
  std::string meta(meta_len, '\0');
  in.read(meta.data(), static_cast<std::streamsize>(meta_len));
  if (!in) throw Error("truncated writer model");
  const nlohmann::json j = nlohmann::json::parse(meta);

  const auto n = get<std::uint32_t>(in);
  const auto K = get<std::uint32_t>(in);
  const auto tag = get<std::uint32_t>(in);
  if (tag > 1) throw Error("unknown dictionary constraint tag");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> atoms(n, K);
  get_doubles(in, atoms.data(), static_cast<std::size_t>(atoms.size()));

  const auto dim = get<std::uint32_t>(in);
  Standardizer scaler{Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
  get_doubles(in, scaler.mean.data(), dim);
  get_doubles(in, scaler.scale.data(), dim);

  const auto nsv = get<std::uint32_t>(in);
  Eigen::VectorXd coef(nsv);
  get_doubles(in, coef.data(), nsv);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sv(nsv, dim);
  get_doubles(in, sv.data(), static_cast<std::size_t>(sv.size()));

  WriterModel m{
      .writer_id = j.at("writer_id").get<std::string>(),
      .dictionary = Dictionary(Eigen::MatrixXd(atoms), static_cast<AtomConstraint>(tag)),
      .motl = j.at("motl").get<int>(),
      .classifier = {std::move(scaler),
                     RbfSvm::from_parts(Eigen::MatrixXd(sv), std::move(coef), j.at("bias").get<double>(),
                                        j.at("gamma").get<double>(), j.at("C").get<double>())},
      .cvs_plus = j.at("cvs_plus").get<std::vector<double>>(),
      .hard_threshold = j.at("hard_threshold").get<double>(),
      .seed = j.at("seed").get<std::uint64_t>(),
      .config = j.at("config").get<std::map<std::string, std::string>>(),
  };
  return m;
}

}  // namespace sigsparse
