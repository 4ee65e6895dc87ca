#include "sigsparse/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "sigsparse/error.hpp"

namespace sigsparse {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size())
    throw Error("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw Error("config: '" + key + "' expects on/off, got '" + v + "'");
}

Solver solver_from(const std::string& v) {
  if (v == "omp") return Solver::Omp;
  if (v == "lars") return Solver::Lars;
  throw Error("config: solver must be omp or lars, got '" + v + "'");
}

SplitOrder split_from(const std::string& v) {
  if (v == "columns-rows") return SplitOrder::ColumnsThenRows;
  if (v == "rows-columns") return SplitOrder::RowsThenColumns;
  throw Error("config: split_order must be columns-rows or rows-columns, got '" + v + "'");
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config: line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error("config: line " + std::to_string(lineno) + " has an empty key");
    if (kv.count(key)) throw Error("config: duplicate key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw Error("config: " + msg);
  };
  need(n_g_ref >= 2, "n_g_ref must be >= 2");
  need(patch_size >= 3 && patch_size % 2 == 1, "patch_size must be odd and >= 3");
  need(K > patch_size * patch_size, "K must exceed patch_size^2");
  need(rho >= 1 && rho <= patch_size * patch_size, "rho must lie in [1, patch_size^2]");
  need(lambda > 0.0, "lambda must be > 0");
  need(solver == Solver::Lars || prior == Prior::None, "priors require solver = lars");
  need(ksvd_iters >= 1 && cascade_iters >= 0, "iteration counts out of range");
  need(online_iters >= 1 && online_minibatch >= 1, "online settings out of range");
  need(beta >= 1 && beta <= 8, "beta must lie in [1, 8]");
  need(keypoint_max >= 1 && keypoint_threshold >= 1, "keypoint settings out of range");
  need(repetitions >= 1, "repetitions must be >= 1");
  need(median == "auto" || median == "on" || median == "off", "median must be auto, on or off");
  need(holdout_fraction > 0.0 && holdout_fraction < 1.0, "holdout_fraction must lie in (0, 1)");
  need(random_pool >= 0, "random_pool must be >= 0");
  noise.validate();
}

bool ExperimentConfig::use_median() const {
  if (median == "on") return true;
  if (median == "off") return false;
  return noise.kind != NoiseSpec::Kind::None;
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  return {
      {"n_g_ref", std::to_string(n_g_ref)},
      {"patch_size", std::to_string(patch_size)},
      {"K", std::to_string(K)},
      {"solver", solver == Solver::Omp ? "omp" : "lars"},
      {"rho", std::to_string(rho)},
      {"lambda", fmt_double(lambda)},
      {"prior", sigsparse::to_string(prior)},
      {"ksvd_iters", std::to_string(ksvd_iters)},
      {"cascade_iters", std::to_string(cascade_iters)},
      {"online_iters", std::to_string(online_iters)},
      {"online_minibatch", std::to_string(online_minibatch)},
      {"pooling", sigsparse::to_string(pooling)},
      {"beta", std::to_string(beta)},
      {"split_order", split_order == SplitOrder::ColumnsThenRows ? "columns-rows" : "rows-columns"},
      {"keypoints", keypoints ? "on" : "off"},
      {"keypoint_max", std::to_string(keypoint_max)},
      {"keypoint_threshold", std::to_string(keypoint_threshold)},
      {"repetitions", std::to_string(repetitions)},
      {"seed", std::to_string(seed)},
      {"noise", noise.to_string()},
      {"median", median},
      {"standardize", standardize ? "on" : "off"},
      {"holdout_fraction", fmt_double(holdout_fraction)},
      {"random_pool", std::to_string(random_pool)},
  };
}

ExperimentConfig ExperimentConfig::with(const std::map<std::string, std::string>& kv) const {
  ExperimentConfig c = *this;
  for (const auto& [k, v] : kv) {
    if (k == "n_g_ref") c.n_g_ref = to_int(k, v);
    else if (k == "patch_size") c.patch_size = to_int(k, v);
    else if (k == "K") c.K = to_int(k, v);
    else if (k == "solver") c.solver = solver_from(v);
    else if (k == "rho") c.rho = to_int(k, v);
    else if (k == "lambda") c.lambda = to_double(k, v);
    else if (k == "prior") c.prior = prior_from_string(v);
    else if (k == "ksvd_iters") c.ksvd_iters = to_int(k, v);
    else if (k == "cascade_iters") c.cascade_iters = to_int(k, v);
    else if (k == "online_iters") c.online_iters = to_int(k, v);
    else if (k == "online_minibatch") c.online_minibatch = to_int(k, v);
    else if (k == "pooling") c.pooling = pooling_from_string(v);
    else if (k == "beta") c.beta = to_int(k, v);
    else if (k == "split_order") c.split_order = split_from(v);
    else if (k == "keypoints") c.keypoints = to_bool(k, v);
    else if (k == "keypoint_max") c.keypoint_max = to_int(k, v);
    else if (k == "keypoint_threshold") c.keypoint_threshold = to_int(k, v);
    else if (k == "repetitions") c.repetitions = to_int(k, v);
    else if (k == "seed") c.seed = to_u64(k, v);
    else if (k == "noise") c.noise = NoiseSpec::parse(v);
    else if (k == "median") c.median = v;
    else if (k == "standardize") c.standardize = to_bool(k, v);
    else if (k == "holdout_fraction") c.holdout_fraction = to_double(k, v);
    else if (k == "random_pool") c.random_pool = to_int(k, v);
    else throw Error("config: unknown key '" + k + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& kv) {
  return ExperimentConfig{}.with(kv);
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
  return out;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  return from_map(parse_key_values(text));
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize())));
  return buf;
}

}  // namespace sigsparse
