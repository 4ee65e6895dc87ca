#include "sigsparse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <regex>

#include "json.hpp"
#include "sigsparse/error.hpp"
#include "sigsparse/image_io.hpp"
#include "sigsparse/rng.hpp"

namespace fs = std::filesystem;

namespace sigsparse {

namespace {

using Point = std::pair<double, double>;

bool is_image(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".png";
}

std::vector<Point> catmull_rom(const std::vector<Point>& cp) {
  std::vector<Point> out;
  if (cp.size() < 2) return cp;
  const std::size_t n = cp.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Point p0 = cp[i == 0 ? 0 : i - 1];
    const Point p1 = cp[i];
    const Point p2 = cp[i + 1];
    const Point p3 = cp[std::min(i + 2, n - 1)];
    const double len = std::hypot(p2.first - p1.first, p2.second - p1.second);
    const int steps = std::max(2, static_cast<int>(std::ceil(len / 0.5)));
    for (int s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const double t2 = t * t;
      const double t3 = t2 * t;
      auto blend = [&](double a, double b, double c, double d) {
        return 0.5 * (2 * b + (-a + c) * t + (2 * a - 5 * b + 4 * c - d) * t2 +
                      (-a + 3 * b - 3 * c + d) * t3);
      };
      out.emplace_back(blend(p0.first, p1.first, p2.first, p3.first),
                       blend(p0.second, p1.second, p2.second, p3.second));
    }
  }
  out.push_back(cp.back());
  return out;
}

double segment_distance(double px, double py, const Point& a, const Point& b) {
  const double dx = b.first - a.first;
  const double dy = b.second - a.second;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - a.first) * dx + (py - a.second) * dy) / len2, 0.0, 1.0);
  return std::hypot(px - (a.first + t * dx), py - (a.second + t * dy));
}

}  // namespace

StrokeTemplate synth_template(const SynthStyle& style, std::uint64_t seed) {
  if (style.control_points < 3) throw Error("synth: need at least 3 control points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double W = style.width;
  const double H = style.height;
  const double margin = 0.1 * W;

  // Main stroke: a cursive-like oscillation with occasional back-steps that
  // turn into loops once splined.
  std::vector<Point> main;
  double x = 0.0;
  for (int i = 0; i < style.control_points; ++i) {
    if (i > 0) x += u(rng) < 0.25 ? -0.6 * u(rng) : 0.5 + u(rng);
    const double sign = i % 2 == 0 ? -1.0 : 1.0;
    main.emplace_back(x, 0.5 * H + sign * (0.08 + 0.22 * u(rng)) * H);
  }
  const auto [lo, hi] = std::minmax_element(main.begin(), main.end(),
                                            [](const Point& a, const Point& b) { return a.first < b.first; });
  const double x0 = lo->first;
  const double span = std::max(hi->first - x0, 1e-6);
  for (auto& p : main) p.first = margin + (p.first - x0) / span * (W - 2 * margin);

  std::vector<Point> flourish;
  const double fx = margin + u(rng) * 0.3 * W;
  const double fw = (0.4 + 0.3 * u(rng)) * W;
  for (int i = 0; i < 4; ++i)
    flourish.emplace_back(fx + fw * i / 3.0, (0.78 + 0.1 * u(rng)) * H);

  std::vector<Point> mark;
  const double mx = margin + u(rng) * (W - 2 * margin);
  const double my = (0.1 + 0.1 * u(rng)) * H;
  mark.emplace_back(mx, my);
  mark.emplace_back(mx + (4 + 6 * u(rng)), my + (2 * u(rng) - 1) * 3);

  return StrokeTemplate{{main, flourish, mark}};
}

StrokeTemplate perturb(const StrokeTemplate& t, double sigma, const SynthStyle& style,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double angle = style.rotation_jitter * n01(rng) * std::numbers::pi / 180.0;
  const double scale = 1.0 + style.scale_jitter * n01(rng);
  const double cx = 0.5 * style.width;
  const double cy = 0.5 * style.height;
  const double ca = std::cos(angle) * scale;
  const double sa = std::sin(angle) * scale;
  StrokeTemplate out = t;
  for (auto& stroke : out.strokes) {
    for (auto& [x, y] : stroke) {
      const double dx = x + sigma * n01(rng) - cx;
      const double dy = y + sigma * n01(rng) - cy;
      x = cx + ca * dx - sa * dy;
      y = cy + sa * dx + ca * dy;
    }
  }
  return out;
}

GrayImage render_strokes(const StrokeTemplate& t, const SynthStyle& style) {
  if (style.width < 8 || style.height < 8) throw Error("synth: canvas too small");
  if (!(style.stroke_width > 0.0)) throw Error("synth: stroke width must be > 0");
  const int W = style.width;
  const int H = style.height;
  std::vector<double> dist(static_cast<std::size_t>(W) * H, 1e9);
  const double reach = 0.5 * style.stroke_width + 1.0;
  for (const auto& stroke : t.strokes) {
    const auto poly = catmull_rom(stroke);
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
      const Point& a = poly[i];
      const Point& b = poly[i + 1];
      const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.first, b.first) - reach)));
      const int c1 = std::min(W - 1, static_cast<int>(std::ceil(std::max(a.first, b.first) + reach)));
      const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.second, b.second) - reach)));
      const int r1 = std::min(H - 1, static_cast<int>(std::ceil(std::max(a.second, b.second) + reach)));
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
          double& d = dist[static_cast<std::size_t>(r) * W + c];
          d = std::min(d, segment_distance(c, r, a, b));
        }
    }
  }
  GrayImage img(W, H, style.background_level);
  const double contrast = static_cast<double>(style.background_level) - style.ink_level;
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      const double cover =
          std::clamp(0.5 * style.stroke_width + 0.5 - dist[static_cast<std::size_t>(r) * W + c], 0.0, 1.0);
      img(r, c) = static_cast<std::uint8_t>(std::lround(style.background_level - cover * contrast));
    }
  return img;
}

Dataset synth_generate(int n_writers, SynthCounts counts, const SynthStyle& style,
                       std::uint64_t seed) {
  if (n_writers < 1 || counts.genuine < 1 || counts.forgery < 1)
    throw Error("synth: writer and sample counts must be >= 1");
  Dataset data;
  const double forgery_sigma =
      std::hypot(style.genuine_jitter, style.forgery_distortion);
  for (int w = 0; w < n_writers; ++w) {
    WriterImages wi;
    char id[16];
    std::snprintf(id, sizeof id, "w%03d", w);
    wi.id = id;
    const auto uw = static_cast<std::uint64_t>(w);
    const StrokeTemplate tmpl = synth_template(style, derive_seed(seed, {uw, 0}));
    for (int g = 0; g < counts.genuine; ++g)
      wi.genuine.push_back(render_strokes(
          perturb(tmpl, style.genuine_jitter, style, derive_seed(seed, {uw, 1, static_cast<std::uint64_t>(g)})),
          style));
    for (int f = 0; f < counts.forgery; ++f)
      wi.skilled.push_back(render_strokes(
          perturb(tmpl, forgery_sigma, style, derive_seed(seed, {uw, 2, static_cast<std::uint64_t>(f)})),
          style));
    data.writers.push_back(std::move(wi));
  }
  return data;
}

DatasetLayout write_dataset(const Dataset& data, const fs::path& root) {
  DatasetLayout layout{root, {}};
  for (const auto& w : data.writers) {
    const fs::path dir = root / w.id;
    fs::create_directories(dir);
    WriterSamples ws{w.id, {}, {}};
    char name[32];
    for (std::size_t i = 0; i < w.genuine.size(); ++i) {
      std::snprintf(name, sizeof name, "g_%02zu.pgm", i);
      save_pgm(dir / name, w.genuine[i]);
      ws.genuine.push_back(dir / name);
    }
    for (std::size_t i = 0; i < w.skilled.size(); ++i) {
      std::snprintf(name, sizeof name, "f_%02zu.pgm", i);
      save_pgm(dir / name, w.skilled[i]);
      ws.skilled.push_back(dir / name);
    }
    layout.writers.push_back(std::move(ws));
  }
  write_manifest(layout);
  return layout;
}

void write_manifest(const DatasetLayout& layout) {
  nlohmann::json j;
  j["writers"] = nlohmann::json::array();
  for (const auto& w : layout.writers) {
    nlohmann::json e;
    e["id"] = w.id;
    e["genuine"] = nlohmann::json::array();
    e["skilled"] = nlohmann::json::array();
    for (const auto& p : w.genuine) e["genuine"].push_back(fs::relative(p, layout.root).generic_string());
    for (const auto& p : w.skilled) e["skilled"].push_back(fs::relative(p, layout.root).generic_string());
    j["writers"].push_back(e);
  }
  std::ofstream out(layout.root / "manifest.json");
  if (!out) throw Error("cannot write manifest in " + layout.root.string());
  out << j.dump(2) << '\n';
}

DatasetLayout load_layout(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("dataset root is not a directory: " + root.string());
  DatasetLayout layout{root, {}};
  const fs::path manifest = root / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
      in >> j;
      for (const auto& e : j.at("writers")) {
        WriterSamples ws{e.at("id").get<std::string>(), {}, {}};
        for (const auto& p : e.at("genuine")) ws.genuine.push_back(root / p.get<std::string>());
        for (const auto& p : e.at("skilled")) ws.skilled.push_back(root / p.get<std::string>());
        layout.writers.push_back(std::move(ws));
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error("bad manifest " + manifest.string() + ": " + ex.what());
    }
    return layout;
  }
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    WriterSamples ws{d.filename().string(), {}, {}};
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_regular_file() && is_image(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto name = f.filename().string();
      if (name.rfind("g_", 0) == 0) ws.genuine.push_back(f);
      else if (name.rfind("f_", 0) == 0) ws.skilled.push_back(f);
    }
    if (!ws.genuine.empty() || !ws.skilled.empty()) layout.writers.push_back(std::move(ws));
  }
  if (layout.writers.empty()) throw Error("no writers found under " + root.string());
  return layout;
}

DatasetLayout load_cedar_layout(const fs::path& root) {
  const std::regex pat(R"((original|forgeries)_(\d+)_(\d+)\.png)", std::regex::icase);
  std::map<int, WriterSamples> by_writer;
  std::map<int, std::map<int, fs::path>> gen, forg;
  for (const char* sub : {"full_org", "full_forg"}) {
    const fs::path dir = root / sub;
    if (!fs::is_directory(dir)) throw Error("CEDAR layout: missing " + dir.string());
    for (const auto& e : fs::directory_iterator(dir)) {
      std::smatch m;
      const std::string name = e.path().filename().string();
      if (!std::regex_match(name, m, pat)) continue;
      const int w = std::stoi(m[2]);
      const int i = std::stoi(m[3]);
      (std::tolower(static_cast<unsigned char>(m[1].str()[0])) == 'o' ? gen : forg)[w][i] = e.path();
    }
  }
  DatasetLayout layout{root, {}};
  std::map<int, int> writers;
  for (const auto& [w, _] : gen) writers[w] = 1;
  for (const auto& [w, _] : forg) writers[w] = 1;
  for (const auto& [w, _] : writers) {
    char id[16];
    std::snprintf(id, sizeof id, "w%03d", w);
    WriterSamples ws{id, {}, {}};
    for (const auto& [i, p] : gen[w]) ws.genuine.push_back(p);
    for (const auto& [i, p] : forg[w]) ws.skilled.push_back(p);
    layout.writers.push_back(std::move(ws));
  }
  if (layout.writers.empty()) throw Error("CEDAR layout: no images under " + root.string());
  return layout;
}

Dataset load_dataset(const DatasetLayout& layout) {
  Dataset data;
  for (const auto& w : layout.writers) {
    WriterImages wi{w.id, {}, {}};
    for (const auto& p : w.genuine) wi.genuine.push_back(load_image(p));
    for (const auto& p : w.skilled) wi.skilled.push_back(load_image(p));
    data.writers.push_back(std::move(wi));
  }
  return data;
}

}  // namespace sigsparse
