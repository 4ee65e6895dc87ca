#include "sigsparse/imageproc.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "sigsparse/error.hpp"

namespace sigsparse {

OtsuResult otsu_threshold(const GrayImage& img) {
  if (img.empty()) throw Error("otsu_threshold: empty image");

  std::array<double, 256> hist{};
  for (auto v : img.data()) hist[v] += 1.0;
  const double total = static_cast<double>(img.size());
  double total_sum = 0.0;
  for (int g = 0; g < 256; ++g) total_sum += g * hist[g];

  OtsuResult res;
  double best = -1.0;
  double w0 = 0.0;
  double s0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    s0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = s0 / w0;
    const double mu1 = (total_sum - s0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      res.threshold = t;
      res.ink_mean = mu0;
      res.background_mean = mu1;
    }
  }

  res.binary = BinaryImage(img.width(), img.height());
  if (res.threshold < 0) {
    res.degenerate = true;
    res.background_mean = total_sum / total;
    res.ink_mean = res.background_mean;
    return res;
  }
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      if (img(r, c) <= res.threshold) res.binary.set(r, c, true);
  return res;
}

GrayImage normalize_polarity(const GrayImage& img, bool* inverted) {
  const OtsuResult otsu = otsu_threshold(img);
  const std::size_t ink = otsu.binary.ink_count();
  const bool flip = !otsu.degenerate && 2 * ink > img.size();
  if (inverted) *inverted = flip;
  if (!flip) return img;
  GrayImage out = img;
  for (auto& v : out.data()) v = static_cast<std::uint8_t>(255 - v);
  return out;
}

namespace {

constexpr int kDirectionBit[4] = {2, 6, 0, 4};  // N, S, E, W in x_1..x_8 order

// (row, col) offsets of x_1..x_8.
constexpr int kNeighbourDr[8] = {0, -1, -1, -1, 0, 1, 1, 1};
constexpr int kNeighbourDc[8] = {1, 1, 0, -1, -1, -1, 0, 1};

std::array<std::array<bool, 256>, 4> build_thinning_table() {
  std::array<std::array<bool, 256>, 4> table{};
  for (int code = 0; code < 256; ++code) {
    const auto c = static_cast<std::uint8_t>(code);
    const bool simple = connectivity_number8(c) == 1;
    const bool non_end = std::popcount(c) >= 2;
    for (int d = 0; d < 4; ++d) {
      const bool border = ((code >> kDirectionBit[d]) & 1) == 0;
      table[d][code] = border && non_end && simple;
    }
  }
  return table;
}

}  // namespace

int connectivity_number8(std::uint8_t code) {
  auto inv = [code](int k) { return 1 - ((code >> ((k - 1) % 8)) & 1); };
  int sum = 0;
  for (int k = 1; k <= 7; k += 2) sum += inv(k) - inv(k) * inv(k + 1) * inv(k + 2);
  return sum;
}

std::uint8_t neighbourhood_code(const BinaryImage& img, int row, int col) {
  std::uint8_t code = 0;
  for (int k = 0; k < 8; ++k)
    if (img.at_or_background(row + kNeighbourDr[k], col + kNeighbourDc[k]))
      code |= static_cast<std::uint8_t>(1u << k);
  return code;
}

const std::array<std::array<bool, 256>, 4>& thinning_table() {
  static const auto table = build_thinning_table();
  return table;
}

BinaryImage thin_once(const BinaryImage& img) {
  if (img.empty()) return img;
  const auto& table = thinning_table();
  BinaryImage cur = img;
  std::vector<Pixel> doomed;
  for (int d = 0; d < 4; ++d) {
    doomed.clear();
    for (int r = 0; r < cur.height(); ++r)
      for (int c = 0; c < cur.width(); ++c)
        if (cur(r, c) && table[d][neighbourhood_code(cur, r, c)]) doomed.push_back({r, c});
    for (const Pixel& p : doomed) cur.set(p.row, p.col, false);
  }
  return cur;
}

SkeletonImage thin_to_level(const BinaryImage& img, int level) {
  if (level < 0) throw Error("thin_to_level: level must be >= 0");
  SkeletonImage out{img, 0, false};
  while (out.thin_level < level) {
    BinaryImage next = thin_once(out.image);
    if (next == out.image) {
      out.idempotent = true;
      return out;
    }
    out.image = std::move(next);
    ++out.thin_level;
  }
  return out;
}

double patch_density(const BinaryImage& img, int patch_size) {
  if (patch_size < 3 || patch_size % 2 == 0)
    throw Error("patch_density: patch size must be odd and >= 3");
  if (img.empty() || img.ink_count() == 0) throw Error("patch_density: no ink pixels");

  const int w = img.width();
  const int h = img.height();
  // Summed-area table with a zero guard row/column.
  std::vector<int> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto at = [&](int r, int c) -> int& { return sat[static_cast<std::size_t>(r) * (w + 1) + c]; };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      at(r + 1, c + 1) = (img(r, c) ? 1 : 0) + at(r, c + 1) + at(r + 1, c) - at(r, c);

  const int half = patch_size / 2;
  const double norm = static_cast<double>(patch_size) * patch_size;
  double sum = 0.0;
  std::size_t n = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!img(r, c)) continue;
      const int r0 = std::max(0, r - half);
      const int r1 = std::min(h, r + half + 1);
      const int c0 = std::max(0, c - half);
      const int c1 = std::min(w, c + half + 1);
      const int count = at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0);
      sum += count / norm;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

PatchDensityCurve PatchDensityCurve::from_pd(std::vector<double> pd) {
  PatchDensityCurve curve;
  curve.pd = std::move(pd);
  for (std::size_t i = 1; i < curve.pd.size(); ++i)
    curve.diffs.push_back(curve.pd[i] - curve.pd[i - 1]);
  return curve;
}

int otl_from_curve(const PatchDensityCurve& curve) {
  if (curve.diffs.empty()) return 0;
  const auto it = std::min_element(curve.diffs.begin(), curve.diffs.end());
  return static_cast<int>(it - curve.diffs.begin()) + 1;
}

OtlResult optimal_thinning_level(const BinaryImage& img, int patch_size) {
  if (img.empty() || img.ink_count() == 0)
    throw Error("optimal_thinning_level: image has no ink");
  std::vector<double> pd;
  BinaryImage cur = img;
  pd.push_back(patch_density(cur, patch_size));
  for (;;) {
    BinaryImage next = thin_once(cur);
    if (next == cur) break;
    cur = std::move(next);
    pd.push_back(patch_density(cur, patch_size));
  }
  OtlResult res;
  res.curve = PatchDensityCurve::from_pd(std::move(pd));
  res.idempotent_level = static_cast<int>(res.curve.pd.size()) - 1;
  res.already_thin = res.idempotent_level == 0;
  res.otl = otl_from_curve(res.curve);
  return res;
}

int lower_median(std::vector<int> values) {
  if (values.empty()) throw Error("median of an empty set");
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

int motl(std::span<const BinaryImage> reference_images, int patch_size) {
  if (reference_images.empty()) throw Error("motl: no reference images");
  std::vector<int> levels;
  levels.reserve(reference_images.size());
  for (const auto& img : reference_images)
    levels.push_back(optimal_thinning_level(img, patch_size).otl);
  return lower_median(std::move(levels));
}

}  // namespace sigsparse
