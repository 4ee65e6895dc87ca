#include "sigsparse/keypoints.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "sigsparse/error.hpp"

namespace sigsparse {

namespace {

constexpr std::array<int, 16> kCircleDr = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};
constexpr std::array<int, 16> kCircleDc = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};

GrayImage downsample(const GrayImage& img) {
  const int w = std::max(1, img.width() / 2);
  const int h = std::max(1, img.height() / 2);
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int sum = 0;
      int n = 0;
      for (int dr = 0; dr < 2; ++dr)
        for (int dc = 0; dc < 2; ++dc)
          if (img.contains(2 * r + dr, 2 * c + dc)) {
            sum += img(2 * r + dr, 2 * c + dc);
            ++n;
          }
      out(r, c) = static_cast<std::uint8_t>((sum + n / 2) / n);
    }
  }
  return out;
}

std::vector<Keypoint> detect_octave(const GrayImage& img, const KeypointOptions& opt, int octave) {
  const int w = img.width();
  const int h = img.height();
  std::vector<double> resp(static_cast<std::size_t>(w) * h, 0.0);
  for (int r = 3; r < h - 3; ++r)
    for (int c = 3; c < w - 3; ++c)
      resp[static_cast<std::size_t>(r) * w + c] =
          segment_test_response(img, r, c, opt.threshold, opt.arc_length);

  std::vector<Keypoint> out;
  const int scale = 1 << octave;
  for (int r = 3; r < h - 3; ++r) {
    for (int c = 3; c < w - 3; ++c) {
      const double v = resp[static_cast<std::size_t>(r) * w + c];
      if (v <= 0.0) continue;
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dc = -1; dc <= 1 && is_max; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const double q = resp[static_cast<std::size_t>(r + dr) * w + (c + dc)];
          const bool earlier = dr < 0 || (dr == 0 && dc < 0);
          // Plateaus keep their row-major first member.
          if (q > v || (q == v && earlier)) is_max = false;
        }
      }
      if (!is_max) continue;
      out.push_back({r * scale + scale / 2 * (octave > 0), c * scale + scale / 2 * (octave > 0), v,
                     octave});
    }
  }
  return out;
}

bool response_order(const Keypoint& a, const Keypoint& b) {
  if (a.response != b.response) return a.response > b.response;
  if (a.row != b.row) return a.row < b.row;
  if (a.col != b.col) return a.col < b.col;
  return a.octave < b.octave;
}

}  // namespace

double segment_test_response(const GrayImage& img, int row, int col, int threshold,
                             int arc_length) {
  if (row < 3 || col < 3 || row >= img.height() - 3 || col >= img.width() - 3) return 0.0;
  const int center = img(row, col);
  std::array<int, 16> label{};
  std::array<int, 16> diff{};
  for (int k = 0; k < 16; ++k) {
    const int v = img(row + kCircleDr[k], col + kCircleDc[k]);
    diff[k] = v - center;
    label[k] = diff[k] > threshold ? 1 : (diff[k] < -threshold ? -1 : 0);
  }
  double best = 0.0;
  for (int side : {1, -1}) {
    int run = 0;
    int longest = 0;
    for (int k = 0; k < 32; ++k) {
      run = label[k % 16] == side ? run + 1 : 0;
      longest = std::max(longest, std::min(run, 16));
    }
    if (longest < arc_length) continue;
    double score = 0.0;
    for (int k = 0; k < 16; ++k)
      if (label[k] == side) score += std::abs(diff[k]) - threshold;
    best = std::max(best, score);
  }
  return best;
}

std::vector<Keypoint> detect_keypoints(const GrayImage& img, const KeypointOptions& opt) {
  if (img.empty()) throw Error("detect_keypoints: empty image");
  std::vector<Keypoint> candidates;
  GrayImage level = img;
  for (int o = 0; o < std::max(1, opt.octaves); ++o) {
    if (level.width() < 7 || level.height() < 7) break;
    auto found = detect_octave(level, opt, o);
    candidates.insert(candidates.end(), found.begin(), found.end());
    level = downsample(level);
  }
  std::sort(candidates.begin(), candidates.end(), response_order);

  std::vector<Keypoint> kept;
  for (const auto& cand : candidates) {
    const double radius = opt.suppression_radius * (1 << cand.octave);
    bool suppressed = false;
    for (const auto& k : kept) {
      const double dr = k.row - cand.row;
      const double dc = k.col - cand.col;
      const double r = std::max(radius, opt.suppression_radius * (1 << k.octave));
      if (dr * dr + dc * dc <= r * r) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  if (static_cast<int>(kept.size()) > opt.max_points) kept.resize(static_cast<std::size_t>(opt.max_points));
  return kept;
}

KeypointSet assign_to_skeleton(std::span<const Keypoint> points, const BinaryImage& skel) {
  if (skel.empty() || skel.ink_count() == 0) throw Error("assign_to_skeleton: empty skeleton");
  KeypointSet out;
  out.points.assign(points.begin(), points.end());
  out.assigned.reserve(points.size());
  const int h = skel.height();
  const int w = skel.width();
  const int max_ring = std::max(h, w);

  for (const auto& kp : points) {
    long best_d2 = -1;
    Pixel best{};
    auto visit = [&](int r, int c) {
      if (!skel.contains(r, c) || !skel(r, c)) return;
      const long d2 = static_cast<long>(r - kp.row) * (r - kp.row) +
                      static_cast<long>(c - kp.col) * (c - kp.col);
      const Pixel p{r, c};
      if (best_d2 < 0 || d2 < best_d2 || (d2 == best_d2 && p < best)) {
        best_d2 = d2;
        best = p;
      }
    };
    // Square rings of growing Chebyshev radius around the keypoint. Once the
    // best squared distance is below (R+1)^2 no outer ring can match or tie.
    const int far = max_ring + std::abs(kp.row) + std::abs(kp.col);
    for (int R = 0; R <= far; ++R) {
      if (R == 0) {
        visit(kp.row, kp.col);
      } else {
        for (int c = kp.col - R; c <= kp.col + R; ++c) {
          visit(kp.row - R, c);
          visit(kp.row + R, c);
        }
        for (int r = kp.row - R + 1; r <= kp.row + R - 1; ++r) {
          visit(r, kp.col - R);
          visit(r, kp.col + R);
        }
      }
      if (best_d2 >= 0 && best_d2 < static_cast<long>(R + 1) * (R + 1)) break;
    }
    out.assigned.push_back(best);
  }
  return out;
}

}  // namespace sigsparse
