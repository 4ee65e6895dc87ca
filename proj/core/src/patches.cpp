#include "sigsparse/patches.hpp"

#include <cstdint>
#include <fstream>

#include "sigsparse/error.hpp"
#include "sigsparse/imageproc.hpp"

namespace sigsparse {

PatchMatrix extract_patches(const GrayImage& gray, const BinaryImage& skeleton,
                            const PatchOptions& options) {
  const int ps = options.patch_size;
  if (ps < 1 || ps % 2 == 0) throw Error("extract_patches: patch size must be odd");
  if (gray.width() != skeleton.width() || gray.height() != skeleton.height())
    throw Error("extract_patches: gray and skeleton dimensions differ");

  const double background =
      options.background ? *options.background : otsu_threshold(gray).background_mean;
  const int half = ps / 2;

  PatchMatrix out;
  out.patch_size = ps;
  out.centered = options.center;
  out.locations = skeleton.ink_pixels();
  out.data.resize(ps * ps, static_cast<Eigen::Index>(out.locations.size()));

  for (std::size_t i = 0; i < out.locations.size(); ++i) {
    const Pixel p = out.locations[i];
    auto col = out.data.col(static_cast<Eigen::Index>(i));
    int k = 0;
    for (int dc = -half; dc <= half; ++dc) {
      for (int dr = -half; dr <= half; ++dr, ++k) {
        const int r = p.row + dr;
        const int c = p.col + dc;
        col(k) = gray.contains(r, c) ? static_cast<double>(gray(r, c)) : background;
      }
    }
    if (options.center) col.array() -= col.mean();
  }
  return out;
}

PatchMatrix concat_patches(const std::vector<PatchMatrix>& parts) {
  PatchMatrix out;
  if (parts.empty()) return out;
  out.patch_size = parts.front().patch_size;
  out.centered = parts.front().centered;
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.patch_size != out.patch_size) throw Error("concat_patches: patch size mismatch");
    total += p.data.cols();
  }
  out.data.resize(out.patch_size * out.patch_size, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.data.middleCols(at, p.data.cols()) = p.data;
    at += p.data.cols();
    out.locations.insert(out.locations.end(), p.locations.begin(), p.locations.end());
  }
  return out;
}

void save_patch_matrix(const std::filesystem::path& path, const PatchMatrix& patches) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const std::uint64_t n = static_cast<std::uint64_t>(patches.n());
  const std::uint64_t m = static_cast<std::uint64_t>(patches.M());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&m), sizeof m);
  out.write(reinterpret_cast<const char*>(patches.data.data()),
            static_cast<std::streamsize>(n * m * sizeof(double)));
}

PatchMatrix load_patch_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  if (!in || n == 0 || n > 4096) throw Error("bad patch matrix header");
  PatchMatrix out;
  out.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  in.read(reinterpret_cast<char*>(out.data.data()),
          static_cast<std::streamsize>(n * m * sizeof(double)));
  if (!in) throw Error("truncated patch matrix");
  int ps = 1;
  while (ps * ps < static_cast<int>(n)) ++ps;
  out.patch_size = ps;
  return out;
}

}  // namespace sigsparse
