#include "sigsparse/image.hpp"

#include <queue>

#include "sigsparse/error.hpp"

namespace sigsparse {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) throw Error("image dimensions must be >= 1");
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("gray image data length does not match width*height");
}

BinaryImage::BinaryImage(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("binary image data length does not match width*height");
  for (auto& v : data_) v = v ? 1 : 0;
}

std::size_t BinaryImage::ink_count() const {
  std::size_t n = 0;
  for (auto v : data_) n += v;
  return n;
}

std::vector<Pixel> BinaryImage::ink_pixels() const {
  std::vector<Pixel> out;
  out.reserve(ink_count());
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c)
      if ((*this)(r, c)) out.push_back({r, c});
  return out;
}

int count_components8(const BinaryImage& img) {
  if (img.empty()) return 0;
  const int w = img.width();
  const int h = img.height();
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
  int components = 0;
  std::queue<Pixel> queue;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!img(r, c) || seen[static_cast<std::size_t>(r) * w + c]) continue;
      ++components;
      seen[static_cast<std::size_t>(r) * w + c] = 1;
      queue.push({r, c});
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop();
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = p.row + dr;
            const int cc = p.col + dc;
            if (!img.at_or_background(rr, cc)) continue;
            auto& s = seen[static_cast<std::size_t>(rr) * w + cc];
            if (s) continue;
            s = 1;
            queue.push({rr, cc});
          }
        }
      }
    }
  }
  return components;
}

}  // namespace sigsparse
