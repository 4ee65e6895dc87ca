#pragma once

#include <cstdint>
#include <vector>

namespace sigsparse {

/// Pixel coordinate, (row, col) with row 0 at the top.
struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// 8-bit grayscale raster, row-major. Convention: 0 is black (ink), 255 white.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 255);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  std::uint8_t operator()(int row, int col) const { return data_[index(row, col)]; }
  std::uint8_t& operator()(int row, int col) { return data_[index(row, col)]; }
  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Binary raster; a nonzero cell is an ink (signature) pixel.
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height);
  BinaryImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  bool operator()(int row, int col) const { return data_[index(row, col)] != 0; }
  void set(int row, int col, bool ink) { data_[index(row, col)] = ink ? 1 : 0; }
  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  /// Out-of-image reads return background.
  bool at_or_background(int row, int col) const {
    return contains(row, col) && (*this)(row, col);
  }

  std::size_t ink_count() const;
  /// Ink pixels in row-major scan order.
  std::vector<Pixel> ink_pixels() const;

  const std::vector<std::uint8_t>& data() const { return data_; }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;  // 0 or 1
};

/// A thinned binary image together with the number of thinning passes that
/// produced it.
struct SkeletonImage {
  BinaryImage image;
  int thin_level = 0;
  /// True when one more thinning pass would leave the image unchanged.
  bool idempotent = false;
};

/// Number of 8-connected ink components.
int count_components8(const BinaryImage& img);

}  // namespace sigsparse
