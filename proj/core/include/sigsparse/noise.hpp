#pragma once

#include <cstdint>
#include <string>

#include "sigsparse/image.hpp"

namespace sigsparse {

/// Noise model applied to intensities scaled to [0, 1].
struct NoiseSpec {
  enum class Kind : std::uint8_t { None, SaltPepper, Gaussian };
  Kind kind = Kind::None;
  /// Salt-and-pepper: fraction of pixels replaced by 0 or 255.
  double density = 0.0;
  /// Gaussian: mean and variance of the additive term.
  double mean = 0.0;
  double variance = 0.0;

  void validate() const;
  /// "none", "salt-pepper:0.01", "gaussian:0:0.01".
  std::string to_string() const;
  static NoiseSpec parse(const std::string& s);
};

GrayImage add_noise(const GrayImage& img, const NoiseSpec& spec, std::uint64_t seed);

/// Median over a window x window neighbourhood; at the border the window is
/// clipped to the image. Even-sized clipped windows take the lower median.
GrayImage median_filter(const GrayImage& img, int window = 3);

}  // namespace sigsparse
