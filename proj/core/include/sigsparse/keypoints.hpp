#pragma once

#include <span>
#include <vector>

#include "sigsparse/image.hpp"

namespace sigsparse {

struct Keypoint {
  int row = 0;
  int col = 0;
  double response = 0.0;
  int octave = 0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct KeypointOptions {
  int max_points = 200;
  /// Intensity difference for a circle pixel to count as brighter/darker.
  int threshold = 20;
  /// Minimum contiguous arc on the 16-pixel circle.
  int arc_length = 9;
  int octaves = 3;
  /// Cross-octave suppression radius in octave-0 pixels, scaled by 2^octave.
  double suppression_radius = 3.0;
};

/// Segment-test response at (row, col): 0 when the pixel is not a corner,
/// otherwise the summed excess contrast of the qualifying side of the
/// radius-3 Bresenham circle. Pixels closer than 3 to the border score 0.
double segment_test_response(const GrayImage& img, int row, int col, int threshold,
                             int arc_length);

/// Multi-octave segment-test detector with 3x3 non-maximum suppression per
/// octave and greedy cross-octave suppression. Result ordered by response
/// (descending), then row-major; at most max_points entries.
std::vector<Keypoint> detect_keypoints(const GrayImage& img, const KeypointOptions& options = {});

struct KeypointSet {
  std::vector<Keypoint> points;
  /// Euclidean-nearest skeleton ink pixel per point (row-major first on ties).
  std::vector<Pixel> assigned;
};

KeypointSet assign_to_skeleton(std::span<const Keypoint> points, const BinaryImage& skeleton);

}  // namespace sigsparse
