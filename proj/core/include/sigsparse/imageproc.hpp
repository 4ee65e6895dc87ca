#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sigsparse/image.hpp"

namespace sigsparse {

struct OtsuResult {
  BinaryImage binary;
  /// Gray levels <= threshold are ink. -1 for a degenerate (uniform) input.
  int threshold = -1;
  /// Uniform image: no between-class variance, no ink reported.
  bool degenerate = false;
  /// Mean gray level of the light (background) class.
  double background_mean = 255.0;
  double ink_mean = 0.0;
};

/// Otsu binarization over the 256-bin histogram. Dark pixels are ink.
/// Among equally good cuts the smallest threshold wins.
OtsuResult otsu_threshold(const GrayImage& img);

/// Returns the image inverted when the dark Otsu class outnumbers the light
/// one, i.e. when the input looks like light ink on a dark background.
GrayImage normalize_polarity(const GrayImage& img, bool* inverted = nullptr);

// Thinning
//
// One pass of thin_once runs four directional sub-iterations in the order
// north, south, east, west. In the sub-iteration for direction d an ink pixel
// p is removed iff, evaluated on the image as it was at the start of that
// sub-iteration:
//   (a) the d-neighbour of p is background (p is a d-border point),
//   (b) p has at least two ink 8-neighbours (end points and isolated points
//       are kept),
//   (c) the 8-connectivity number of p is exactly one (p is simple):
//         C8(p) = sum_{k in 1,3,5,7} ( ~x_k - ~x_k * ~x_{k+1} * ~x_{k+2} )
//       with x_1..x_8 = E, NE, N, NW, W, SW, S, SE, x_9 = x_1 and ~x = 1 - x.
// All removals of one sub-iteration are applied simultaneously. Deleting
// simple, non-end border points of a single direction in parallel preserves
// the 8-connected topology of the ink set.

enum class ThinDirection : std::uint8_t { North = 0, South = 1, East = 2, West = 3 };

/// Neighbourhood code of (row, col): bit k-1 holds x_k in the ordering above.
std::uint8_t neighbourhood_code(const BinaryImage& img, int row, int col);

/// Deletability of a pixel with the given neighbourhood code, per direction;
/// 4 x 256 table built once from the rules above.
const std::array<std::array<bool, 256>, 4>& thinning_table();

/// 8-connectivity number C8 for a neighbourhood code.
int connectivity_number8(std::uint8_t code);

BinaryImage thin_once(const BinaryImage& img);

/// Applies thin_once `level` times, stopping early once a pass changes
/// nothing. `thin_level` records the number of passes that changed the image.
SkeletonImage thin_to_level(const BinaryImage& img, int level);

/// Mean local ink density over all ink pixels: for each ink pixel the number
/// of ink pixels in the patch_size x patch_size window around it (clipped at
/// the border) divided by patch_size^2. Throws on an image without ink.
double patch_density(const BinaryImage& img, int patch_size);
inline double patch_density(const SkeletonImage& skel, int patch_size) {
  return patch_density(skel.image, patch_size);
}

struct PatchDensityCurve {
  std::vector<double> pd;     // indexed by thinning level
  std::vector<double> diffs;  // pd[i+1] - pd[i]

  static PatchDensityCurve from_pd(std::vector<double> pd);
};

/// Level following the steepest density drop: 1 + argmin(diffs), earliest
/// level on ties; 0 when the curve has a single point.
int otl_from_curve(const PatchDensityCurve& curve);

struct OtlResult {
  int otl = 0;
  PatchDensityCurve curve;
  /// Level at which thinning became idempotent.
  int idempotent_level = 0;
  /// Already one pixel wide at level 0; otl is 0.
  bool already_thin = false;
};

OtlResult optimal_thinning_level(const BinaryImage& img, int patch_size);

/// Lower median: the element of rank floor((n-1)/2) after sorting.
int lower_median(std::vector<int> values);

/// Median of the per-image optimal thinning levels.
int motl(std::span<const BinaryImage> reference_images, int patch_size);

}  // namespace sigsparse
