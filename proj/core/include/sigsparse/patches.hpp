#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

#include "sigsparse/image.hpp"

namespace sigsparse {

/// Dense gray-value patches sampled at every skeleton pixel.
/// Column i holds the patch centred at locations[i]; within a patch the
/// window is unrolled column by column (top to bottom, then left to right).
struct PatchMatrix {
  int patch_size = 5;
  Eigen::MatrixXd data;          // n x M, n = patch_size^2
  std::vector<Pixel> locations;  // row-major scan order of the skeleton
  bool centered = false;

  int n() const { return static_cast<int>(data.rows()); }
  int M() const { return static_cast<int>(data.cols()); }
  bool empty() const { return data.cols() == 0; }
};

struct PatchOptions {
  int patch_size = 5;
  bool center = true;
  /// Fill value for window cells outside the image. Defaults to the mean of
  /// the light Otsu class of the gray image.
  std::optional<double> background;
};

/// One column per skeleton ink pixel. An empty skeleton gives M = 0.
PatchMatrix extract_patches(const GrayImage& gray, const BinaryImage& skeleton,
                            const PatchOptions& options = {});

/// Concatenates patch matrices column-wise (locations are kept per column).
PatchMatrix concat_patches(const std::vector<PatchMatrix>& parts);

/// Debug dump: uint64 n, uint64 M, then n*M little-endian float64 values in
/// column-major order.
void save_patch_matrix(const std::filesystem::path& path, const PatchMatrix& patches);
PatchMatrix load_patch_matrix(const std::filesystem::path& path);

}  // namespace sigsparse
