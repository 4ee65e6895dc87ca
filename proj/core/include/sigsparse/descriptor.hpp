#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sigsparse/dictionary.hpp"
#include "sigsparse/image.hpp"
#include "sigsparse/keypoints.hpp"

namespace sigsparse {

/// Per-atom aggregation of sparse codes over a set of columns:
///   F1 mean, F2 max, F3 sample standard deviation (divisor M-1),
///   F4 row sums over the grand total, F5 l2-normalised row sums.
enum class Pooling : std::uint8_t { F1 = 1, F2 = 2, F3 = 3, F4 = 4, F5 = 5 };

const char* to_string(Pooling f);
Pooling pooling_from_string(const std::string& s);

struct PooledVector {
  Eigen::VectorXd values;
  /// Set when the region could not be pooled (empty region, a single column
  /// under F3, zero total under F4, zero norm under F5); values are zero.
  bool degenerate = false;
};

PooledVector pool(const SparseCodes& codes, std::span<const int> columns, Pooling f);
PooledVector pool(const SparseCodes& codes, Pooling f);

enum class SplitOrder : std::uint8_t { ColumnsThenRows, RowsThenColumns };

/// Equimass beta x beta partition of the skeleton ink pixels.
/// Pixels are ranked along the first axis (ties by the other coordinate) and
/// cut into beta strips whose sizes differ by at most one; each strip is then
/// ranked along the second axis and cut the same way. Lower-index pieces take
/// the extra pixel when the count does not divide evenly.
struct SegmentMap {
  int beta = 1;
  SplitOrder order = SplitOrder::ColumnsThenRows;
  /// Segment id (strip * beta + band) per ink pixel, row-major pixel order.
  std::vector<int> segment_of;

  int segments() const { return beta * beta; }
  std::vector<int> masses() const;
};

SegmentMap equimass_segment(const BinaryImage& skeleton, int beta,
                            SplitOrder order = SplitOrder::ColumnsThenRows);

/// Concatenated pooled blocks, each of length K:
///   [ global | segment 0 .. segment beta^2-1 | keypoint region ].
struct SignatureDescriptor {
  Eigen::VectorXd values;
  Pooling pooling = Pooling::F3;
  int beta = 2;
  int K = 0;
  /// One flag per block, same order as the layout.
  std::vector<std::uint8_t> degenerate_blocks;

  int blocks() const { return beta * beta + 2; }
  Eigen::VectorXd block(int b) const { return values.segment(static_cast<Eigen::Index>(b) * K, K); }
};

/// `locations` gives the skeleton pixel of every code column (row-major scan
/// order, as produced by extract_patches). Keypoint pooling uses the unique
/// assigned pixels; pass nullptr for no keypoint region.
SignatureDescriptor build_descriptor(const SparseCodes& codes, std::span<const Pixel> locations,
                                     const SegmentMap& segments, const KeypointSet* keypoints,
                                     Pooling f);

/// JSON: {"pooling_tag": "F3", "beta": 2, "K": 60, "values": [...]}.
void save_descriptor_json(const std::filesystem::path& path, const SignatureDescriptor& d);
SignatureDescriptor load_descriptor_json(const std::filesystem::path& path);

// Packed binary: char[8] "SGSPDESC", uint32 version (1), uint32 pooling
// (1..5), uint32 beta, uint32 K, uint64 length, float64 values[length].
void save_descriptor_binary(const std::filesystem::path& path, const SignatureDescriptor& d);
SignatureDescriptor load_descriptor_binary(const std::filesystem::path& path);

}  // namespace sigsparse
