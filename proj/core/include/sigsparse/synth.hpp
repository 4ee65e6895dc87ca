#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sigsparse/image.hpp"

namespace sigsparse {

/// Samples of one writer, by file path.
struct WriterSamples {
  std::string id;
  std::vector<std::filesystem::path> genuine;
  std::vector<std::filesystem::path> skilled;
};

/// On-disk dataset: <root>/<writer>/g_*.{pgm,png} are genuine signatures and
/// <root>/<writer>/f_*.{pgm,png} skilled forgeries. A manifest.json at the
/// root, when present, lists writers and files explicitly.
struct DatasetLayout {
  std::filesystem::path root;
  std::vector<WriterSamples> writers;
};

DatasetLayout load_layout(const std::filesystem::path& root);
void write_manifest(const DatasetLayout& layout);

/// CEDAR-style folder pair: full_org/original_<w>_<i>.png and
/// full_forg/forgeries_<w>_<i>.png.
DatasetLayout load_cedar_layout(const std::filesystem::path& root);

struct WriterImages {
  std::string id;
  std::vector<GrayImage> genuine;
  std::vector<GrayImage> skilled;
};

struct Dataset {
  std::vector<WriterImages> writers;
};

Dataset load_dataset(const DatasetLayout& layout);

struct SynthStyle {
  int width = 200;
  int height = 90;
  double stroke_width = 3.0;
  /// Control points of the main stroke; a second, shorter flourish is added.
  int control_points = 10;
  /// Per-control-point displacement (pixels, standard deviation).
  double genuine_jitter = 1.2;
  double forgery_distortion = 5.0;
  /// Whole-signature rotation (degrees) and relative scale spread.
  double rotation_jitter = 2.0;
  double scale_jitter = 0.03;
  std::uint8_t ink_level = 30;
  std::uint8_t background_level = 245;
};

struct SynthCounts {
  int genuine = 8;
  int forgery = 8;
};

/// Control-point template of one writer: strokes of (x, y) points.
struct StrokeTemplate {
  std::vector<std::vector<std::pair<double, double>>> strokes;
};

StrokeTemplate synth_template(const SynthStyle& style, std::uint64_t seed);

/// Catmull-Rom strokes through the template points, rendered with an
/// anti-aliased round pen.
GrayImage render_strokes(const StrokeTemplate& t, const SynthStyle& style);

/// Displaces every control point by N(0, sigma) and applies a small random
/// rotation/scale about the canvas centre.
StrokeTemplate perturb(const StrokeTemplate& t, double sigma, const SynthStyle& style,
                       std::uint64_t seed);

/// Writers "w000", "w001", ...; genuines are jittered renderings of the
/// writer template and forgeries redraw it with forgery_distortion.
Dataset synth_generate(int n_writers, SynthCounts counts, const SynthStyle& style,
                       std::uint64_t seed);

/// Writes a generated dataset as PGM files plus manifest.json.
DatasetLayout write_dataset(const Dataset& data, const std::filesystem::path& root);

}  // namespace sigsparse
