#pragma once

#include <filesystem>

#include "sigsparse/image.hpp"

namespace sigsparse {

/// Loads an 8-bit grayscale image. Binary PGM (P5), ASCII PGM (P2) and, when
/// built with libpng, PNG are accepted. Colour PNGs are converted to luma.
GrayImage load_image(const std::filesystem::path& path);

/// Writes binary PGM (P5).
void save_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Writes a binary image as PGM with ink black (0) on white (255).
void save_pgm(const std::filesystem::path& path, const BinaryImage& img);

bool png_supported();

}  // namespace sigsparse
