#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "sigsparse/error.hpp"
#include "sigsparse/patches.hpp"

using namespace sigsparse;

TEST(Patches, HandUnrolledCentreWindow) {
  GrayImage gray(5, 5);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) gray(r, c) = static_cast<std::uint8_t>(10 * r + c);
  BinaryImage skel(5, 5);
  skel.set(2, 2, true);
  const auto P = extract_patches(gray, skel, {5, false, std::nullopt});
  ASSERT_EQ(P.n(), 25);
  ASSERT_EQ(P.M(), 1);
  // Column by column: (0,0),(1,0),...,(4,0),(0,1),...
  const double expected[25] = {0, 10, 20, 30, 40, 1, 11, 21, 31, 41, 2, 12, 22, 32, 42,
                               3, 13, 23, 33, 43, 4, 14, 24, 34, 44};
  for (int k = 0; k < 25; ++k) EXPECT_EQ(P.data(k, 0), expected[k]);
}

TEST(Patches, BorderCellsUseBackground) {
  GrayImage gray(3, 3, 7);
  BinaryImage skel(3, 3);
  skel.set(0, 0, true);
  const auto P = extract_patches(gray, skel, {3, false, 99.0});
  EXPECT_EQ(P.data(0, 0), 99.0);  // (-1,-1)
  EXPECT_EQ(P.data(4, 0), 7.0);   // centre
  EXPECT_EQ(P.data(8, 0), 7.0);   // (1,1)
}

TEST(Patches, DefaultBackgroundIsLightOtsuMean) {
  GrayImage gray(4, 4, 220);
  gray(1, 1) = 20;
  BinaryImage skel(4, 4);
  skel.set(0, 0, true);
  const auto P = extract_patches(gray, skel, {3, false, std::nullopt});
  EXPECT_DOUBLE_EQ(P.data(0, 0), 220.0);
}

TEST(Patches, CenteredColumnsHaveZeroMean) {
  std::mt19937_64 rng(2);
  const auto gray = oracle::random_gray(20, 20, rng);
  const auto skel = oracle::random_skeleton(20, 20, 60, rng);
  const auto P = extract_patches(gray, skel);
  ASSERT_EQ(static_cast<std::size_t>(P.M()), skel.ink_count());
  EXPECT_TRUE(P.centered);
  for (int j = 0; j < P.M(); ++j) EXPECT_NEAR(P.data.col(j).mean(), 0.0, 1e-10);
  EXPECT_EQ(P.locations, skel.ink_pixels());
}

TEST(Patches, EmptySkeletonGivesNoColumns) {
  const auto P = extract_patches(GrayImage(5, 5), BinaryImage(5, 5));
  EXPECT_TRUE(P.empty());
  EXPECT_EQ(P.n(), 25);
}

TEST(Patches, Errors) {
  EXPECT_THROW(extract_patches(GrayImage(5, 5), BinaryImage(5, 5), {4, true, std::nullopt}), Error);
  EXPECT_THROW(extract_patches(GrayImage(5, 5), BinaryImage(6, 5)), Error);
}

TEST(Patches, ConcatKeepsOrder) {
  std::mt19937_64 rng(4);
  const auto gray = oracle::random_gray(12, 12, rng);
  const auto a = extract_patches(gray, oracle::random_skeleton(12, 12, 10, rng));
  const auto b = extract_patches(gray, oracle::random_skeleton(12, 12, 10, rng));
  const auto ab = concat_patches({a, b});
  EXPECT_EQ(ab.M(), a.M() + b.M());
  EXPECT_EQ(ab.data.leftCols(a.M()), a.data);
  EXPECT_EQ(ab.data.rightCols(b.M()), b.data);
}

TEST(Patches, DebugDumpRoundTrip) {
  std::filesystem::create_directories(SIGSPARSE_TEST_TMP);
  const auto path = std::filesystem::path(SIGSPARSE_TEST_TMP) / "patches.bin";
  std::mt19937_64 rng(8);
  const auto P = extract_patches(oracle::random_gray(15, 15, rng), oracle::random_skeleton(15, 15, 30, rng));
  save_patch_matrix(path, P);
  EXPECT_EQ(std::filesystem::file_size(path), 16 + 8 * static_cast<std::uintmax_t>(P.data.size()));
  const auto Q = load_patch_matrix(path);
  EXPECT_EQ(Q.data, P.data);
  EXPECT_EQ(Q.patch_size, 5);
}

TEST(Patches, TruncatedDumpThrows) {
  const auto path = std::filesystem::path(SIGSPARSE_TEST_TMP) / "short.bin";
  std::filesystem::create_directories(SIGSPARSE_TEST_TMP);
  std::ofstream(path, std::ios::binary) << "abc";
  EXPECT_THROW(load_patch_matrix(path), Error);
}
