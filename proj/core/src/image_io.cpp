#include "sigsparse/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "sigsparse/error.hpp"

#ifdef SIGSPARSE_HAVE_PNG
#include <png.h>
#endif

namespace sigsparse {

namespace {

// Reads the next whitespace-delimited PNM header token, skipping comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string discard;
      std::getline(in, discard);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

int parse_int(const std::string& tok, const char* what) {
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw Error(std::string("malformed PGM header field: ") + what);
  }
}

GrayImage load_pgm(std::istream& in) {
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") throw Error("not a PGM file (expected P5 or P2)");
  const int width = parse_int(next_token(in), "width");
  const int height = parse_int(next_token(in), "height");
  const int maxval = parse_int(next_token(in), "maxval");
  if (maxval < 1 || maxval > 65535) throw Error("PGM maxval out of range");
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::uint8_t> data(count);
  auto rescale = [maxval](int v) {
    return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  };
  if (magic == "P2") {
    for (std::size_t i = 0; i < count; ++i) data[i] = rescale(parse_int(next_token(in), "pixel"));
  } else if (maxval < 256) {
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) throw Error("truncated PGM data");
    if (maxval != 255)
      for (auto& v : data) v = rescale(v);
  } else {
    std::vector<unsigned char> raw(count * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw Error("truncated PGM data");
    for (std::size_t i = 0; i < count; ++i) data[i] = rescale(raw[2 * i] << 8 | raw[2 * i + 1]);
  }
  return GrayImage(width, height, std::move(data));
}

#ifdef SIGSPARSE_HAVE_PNG
GrayImage load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw Error("cannot read PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(data));
}
#endif

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  static constexpr unsigned char kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return in.gcount() == 8 && std::equal(sig, sig + 8, kPng);
}

}  // namespace

bool png_supported() {
#ifdef SIGSPARSE_HAVE_PNG
  return true;
#else
  return false;
#endif
}

GrayImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("image not found: " + path.string());
  if (has_png_signature(path)) {
#ifdef SIGSPARSE_HAVE_PNG
    return load_png(path);
#else
    throw Error("PNG support not compiled in: " + path.string());
#endif
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load_pgm(in);
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            static_cast<std::streamsize>(img.data().size()));
  if (!out) throw Error("write failed: " + path.string());
}

void save_pgm(const std::filesystem::path& path, const BinaryImage& img) {
  GrayImage gray(img.width(), img.height(), 255);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      if (img(r, c)) gray(r, c) = 0;
  save_pgm(path, gray);
}

}  // namespace sigsparse
