#include "sigsparse/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sigsparse/error.hpp"

namespace sigsparse {

void NoiseSpec::validate() const {
  switch (kind) {
    case Kind::None:
      return;
    case Kind::SaltPepper:
      if (!(density >= 0.0 && density <= 1.0)) throw Error("noise: density must lie in [0, 1]");
      return;
    case Kind::Gaussian:
      if (!(variance >= 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
        throw Error("noise: gaussian variance must be finite and >= 0");
      return;
  }
}

std::string NoiseSpec::to_string() const {
  std::ostringstream s;
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::SaltPepper:
      s << "salt-pepper:" << density;
      break;
    case Kind::Gaussian:
      s << "gaussian:" << mean << ':' << variance;
      break;
  }
  return s.str();
}

NoiseSpec NoiseSpec::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  NoiseSpec spec;
  auto num = [&](const std::string& p) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(p, &used);
    } catch (const std::exception&) {
      throw Error("noise: bad number '" + p + "' in '" + text + "'");
    }
    if (used != p.size()) throw Error("noise: bad number '" + p + "' in '" + text + "'");
    return v;
  };
  if (parts.empty() || parts[0] == "none") {
    if (parts.size() > 1) throw Error("noise: 'none' takes no parameters");
  } else if (parts[0] == "salt-pepper" && parts.size() == 2) {
    spec.kind = Kind::SaltPepper;
    spec.density = num(parts[1]);
  } else if (parts[0] == "gaussian" && parts.size() == 3) {
    spec.kind = Kind::Gaussian;
    spec.mean = num(parts[1]);
    spec.variance = num(parts[2]);
  } else {
    throw Error("noise: cannot parse '" + text + "'");
  }
  spec.validate();
  return spec;
}

GrayImage add_noise(const GrayImage& img, const NoiseSpec& spec, std::uint64_t seed) {
  spec.validate();
  GrayImage out = img;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto& px = out.data();
  if (spec.kind == NoiseSpec::Kind::SaltPepper) {
    if (spec.density == 0.0) return out;
    for (auto& v : px) {
      if (unit(rng) < spec.density) v = unit(rng) < 0.5 ? 0 : 255;
    }
  } else if (spec.kind == NoiseSpec::Kind::Gaussian) {
    if (spec.variance == 0.0 && spec.mean == 0.0) return out;
    std::normal_distribution<double> gauss(spec.mean, std::sqrt(spec.variance));
    for (auto& v : px) {
      const double shifted = std::clamp(v / 255.0 + gauss(rng), 0.0, 1.0);
      v = static_cast<std::uint8_t>(std::lround(shifted * 255.0));
    }
  }
  return out;
}

GrayImage median_filter(const GrayImage& img, int window) {
  if (window < 1 || window % 2 == 0) throw Error("median_filter: window must be odd and >= 1");
  const int h = window / 2;
  GrayImage out(img.width(), img.height());
  std::vector<std::uint8_t> buf;
  buf.reserve(static_cast<std::size_t>(window * window));
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      buf.clear();
      for (int rr = std::max(0, r - h); rr <= std::min(img.height() - 1, r + h); ++rr)
        for (int cc = std::max(0, c - h); cc <= std::min(img.width() - 1, c + h); ++cc)
          buf.push_back(img(rr, cc));
      auto mid = buf.begin() + static_cast<std::ptrdiff_t>((buf.size() - 1) / 2);
      std::nth_element(buf.begin(), mid, buf.end());
      out(r, c) = *mid;
    }
  }
  return out;
}

}  // namespace sigsparse
