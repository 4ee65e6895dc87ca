#include "sigsparse/descriptor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "sigsparse/error.hpp"

namespace sigsparse {

const char* to_string(Pooling f) {
  switch (f) {
    case Pooling::F1: return "F1";
    case Pooling::F2: return "F2";
    case Pooling::F3: return "F3";
    case Pooling::F4: return "F4";
    case Pooling::F5: return "F5";
  }
  return "F3";
}

Pooling pooling_from_string(const std::string& s) {
  if (s.size() == 2 && (s[0] == 'f' || s[0] == 'F') && s[1] >= '1' && s[1] <= '5')
    return static_cast<Pooling>(s[1] - '0');
  throw Error("unknown pooling function: " + s);
}

PooledVector pool(const SparseCodes& codes, std::span<const int> columns, Pooling f) {
  const int K = codes.K();
  PooledVector out{Eigen::VectorXd::Zero(K), false};
  const auto M = static_cast<double>(columns.size());
  if (columns.empty() || (f == Pooling::F3 && columns.size() < 2)) {
    out.degenerate = true;
    return out;
  }

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd maxv = Eigen::VectorXd::Constant(K, -std::numeric_limits<double>::infinity());
  Eigen::VectorXi nnz = Eigen::VectorXi::Zero(K);
  for (int c : columns) {
    if (c < 0 || c >= codes.M()) throw Error("pool: column index out of range");
    for (Eigen::SparseMatrix<double>::InnerIterator it(codes.A, c); it; ++it) {
      sum(it.row()) += it.value();
      maxv(it.row()) = std::max(maxv(it.row()), it.value());
      ++nnz(it.row());
    }
  }

  switch (f) {
    case Pooling::F1:
      out.values = sum / M;
      break;
    case Pooling::F2:
      for (int j = 0; j < K; ++j)
        out.values(j) = nnz(j) < static_cast<int>(columns.size()) ? std::max(maxv(j), 0.0)
                                                                   : maxv(j);
      break;
    case Pooling::F3: {
      // Shifted-data variance; the shift is the region's first column.
      Eigen::VectorXd shift = Eigen::VectorXd::Zero(K);
      for (Eigen::SparseMatrix<double>::InnerIterator it(codes.A, columns.front()); it; ++it)
        shift(it.row()) = it.value();
      Eigen::VectorXd sd = Eigen::VectorXd::Zero(K);
      Eigen::VectorXd sd2 = Eigen::VectorXd::Zero(K);
      for (int c : columns)
        for (Eigen::SparseMatrix<double>::InnerIterator it(codes.A, c); it; ++it) {
          const double d = it.value() - shift(it.row());
          sd(it.row()) += d;
          sd2(it.row()) += d * d;
        }
      // Implicit zeros deviate by -shift each.
      for (int j = 0; j < K; ++j) {
        const double zeros = M - nnz(j);
        sd(j) -= zeros * shift(j);
        sd2(j) += zeros * shift(j) * shift(j);
        out.values(j) = std::sqrt(std::max(0.0, (sd2(j) - sd(j) * sd(j) / M) / (M - 1.0)));
      }
      break;
    }
    case Pooling::F4: {
      const double total = sum.sum();
      if (total == 0.0) {
        out.degenerate = true;
      } else {
        out.values = sum / total;
      }
      break;
    }
    case Pooling::F5: {
      const double norm = sum.norm();
      if (norm == 0.0) {
        out.degenerate = true;
      } else {
        out.values = sum / norm;
      }
      break;
    }
  }
  return out;
}

PooledVector pool(const SparseCodes& codes, Pooling f) {
  std::vector<int> all(static_cast<std::size_t>(codes.M()));
  std::iota(all.begin(), all.end(), 0);
  return pool(codes, all, f);
}

std::vector<int> SegmentMap::masses() const {
  std::vector<int> m(static_cast<std::size_t>(segments()), 0);
  for (int s : segment_of) ++m[static_cast<std::size_t>(s)];
  return m;
}

namespace {

// Size of piece `i` when `total` items are cut into `parts` pieces; lower
// pieces get the remainder.
std::size_t piece_size(std::size_t total, int parts, int i) {
  const std::size_t base = total / static_cast<std::size_t>(parts);
  const std::size_t extra = total % static_cast<std::size_t>(parts);
  return base + (static_cast<std::size_t>(i) < extra ? 1 : 0);
}

}  // namespace

SegmentMap equimass_segment(const BinaryImage& skeleton, int beta, SplitOrder order) {
  if (beta < 1) throw Error("equimass_segment: beta must be >= 1");
  const std::vector<Pixel> pixels = skeleton.ink_pixels();
  if (pixels.empty()) throw Error("equimass_segment: empty skeleton");

  SegmentMap map;
  map.beta = beta;
  map.order = order;
  map.segment_of.assign(pixels.size(), 0);

  const bool columns_first = order == SplitOrder::ColumnsThenRows;
  auto by_first = [&](std::size_t a, std::size_t b) {
    const Pixel& p = pixels[a];
    const Pixel& q = pixels[b];
    return columns_first ? std::pair(p.col, p.row) < std::pair(q.col, q.row)
                         : std::pair(p.row, p.col) < std::pair(q.row, q.col);
  };
  auto by_second_axis = [&](std::size_t a, std::size_t b) {
    const Pixel& p = pixels[a];
    const Pixel& q = pixels[b];
    return columns_first ? std::pair(p.row, p.col) < std::pair(q.row, q.col)
                         : std::pair(p.col, p.row) < std::pair(q.col, q.row);
  };

  std::vector<std::size_t> idx(pixels.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), by_first);

  std::size_t at = 0;
  for (int strip = 0; strip < beta; ++strip) {
    const std::size_t strip_size = piece_size(pixels.size(), beta, strip);
    std::vector<std::size_t> members(idx.begin() + static_cast<std::ptrdiff_t>(at),
                                     idx.begin() + static_cast<std::ptrdiff_t>(at + strip_size));
    at += strip_size;
    std::sort(members.begin(), members.end(), by_second_axis);
    std::size_t inner = 0;
    for (int band = 0; band < beta; ++band) {
      const std::size_t band_size = piece_size(members.size(), beta, band);
      for (std::size_t k = 0; k < band_size; ++k)
        map.segment_of[members[inner + k]] = strip * beta + band;
      inner += band_size;
    }
  }
  return map;
}

SignatureDescriptor build_descriptor(const SparseCodes& codes, std::span<const Pixel> locations,
                                     const SegmentMap& segments, const KeypointSet* keypoints,
                                     Pooling f) {
  if (static_cast<std::size_t>(codes.M()) != locations.size())
    throw Error("build_descriptor: codes and locations disagree in length");
  if (segments.segment_of.size() != locations.size())
    throw Error("build_descriptor: segment map does not match the skeleton");

  const int K = codes.K();
  SignatureDescriptor d;
  d.pooling = f;
  d.beta = segments.beta;
  d.K = K;
  d.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.blocks()) * K);
  d.degenerate_blocks.assign(static_cast<std::size_t>(d.blocks()), 0);

  auto put = [&](int block, const PooledVector& pv) {
    d.values.segment(static_cast<Eigen::Index>(block) * K, K) = pv.values;
    d.degenerate_blocks[static_cast<std::size_t>(block)] = pv.degenerate ? 1 : 0;
  };

  put(0, pool(codes, f));

  std::vector<std::vector<int>> members(static_cast<std::size_t>(segments.segments()));
  for (std::size_t i = 0; i < segments.segment_of.size(); ++i)
    members[static_cast<std::size_t>(segments.segment_of[i])].push_back(static_cast<int>(i));
  for (int s = 0; s < segments.segments(); ++s) put(1 + s, pool(codes, members[static_cast<std::size_t>(s)], f));

  std::vector<int> kp_columns;
  if (keypoints) {
    for (const Pixel& p : keypoints->assigned) {
      const auto it = std::lower_bound(locations.begin(), locations.end(), p);
      if (it != locations.end() && *it == p)
        kp_columns.push_back(static_cast<int>(it - locations.begin()));
    }
    std::sort(kp_columns.begin(), kp_columns.end());
    kp_columns.erase(std::unique(kp_columns.begin(), kp_columns.end()), kp_columns.end());
  }
  put(d.blocks() - 1, pool(codes, kp_columns, f));
  return d;
}

void save_descriptor_json(const std::filesystem::path& path, const SignatureDescriptor& d) {
  nlohmann::json j;
  j["pooling_tag"] = to_string(d.pooling);
  j["beta"] = d.beta;
  j["K"] = d.K;
  j["values"] = std::vector<double>(d.values.data(), d.values.data() + d.values.size());
  j["degenerate_blocks"] = d.degenerate_blocks;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

SignatureDescriptor load_descriptor_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  SignatureDescriptor d;
  d.pooling = pooling_from_string(j.at("pooling_tag").get<std::string>());
  d.beta = j.at("beta").get<int>();
  d.K = j.at("K").get<int>();
  const auto values = j.at("values").get<std::vector<double>>();
  d.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (j.contains("degenerate_blocks"))
    d.degenerate_blocks = j.at("degenerate_blocks").get<std::vector<std::uint8_t>>();
  if (d.values.size() != static_cast<Eigen::Index>(d.blocks()) * d.K)
    throw Error("descriptor length does not match (beta^2 + 2) * K");
  return d;
}

namespace {
constexpr char kDescMagic[8] = {'S', 'G', 'S', 'P', 'D', 'E', 'S', 'C'};
}

void save_descriptor_binary(const std::filesystem::path& path, const SignatureDescriptor& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kDescMagic, sizeof kDescMagic);
  const std::uint32_t header[4] = {1, static_cast<std::uint32_t>(d.pooling),
                                   static_cast<std::uint32_t>(d.beta),
                                   static_cast<std::uint32_t>(d.K)};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  const std::uint64_t len = static_cast<std::uint64_t>(d.values.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(reinterpret_cast<const char*>(d.values.data()),
            static_cast<std::streamsize>(len * sizeof(double)));
}

SignatureDescriptor load_descriptor_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kDescMagic, sizeof magic) != 0)
    throw Error("not a descriptor file: " + path.string());
  std::uint32_t header[4];
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(header), sizeof header);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || header[0] != 1 || header[1] < 1 || header[1] > 5) throw Error("bad descriptor header");
  SignatureDescriptor d;
  d.pooling = static_cast<Pooling>(header[1]);
  d.beta = static_cast<int>(header[2]);
  d.K = static_cast<int>(header[3]);
  if (len != static_cast<std::uint64_t>(d.blocks()) * static_cast<std::uint64_t>(d.K))
    throw Error("descriptor length does not match (beta^2 + 2) * K");
  d.values.resize(static_cast<Eigen::Index>(len));
  in.read(reinterpret_cast<char*>(d.values.data()), static_cast<std::streamsize>(len * sizeof(double)));
  if (!in) throw Error("truncated descriptor");
  d.degenerate_blocks.assign(static_cast<std::size_t>(d.blocks()), 0);
  return d;
}

}  // namespace sigsparse
