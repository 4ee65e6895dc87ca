#pragma once

// Independent reference implementations and random generators shared by the
// unit, property and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <span>
#include <vector>

#include "sigsparse/image.hpp"

namespace oracle {

using sigsparse::BinaryImage;
using sigsparse::GrayImage;
using sigsparse::Pixel;

// Generators

inline Eigen::MatrixXd random_dictionary(int n, int K, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd D(n, K);
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < n; ++i) D(i, j) = g(rng);
    D.col(j).normalize();
  }
  return D;
}

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = g(rng);
  return x;
}

inline GrayImage random_gray(int w, int h, std::mt19937_64& rng, int lo = 0, int hi = 255) {
  std::uniform_int_distribution<int> u(lo, hi);
  GrayImage img(w, h);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(u(rng));
  return img;
}

/// Union of random filled discs and thick segments: a blob-like binary image.
inline BinaryImage random_blobs(int w, int h, int shapes, std::mt19937_64& rng) {
  BinaryImage img(w, h);
  std::uniform_real_distribution<double> ux(0.0, w - 1.0), uy(0.0, h - 1.0), ur(1.0, 4.0);
  for (int s = 0; s < shapes; ++s) {
    const double x0 = ux(rng), y0 = uy(rng), x1 = ux(rng), y1 = uy(rng), rad = ur(rng);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const double dx = x1 - x0, dy = y1 - y0;
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0 ? ((c - x0) * dx + (r - y0) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        if (std::hypot(c - (x0 + t * dx), r - (y0 + t * dy)) <= rad) img.set(r, c, true);
      }
  }
  return img;
}

/// Random one-pixel-wide polyline skeleton of roughly `steps` pixels.
inline BinaryImage random_skeleton(int w, int h, int steps, std::mt19937_64& rng) {
  BinaryImage img(w, h);
  std::uniform_int_distribution<int> ur(0, h - 1), uc(0, w - 1), ud(-1, 1);
  int r = ur(rng), c = uc(rng);
  for (int i = 0; i < steps; ++i) {
    img.set(r, c, true);
    r = std::clamp(r + ud(rng), 0, h - 1);
    c = std::clamp(c + ud(rng), 0, w - 1);
  }
  return img;
}

/// rho-sparse combinations of distinct columns of D with Gaussian weights,
/// plus isotropic noise scaled to `noise` times the clean signal norm.
inline Eigen::MatrixXd sparse_signals(const Eigen::MatrixXd& D, int M, int rho, double noise, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(D.cols()) - 1);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd X(D.rows(), M);
  for (int i = 0; i < M; ++i) {
    std::vector<int> used;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(D.rows());
    while (static_cast<int>(used.size()) < rho) {
      const int k = pick(rng);
      if (std::find(used.begin(), used.end(), k) != used.end()) continue;
      used.push_back(k);
      x += g(rng) * D.col(k);
    }
    Eigen::VectorXd n = random_vector(static_cast<int>(D.rows()), rng);
    X.col(i) = x + noise * x.norm() / n.norm() * n;
  }
  return X;
}

// Image oracles

/// Otsu by direct minimisation of the within-class variance over pixel
/// values; near-equal optima (relative 1e-12) resolve to the smallest cut.
inline int otsu_threshold(const GrayImage& img) {
  std::vector<double> crit(256, std::numeric_limits<double>::infinity());
  for (int t = 0; t < 255; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (auto v : img.data()) {
      if (v <= t) { n0 += 1; s0 += v; } else { n1 += 1; s1 += v; }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double m0 = s0 / n0, m1 = s1 / n1;
    double within = 0;
    for (auto v : img.data()) within += v <= t ? (v - m0) * (v - m0) : (v - m1) * (v - m1);
    crit[static_cast<std::size_t>(t)] = within;
  }
  const double best = *std::min_element(crit.begin(), crit.end());
  if (!std::isfinite(best)) return -1;
  for (int t = 0; t < 256; ++t)
    if (crit[static_cast<std::size_t>(t)] <= best * (1 + 1e-12) + 1e-9) return t;
  return -1;
}

/// Connected components by BFS; `eight` selects 8- or 4-adjacency.
inline int components(const BinaryImage& img, bool ink, bool eight) {
  const int h = img.height(), w = img.width();
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  int count = 0;
  for (int r0 = 0; r0 < h; ++r0)
    for (int c0 = 0; c0 < w; ++c0) {
      if (img(r0, c0) != ink || seen[static_cast<std::size_t>(r0) * w + c0]) continue;
      ++count;
      std::queue<Pixel> q;
      q.push({r0, c0});
      seen[static_cast<std::size_t>(r0) * w + c0] = 1;
      while (!q.empty()) {
        const Pixel p = q.front();
        q.pop();
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if ((dr == 0 && dc == 0) || (!eight && dr != 0 && dc != 0)) continue;
            const int r = p.row + dr, c = p.col + dc;
            if (!img.contains(r, c) || img(r, c) != ink || seen[static_cast<std::size_t>(r) * w + c]) continue;
            seen[static_cast<std::size_t>(r) * w + c] = 1;
            q.push({r, c});
          }
      }
    }
  return count;
}

/// Simple-point test by explicit component counting in the 3x3 window:
/// exactly one 8-component of ink neighbours, and exactly one 4-component
/// of background neighbours that touches a 4-neighbour of the centre.
/// `code` bit k-1 is x_k with x_1..x_8 = E, NE, N, NW, W, SW, S, SE.
inline bool is_simple(std::uint8_t code) {
  static constexpr int dr[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  static constexpr int dc[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  BinaryImage win(3, 3);
  for (int k = 0; k < 8; ++k) win.set(1 + dr[k], 1 + dc[k], (code >> k) & 1);
  const int ink = components(win, true, true);
  if (ink != 1) return false;
  // Background 4-components within the window (centre counted as ink),
  // restricted to those containing a 4-neighbour of the centre.
  int bg = 0;
  std::array<std::array<char, 3>, 3> seen{};
  for (int k : {0, 2, 4, 6}) {
    const int r0 = 1 + dr[k], c0 = 1 + dc[k];
    if (win(r0, c0) || seen[r0][c0]) continue;
    ++bg;
    std::queue<Pixel> q;
    q.push({r0, c0});
    seen[r0][c0] = 1;
    while (!q.empty()) {
      const Pixel p = q.front();
      q.pop();
      for (auto [a, b] : {std::pair{0, 1}, {0, -1}, {1, 0}, {-1, 0}}) {
        const int r = p.row + a, c = p.col + b;
        if (r < 0 || r > 2 || c < 0 || c > 2 || (r == 1 && c == 1)) continue;
        if (win(r, c) || seen[r][c]) continue;
        seen[r][c] = 1;
        q.push({r, c});
      }
    }
  }
  return bg == 1;
}

/// Patch density by per-pixel window counting.
inline double patch_density(const BinaryImage& img, int ps) {
  const int h = ps / 2;
  double total = 0;
  int n = 0;
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) {
      if (!img(r, c)) continue;
      int cnt = 0;
      for (int rr = r - h; rr <= r + h; ++rr)
        for (int cc = c - h; cc <= c + h; ++cc) cnt += img.at_or_background(rr, cc) ? 1 : 0;
      total += static_cast<double>(cnt) / (ps * ps);
      ++n;
    }
  return total / n;
}

// Sparse-coding oracles

struct OmpResult {
  std::vector<int> support;
  Eigen::VectorXd coef;  // full length K
};

/// Textbook OMP: explicit residual, QR least squares on the support,
/// lowest index on correlation ties.
inline OmpResult naive_omp(const Eigen::MatrixXd& D, const Eigen::VectorXd& x, int rho, double rel_tol = 1e-10) {
  OmpResult out;
  out.coef = Eigen::VectorXd::Zero(D.cols());
  Eigen::VectorXd r = x;
  const double stop = rel_tol * x.norm();
  for (int s = 0; s < rho && r.norm() > stop; ++s) {
    const Eigen::VectorXd corr = (D.transpose() * r).cwiseAbs();
    int best = -1;
    for (int j = 0; j < corr.size(); ++j) {
      if (std::find(out.support.begin(), out.support.end(), j) != out.support.end()) continue;
      if (best < 0 || corr(j) > corr(best)) best = j;
    }
    out.support.push_back(best);
    Eigen::MatrixXd Ds(D.rows(), static_cast<Eigen::Index>(out.support.size()));
    for (std::size_t i = 0; i < out.support.size(); ++i) Ds.col(static_cast<Eigen::Index>(i)) = D.col(out.support[i]);
    const Eigen::VectorXd c = Ds.householderQr().solve(x);
    out.coef.setZero();
    for (std::size_t i = 0; i < out.support.size(); ++i) out.coef(out.support[i]) = c(static_cast<Eigen::Index>(i));
    r = x - Ds * c;
  }
  return out;
}

/// Largest violation of the lasso optimality conditions.
inline double lasso_kkt_violation(const Eigen::MatrixXd& D, const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                                  double lambda, bool positive = false) {
  const Eigen::VectorXd g = D.transpose() * (x - D * a);
  double worst = 0;
  for (int j = 0; j < a.size(); ++j) {
    if (positive) {
      worst = std::max(worst, std::max(0.0, -a(j)));
      worst = std::max(worst, a(j) > 0 ? std::abs(g(j) - lambda) : std::max(0.0, g(j) - lambda));
    } else {
      worst = std::max(worst, a(j) != 0 ? std::abs(g(j) - lambda * (a(j) > 0 ? 1 : -1))
                                        : std::max(0.0, std::abs(g(j)) - lambda));
    }
  }
  return worst;
}

/// Greedy bipartite matching of atoms by |cosine|; returns the number of
/// learned atoms matched to distinct true atoms above the threshold.
inline int matched_atoms(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& learned, double threshold) {
  Eigen::MatrixXd T = truth, L = learned;
  for (int j = 0; j < T.cols(); ++j) T.col(j).normalize();
  for (int j = 0; j < L.cols(); ++j)
    if (L.col(j).norm() > 0) L.col(j).normalize();
  Eigen::MatrixXd C = (T.transpose() * L).cwiseAbs();
  int matched = 0;
  for (Eigen::Index step = 0; step < std::min(C.rows(), C.cols()); ++step) {
    Eigen::Index i, j;
    const double best = C.maxCoeff(&i, &j);
    if (best <= threshold) break;
    ++matched;
    C.row(i).setConstant(-1);
    C.col(j).setConstant(-1);
  }
  return matched;
}

// Pooling oracle on a dense code matrix (rows = atoms).
inline Eigen::VectorXd naive_pool(const Eigen::MatrixXd& A, const std::vector<int>& cols, int f) {
  const Eigen::Index K = A.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(K);
  const double M = static_cast<double>(cols.size());
  for (Eigen::Index k = 0; k < K; ++k) {
    double sum = 0, mx = -std::numeric_limits<double>::infinity();
    for (int c : cols) {
      sum += A(k, c);
      mx = std::max(mx, A(k, c));
    }
    switch (f) {
      case 1: out(k) = sum / M; break;
      case 2: out(k) = mx; break;
      case 3: {
        double ss = 0;
        for (int c : cols) ss += (A(k, c) - sum / M) * (A(k, c) - sum / M);
        out(k) = std::sqrt(ss / (M - 1));
        break;
      }
      default: out(k) = sum;
    }
  }
  if (f == 4) out /= out.sum();
  if (f == 5) out /= out.norm();
  return out;
}

// Metric oracles

inline double far(std::span<const double> forg, double t) {
  int n = 0;
  for (double s : forg) n += s >= t;
  return 100.0 * n / static_cast<double>(forg.size());
}

inline double frr(std::span<const double> gen, double t) {
  int n = 0;
  for (double s : gen) n += s < t;
  return 100.0 * n / static_cast<double>(gen.size());
}

/// Candidate thresholds: unique scores plus one value below and one above.
inline std::vector<double> thresholds(std::span<const double> a, std::span<const double> b) {
  std::vector<double> t(a.begin(), a.end());
  t.insert(t.end(), b.begin(), b.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  const double eps = 1e-6 * (1 + std::max(std::abs(t.front()), std::abs(t.back())));
  t.insert(t.begin(), t.front() - eps);
  t.push_back(t.back() + eps);
  return t;
}

/// Crossing of FAR and FRR found by evaluating every candidate threshold
/// independently, interpolated linearly between the bracketing pair.
inline std::pair<double, double> eer(std::span<const double> gen, std::span<const double> forg) {
  const auto ts = thresholds(gen, forg);
  double pf = 0, pr = 0, pt = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double fa = far(forg, ts[i]), fr = frr(gen, ts[i]);
    if (fa == fr) return {fa, ts[i]};
    if (fr > fa) {
      if (i == 0) return {fa, ts[i]};
      const double s = (pf - pr) / ((pf - pr) - (fa - fr));
      return {pf + s * (fa - pf), pt + s * (ts[i] - pt)};
    }
    pf = fa;
    pr = fr;
    pt = ts[i];
  }
  return {0.5 * (pf + pr), pt};
}

/// Pairwise concordance AUC.
inline double auc(std::span<const double> pos, std::span<const double> neg) {
  double acc = 0;
  for (double p : pos)
    for (double n : neg) acc += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return acc / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace oracle
