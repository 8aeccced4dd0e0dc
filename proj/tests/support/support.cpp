#include "support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <utility>

#include <Eigen/QR>

#include "specnet/random.hpp"

namespace specnet::testing {

namespace {

SparseSym from_edge_map(Index n, const std::map<std::pair<Index, Index>, double>& edges) {
  std::vector<Triplet> t;
  for (const auto& [ij, w] : edges) {
    t.push_back({ij.first, ij.second, w});
    if (ij.first != ij.second) t.push_back({ij.second, ij.first, w});
  }
  return SparseSym::from_triplets(n, std::move(t));
}

}  // namespace

SparseSym random_affinity(Index n, std::uint64_t seed, double density, bool self_loops) {
  Rng rng(seed);
  std::map<std::pair<Index, Index>, double> edges;
  for (Index i = 0; i < n; ++i) {
    if (self_loops) edges[{i, i}] = 1.0;
    if (n > 1) {
      const Index j = (i + 1) % n;
      edges[{std::min(i, j), std::max(i, j)}] = rng.uniform(0.05, 1.0);
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < density) edges[{i, j}] = rng.uniform(0.05, 1.0);
    }
  }
  return from_edge_map(n, edges);
}

Pencil random_pencil(Index n, std::uint64_t seed, bool deflate, double density) {
  return make_pencil(random_affinity(n, seed, density), deflate);
}

Pencil pencil_with_positive_top(Index n, Index k, std::uint64_t seed, bool deflate,
                                double min_gap) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t s = seed * 1000 + attempt;
    Rng rng(s);
    // Sparse enough that several eigenvalues stay well above zero.
    const double density = rng.uniform(0.05, 0.2);
    Pencil p = random_pencil(n, s, deflate, density);
    const Vector lam = pencil_oracle(p).eigenvalues;
    if (lam.size() < k + 2) continue;
    if (lam[k] <= min_gap) continue;
    if (lam[k - 1] - lam[k] < min_gap || lam[k] - lam[k + 1] < min_gap) continue;
    return p;
  }
}

SparseSym two_community_affinity(Index n, std::uint64_t seed) {
  Rng rng(seed);
  const Index half = n / 2;
  std::map<std::pair<Index, Index>, double> edges;
  for (Index i = 0; i < n; ++i) {
    edges[{i, i}] = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      const bool same = (i < half) == (j < half);
      if (same && rng.uniform() < 0.6) edges[{i, j}] = rng.uniform(0.5, 1.0);
    }
  }
  // A handful of weak bridges keep the graph connected.
  for (int b = 0; b < 3; ++b) {
    const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(half)));
    const Index j = half + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - half)));
    edges[{i, j}] = rng.uniform(0.05, 0.2);
  }
  return from_edge_map(n, edges);
}

SparseSym ring_lattice(Index n, Index half_width) {
  std::map<std::pair<Index, Index>, double> edges;
  for (Index i = 0; i < n; ++i) {
    edges[{i, i}] = 1.0;
    for (Index s = 1; s <= half_width; ++s) {
      const Index j = (i + s) % n;
      edges[{std::min(i, j), std::max(i, j)}] = 1.0;
    }
  }
  return from_edge_map(n, edges);
}

SparseSym path3() {
  return SparseSym::from_triplets(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
}

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

Matrix random_orthogonal(Index k, std::uint64_t seed) {
  const Matrix a = random_matrix(k, k, seed);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(k, k);
}

MnistRaw synthetic_mnist(Index count, std::uint64_t seed) {
  Rng rng(seed);
  MnistRaw raw;
  raw.rows = 28;
  raw.cols = 28;
  const int side = 28;
  // Each class: three strokes with class-dependent endpoints.
  std::vector<std::array<double, 12>> strokes(10);
  Rng shape_rng(0xd161);
  for (auto& s : strokes) {
    for (double& v : s) v = shape_rng.uniform(6.0, 21.0);
  }
  raw.pixels.assign(static_cast<std::size_t>(count) * side * side, 0);
  raw.labels.resize(static_cast<std::size_t>(count));
  for (Index c = 0; c < count; ++c) {
    const int label = static_cast<int>(c % 10);
    raw.labels[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(label);
    const double dx = rng.uniform(-2.0, 2.0);
    const double dy = rng.uniform(-2.0, 2.0);
    std::uint8_t* img = raw.pixels.data() + static_cast<std::size_t>(c) * side * side;
    const auto& s = strokes[static_cast<std::size_t>(label)];
    for (int k = 0; k < 3; ++k) {
      const double x0 = s[4 * k] + dx, y0 = s[4 * k + 1] + dy;
      const double x1 = s[4 * k + 2] + dx, y1 = s[4 * k + 3] + dy;
      for (int t = 0; t <= 40; ++t) {
        const double x = x0 + (x1 - x0) * t / 40.0;
        const double y = y0 + (y1 - y0) * t / 40.0;
        for (int oy = -1; oy <= 1; ++oy) {
          for (int ox = -1; ox <= 1; ++ox) {
            const int px = static_cast<int>(std::lround(x)) + ox;
            const int py = static_cast<int>(std::lround(y)) + oy;
            if (px < 0 || py < 0 || px >= side || py >= side) continue;
            const int v = (ox == 0 && oy == 0) ? 255 : 150;
            std::uint8_t& cell = img[py * side + px];
            cell = static_cast<std::uint8_t>(std::max<int>(cell, v));
          }
        }
      }
    }
    for (int k = 0; k < 20; ++k) {
      img[rng.below(side * side)] = static_cast<std::uint8_t>(rng.below(256));
    }
  }
  return raw;
}

std::uint64_t connected_moon_seed(Index n, double noise_var, double sigma, double threshold,
                                  std::uint64_t start) {
  for (std::uint64_t s = start;; ++s) {
    const SparseSym w = build_gaussian_affinity(gen_one_moon(n, noise_var, s), sigma, threshold);
    const std::vector<Index> comp = connected_components(w);
    if (*std::max_element(comp.begin(), comp.end()) == 0) return s;
  }
}

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("specnet_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double rel_diff(const Matrix& a, const Matrix& b) {
  const double nb = b.norm();
  const double diff = (a - b).norm();
  return nb > 0.0 ? diff / nb : diff;
}

}  // namespace specnet::testing
