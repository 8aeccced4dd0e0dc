#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "specnet/graph.hpp"

namespace specnet {

/// x_i = (cos t_i, sin t_i) + xi_i, t_i ~ U[0, pi], xi_i ~ N(0, noise_var I).
PointCloud gen_one_moon(Index n, double noise_var, std::uint64_t seed);

/// First half around (cos t - 0.5, sin t - 0.3) with label 1, second half
/// around (-cos t + 0.5, -sin t + 0.3) with label 2.
PointCloud gen_two_moons(Index n, std::uint64_t seed, double noise_var = 0.0036);

struct MnistSet {
  Matrix images;            // n x (rows * cols), values in [0, 1]
  std::vector<int> labels;  // 0..9
  Index rows = 28;
  Index cols = 28;
};

/// Raw IDX bytes to parse or write; kept separate from the normalized set so
/// the writer can be exact.
struct MnistRaw {
  std::uint32_t rows = 28;
  std::uint32_t cols = 28;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major
  std::vector<std::uint8_t> labels;
};

MnistRaw read_mnist_idx_raw(const std::filesystem::path& images_path,
                            const std::filesystem::path& labels_path);
void write_mnist_idx(const MnistRaw& raw, const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path);

/// Pixels divided by 255.
MnistSet load_mnist_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);

/// First `count` samples after a seeded shuffle.
MnistSet mnist_subset(const MnistSet& set, Index count, std::uint64_t seed);

PointCloud to_point_cloud(const MnistSet& set);

/// Optimal two-cluster split of scalar values (exact sorted sweep, which is
/// the Lloyd fixed point reached from the extreme values). The cluster with
/// the smaller centroid gets label 1.
std::vector<int> kmeans_1d(const std::vector<double>& values);

/// max(mismatch rate, 1 - mismatch rate) for labels in {1, 2}.
double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// CSV "x0,x1,...,label" (label column only when labels are present).
void write_points_csv(const PointCloud& pc, const std::filesystem::path& path);
PointCloud read_points_csv(const std::filesystem::path& path);

}  // namespace specnet
