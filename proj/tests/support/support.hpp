#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "specnet/data.hpp"
#include "specnet/graph.hpp"
#include "specnet/pencil.hpp"

namespace specnet::testing {

/// Connected random affinity: a ring plus Erdos-Renyi edges with weights in
/// [0.05, 1]; unit diagonal when `self_loops`.
SparseSym random_affinity(Index n, std::uint64_t seed, double density = 0.3,
                          bool self_loops = true);

Pencil random_pencil(Index n, std::uint64_t seed, bool deflate = false,
                     double density = 0.3);

/// Random pencil whose leading `k + 1` eigenvalues are positive and whose
/// gaps lambda_k - lambda_{k+1} and lambda_{k+1} - lambda_{k+2} exceed
/// `min_gap`. Redraws until found.
Pencil pencil_with_positive_top(Index n, Index k, std::uint64_t seed, bool deflate,
                                double min_gap = 1e-3);

/// Two dense communities joined by a few weak edges.
SparseSym two_community_affinity(Index n, std::uint64_t seed);

/// Fixed-degree ring lattice: every node joined to its `half_width` nearest
/// ring neighbors on each side, unit weights, unit diagonal.
SparseSym ring_lattice(Index n, Index half_width);

/// Path 0 - 1 - 2 with unit weights and zero diagonal.
SparseSym path3();

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0);
Matrix random_orthogonal(Index k, std::uint64_t seed);

/// Procedural stand-in for handwritten digits: a class-specific stroke
/// pattern, randomly shifted, with pixel noise. Labels cycle through 0..9.
MnistRaw synthetic_mnist(Index count, std::uint64_t seed);

/// First data seed >= `start` whose one-moon Gaussian graph is connected.
std::uint64_t connected_moon_seed(Index n, double noise_var, double sigma, double threshold,
                                  std::uint64_t start = 1);

/// Fresh empty directory under the system temp path.
std::filesystem::path fresh_dir(const std::string& tag);

/// ||a - b||_F / ||b||_F (absolute when b vanishes).
double rel_diff(const Matrix& a, const Matrix& b);

}  // namespace specnet::testing
