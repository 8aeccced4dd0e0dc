#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "specnet/graph.hpp"

namespace specnet {

/// Fully connected network: ReLU hidden layers, affine output.
/// weights[l] is (sizes[l+1] x sizes[l]); rows of the input are samples.
struct MlpParams {
  std::vector<Index> sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  Index input_dim() const { return sizes.front(); }
  Index output_dim() const { return sizes.back(); }
  Index layers() const { return static_cast<Index>(weights.size()); }

  /// Same shapes, all zeros.
  MlpParams zeros_like() const;
  /// Throws InputError on inconsistent shapes or non-finite values.
  void validate() const;
};

/// Weights uniform on +-sqrt(6 / fan_in), biases zero.
MlpParams init_mlp(const std::vector<Index>& sizes, std::uint64_t seed);

Matrix mlp_forward(const MlpParams& params, const Matrix& x);

/// Gradient of tr(Y(theta)^T G) with G held constant.
MlpParams train_grad(const MlpParams& params, const Matrix& x, const Matrix& g);

/// Adam moments for one dense block.
struct AdamMoments {
  Matrix m;
  Matrix v;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<AdamMoments> weights;
  std::vector<AdamMoments> biases;

  static AdamState for_params(const MlpParams& params);
};

void adam_update(MlpParams& params, AdamState& state, const MlpParams& grads, double lr);

/// Adam on a standalone matrix (used for the orthogonalization layer).
struct MatrixAdam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  AdamMoments moments;

  void update(Matrix& value, const Matrix& grad, double lr);
};

/// Text checkpoint: "layers L" then the L+1 sizes, then each layer's weights
/// row-major followed by its biases. An optional trailing "xi K" block holds
/// the orthogonalization layer.
void save_mlp(const MlpParams& params, const Matrix* xi, const std::filesystem::path& path);
MlpParams load_mlp(const std::filesystem::path& path, Matrix* xi = nullptr);

}  // namespace specnet
