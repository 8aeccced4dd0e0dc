#pragma once

#include <cstdint>
#include <functional>

#include "specnet/mlp.hpp"
#include "specnet/rayleigh_ritz.hpp"
#include "specnet/schemes.hpp"
#include "specnet/solver.hpp"

namespace specnet {

/// Detached running copies for the neighbor scheme: C* ~ Y^T D Y,
/// u* ~ eta^T Y and the last seen network output Y0.
struct NeighborCaches {
  Matrix c_star;
  Vector u_star;
  Matrix y0;
  bool initialized = false;
};

/// Full forward pass over X; sets all three caches exactly.
void init_caches(const MlpParams& params, const Pencil& p, const Matrix& x,
                 NeighborCaches& caches);

/// Replaces Y0 on `rows` by `y_rows` and updates C*, u* accordingly.
void refresh_caches_on(const Pencil& p, NeighborCaches& caches, const IndexSet& rows,
                       const Matrix& y_rows);

/// Orthogonalization layer of the constrained baseline.
struct OrthLayer {
  Matrix xi;
  MatrixAdam adam;
};

/// Training gradient G_B for the f2 objective (constant to the chain rule).
/// For the neighbor scheme `caches` is refreshed on N(B) first.
Matrix specnet2_batch_target(const MlpParams& params, const Pencil& p, const Matrix& x,
                             NeighborCaches& caches, const IndexSet& batch, Scheme scheme);

/// One optimizer step of the unconstrained network.
void specnet2_train_step(MlpParams& params, const Pencil& p, const Matrix& x,
                         NeighborCaches& caches, const IndexSet& batch, Scheme scheme,
                         double lr, AdamState& adam);

/// One optimizer step of the constrained network. Xi is reset from the
/// scheme's factorization; with `xi_grad` it then takes an Adam step along
/// Y_B^T G. Throws DegenerateError if the factorization fails.
void specnet1_train_step(MlpParams& params, OrthLayer& orth, const Pencil& p,
                         const Matrix& x, NeighborCaches& caches, const IndexSet& batch,
                         Scheme scheme, double lr, AdamState& adam, bool xi_grad);

/// Rayleigh-Ritz on the network output over all of X, then the relative
/// error of each Ritz vector against the matching reference column.
Vector evaluate_embedding(const MlpParams& params, const Matrix& x, const Pencil& p,
                          const Matrix& reference, const Matrix* xi = nullptr);

/// Network output (times Xi when given).
Matrix network_output(const MlpParams& params, const Matrix& x, const Matrix* xi = nullptr);

struct TrainOptions {
  Objective objective = Objective::kF2;  // f2: unconstrained, f1: with Xi
  Scheme scheme = Scheme::kNeighbor;
  double lr = 1e-3;
  Index epochs = 1;
  Index batch_size = 4;
  std::uint64_t seed = 0;
  bool xi_grad = true;
  /// Called with the epoch number (0 = before training).
  std::function<void(Index epoch, const MlpParams&, const OrthLayer&)> on_epoch;
};

/// Reshuffled disjoint batches every epoch.
void train_network(MlpParams& params, OrthLayer& orth, const Pencil& p, const Matrix& x,
                   const TrainOptions& options);

}  // namespace specnet
