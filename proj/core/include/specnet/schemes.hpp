#pragma once

#include <string_view>

#include "specnet/pencil.hpp"

namespace specnet {

/// How the batch gradient is formed.
///   local:    batch submatrix W_BB with its own degrees and deflation
///   full:     full rows W_B,X plus freshly computed eta^T Y and Y^T D Y
///   neighbor: rows W_B,N plus incrementally maintained caches
enum class Scheme { kLocal, kFull, kNeighbor };

const char* to_string(Scheme scheme) noexcept;
Scheme parse_scheme(std::string_view name);

/// Iterate Y with caches C = Y^T D Y and u = eta^T Y (u is zero when the
/// pencil is not deflated).
struct Embedding {
  Matrix y;
  Matrix c;
  Vector u;
  bool fresh = false;

  Index n() const { return y.rows(); }
  Index k() const { return y.cols(); }
};

Embedding make_embedding(const Pencil& p, Matrix y);
void refresh_caches(const Pencil& p, Embedding& emb, OpCounter* ops = nullptr);

/// Scheme gradient restricted to the batch rows (|B| x K).
Matrix f2_grad_batch(const Pencil& p, const Embedding& emb, const IndexSet& batch,
                     Scheme scheme, OpCounter* ops = nullptr);

/// Y_B -= alpha * grad; caches follow the scheme's bookkeeping rule.
/// Throws DivergenceError if the iterate stops being finite.
void f2_step(const Pencil& p, Embedding& emb, const IndexSet& batch, double alpha,
             Scheme scheme, OpCounter* ops = nullptr);

/// One f1 step on the variable D^{-1/2}-scaled iterate followed by the
/// scheme's normalization. Throws DegenerateError when the factorization
/// fails.
void f1_batch_step(const Pencil& p, Embedding& emb, const IndexSet& batch, double alpha,
                   Scheme scheme, OpCounter* ops = nullptr);

/// Local pencil of a batch: dense W_BB (minus its own deflation term when
/// the parent pencil is deflated) and its row sums.
struct LocalPencil {
  Matrix w;
  Vector d;
};
LocalPencil local_pencil(const Pencil& p, const IndexSet& batch, OpCounter* ops = nullptr);

}  // namespace specnet
