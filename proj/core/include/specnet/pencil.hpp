#pragma once

#include <cstdint>

#include "specnet/graph.hpp"
#include "specnet/oracle.hpp"

namespace specnet {

/// Generalized eigenproblem instance (W - eta eta^T, D). `eta` is empty when
/// deflation is disabled.
struct Pencil {
  SparseSym w;
  Vector d;
  Vector eta;

  Index n() const { return w.size(); }
  bool deflated() const { return eta.size() > 0; }
};

/// Computes degrees (throws DegenerateError on isolated nodes) and, when
/// requested, the deflation vector.
Pencil make_pencil(SparseSym w, bool deflate);

/// Dense W - eta eta^T (or W).
Matrix dense_operator(const Pencil& p);

/// Full dense reference decomposition of the pencil.
DenseEig pencil_oracle(const Pencil& p, Index cap = kDefaultOracleCap);

/// Multiply-add tally used to compare the per-step work of the schemes.
struct OpCounter {
  std::uint64_t macs = 0;
  void add(std::uint64_t n) { macs += n; }
};

/// Rows `rows` of W Y (no deflation term).
Matrix w_rows_times(const Pencil& p, const IndexSet& rows, const Matrix& y,
                    OpCounter* ops = nullptr);

/// (W - eta eta^T) Y over all rows.
Matrix apply_operator(const Pencil& p, const Matrix& y);

/// max_i ||D_i^{1/2} Y_i||_2.
double ball_radius(const Vector& d, const Matrix& y);

}  // namespace specnet
