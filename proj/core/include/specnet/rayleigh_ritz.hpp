#pragma once

#include "specnet/pencil.hpp"

namespace specnet {

struct RitzPairs {
  Matrix vectors;  // n x K, D-orthonormal
  Vector values;   // descending
};

/// Solves (Y^T Wbar Y) O = (Y^T D Y) O Lambda and returns U = Y O.
/// Throws DegenerateError when Y^T D Y is singular.
RitzPairs rayleigh_ritz(const Pencil& p, const Matrix& y);

/// Relative error of each Ritz vector against the matching reference column.
Vector ritz_relative_errors(const RitzPairs& ritz, const Matrix& reference);

}  // namespace specnet
