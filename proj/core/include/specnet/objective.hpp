#pragma once

#include "specnet/pencil.hpp"

namespace specnet {

/// (1/n^2) tr(-2 Y^T Wbar Y + (1/n^2) (Y^T D Y)^2), Wbar = W - eta eta^T when
/// the pencil is deflated.
double f2_value(const Pencil& p, const Matrix& y);

/// -4 Wbar Y / n + 4 D Y (Y^T D Y) / n^3. This is n times the derivative of
/// f2_value; every update rule uses this scaling.
Matrix f2_grad_full_matrix(const Pencil& p, const Matrix& y);

/// Second directional derivative of n * f2_value at Y along S.
double hessian_quadratic_form(const Pencil& p, const Matrix& y, const Matrix& s);

/// tr(Y^T (D - Wbar) Y) / n^2 for the D-orthonormalized iterate.
double f1_value(const Pencil& p, const Matrix& y);

/// -sum of squared leading eigenvalues: the minimum of f2.
double f2_optimum(const Vector& eigenvalues, Index k);

/// K - sum of leading eigenvalues: the minimum of f1 under Y^T D Y = n^2 I.
double f1_optimum(const Vector& eigenvalues, Index k);

}  // namespace specnet
